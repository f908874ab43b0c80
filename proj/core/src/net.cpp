#include "softlex/net.hpp"

#include <algorithm>

#include "softlex/errors.hpp"

namespace softlex::net {

std::vector<Var> lstm_sequence(Tape& tape, Parameter& W, Parameter& b,
                               const std::vector<Var>& xs, bool reverse) {
  if (xs.empty()) throw IntegrityError("lstm: empty input sequence");
  const Eigen::Index four_h = W.value.rows();
  if (four_h % kGateBlocks != 0) throw IntegrityError("lstm: weight rows not divisible by 4");
  const int hidden = static_cast<int>(four_h / kGateBlocks);

  Var h = tape.constant(Eigen::MatrixXd::Zero(hidden, 1));
  Var c = tape.constant(Eigen::MatrixXd::Zero(hidden, 1));
  std::vector<Var> hs(xs.size());
  const int n = static_cast<int>(xs.size());
  for (int step = 0; step < n; ++step) {
    const int t = reverse ? n - 1 - step : step;
    Var z = tape.affine(W, b, tape.concat({xs[static_cast<size_t>(t)], h}));
    Var i = tape.sigmoid(tape.slice(z, 0, hidden));
    Var f = tape.sigmoid(tape.slice(z, hidden, hidden));
    Var o = tape.sigmoid(tape.slice(z, 2 * hidden, hidden));
    Var g = tape.tanh(tape.slice(z, 3 * hidden, hidden));
    c = tape.add(tape.cmul(g, i), tape.cmul(c, f));
    h = tape.cmul(o, tape.tanh(c));
    hs[static_cast<size_t>(t)] = h;
  }
  return hs;
}

Eigen::MatrixXd make_transitions(int labels) {
  if (labels <= 0) throw ConfigError("crf: need at least one label");
  const int total = labels + 2;
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(total, total);
  const double ninf = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < total; ++i) {
    t(i, start_state(labels)) = ninf;    // nothing enters the start state
    t(stop_state(labels), i) = ninf;     // nothing leaves the stop state
  }
  return t;
}

double crf_log_partition(const Eigen::MatrixXd& emissions, const Eigen::MatrixXd& trans) {
  const int n = static_cast<int>(emissions.rows());
  const int labels = static_cast<int>(emissions.cols());
  if (n == 0) throw IntegrityError("crf: empty sequence");
  if (trans.rows() != labels + 2 || trans.cols() != labels + 2)
    throw IntegrityError("crf: transition matrix must be (|Y|+2)^2");
  if (!emissions.allFinite()) throw IntegrityError("crf: non-finite emission");
  const int kStart = start_state(labels), kStop = stop_state(labels);

  auto lse = [](const Eigen::VectorXd& v) {
    double m = v.maxCoeff();
    return m + std::log((v.array() - m).exp().sum());
  };

  Eigen::VectorXd alpha =
      trans.row(kStart).head(labels).transpose() + emissions.row(0).transpose();
  Eigen::VectorXd next(labels), work(labels);
  for (int t = 1; t < n; ++t) {
    for (int j = 0; j < labels; ++j) {
      work = alpha + trans.col(j).head(labels);
      next(j) = lse(work) + emissions(t, j);
    }
    alpha = next;
  }
  work = alpha + trans.col(kStop).head(labels);
  return lse(work);
}

}  // namespace softlex::net
