#pragma once

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <vector>

#include "softlex/tape.hpp"

namespace softlex::net {

// One LSTM cell. The weight matrix stacks the four gate blocks over the
// concatenated [x; h_prev] input, rows ordered input gate, forget gate,
// output gate, then cell candidate:
//   [i; f; o; g] = W [x; h] + b,  i,f,o through sigmoid, g through tanh,
//   c = g .* i + c_prev .* f,     h = o .* tanh(c).
// The input and forget gates are independent (no 1-f coupling).
inline constexpr int kGateBlocks = 4;

std::vector<Var> lstm_sequence(Tape& tape, Parameter& W, Parameter& b,
                               const std::vector<Var>& xs, bool reverse);

// Forward-only batched step. X is in_dim x batch, H and C are hidden x batch
// and are replaced by the new state. b broadcasts over the batch.
template <typename Scalar>
void lstm_step(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& W,
               const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b,
               const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& X,
               Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& H,
               Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& C) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index hidden = H.rows();
  const Eigen::Index batch = X.cols();
  Mat in(X.rows() + hidden, batch);
  in.topRows(X.rows()) = X;
  in.bottomRows(hidden) = H;
  Mat z = (W * in).colwise() + b;
  auto i = z.topRows(hidden).array();
  auto f = z.middleRows(hidden, hidden).array();
  auto o = z.middleRows(2 * hidden, hidden).array();
  auto g = z.bottomRows(hidden).array();
  Mat ig = (Scalar(1) / (Scalar(1) + (-i).exp())).matrix();
  Mat fg = (Scalar(1) / (Scalar(1) + (-f).exp())).matrix();
  Mat og = (Scalar(1) / (Scalar(1) + (-o).exp())).matrix();
  Mat gc = g.tanh().matrix();
  C = (gc.array() * ig.array() + C.array() * fg.array()).matrix();
  H = (og.array() * C.array().tanh()).matrix();
}

// Fresh (|Y|+2)^2 transition matrix: zeros between reachable states, -inf on
// the walls nothing may cross (into the start state, out of the stop state).
Eigen::MatrixXd make_transitions(int labels);
inline int start_state(int labels) { return labels; }
inline int stop_state(int labels) { return labels + 1; }

// Best label path under the chain score
//   T(start,y0)+e(0,y0) + sum_t [T(y_{t-1},y_t)+e(t,y_t)] + T(y_{n-1},stop).
// Scores accumulate strictly left to right (prev + T, then + e), and ties
// keep the lowest label id at every step, so the result is bit-reproducible
// against any oracle that adds in the same order.
template <typename Scalar>
std::vector<int> viterbi(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& emissions,
                         const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& trans) {
  const int n = static_cast<int>(emissions.rows());
  const int labels = static_cast<int>(emissions.cols());
  const int kStart = start_state(labels), kStop = stop_state(labels);
  if (n == 0) return {};
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> score(n, labels);
  Eigen::MatrixXi from(n, labels);
  for (int j = 0; j < labels; ++j) {
    Scalar s = trans(kStart, j);
    s += emissions(0, j);
    score(0, j) = s;
    from(0, j) = -1;
  }
  for (int t = 1; t < n; ++t) {
    for (int j = 0; j < labels; ++j) {
      Scalar best = std::numeric_limits<Scalar>::lowest();
      int arg = 0;
      for (int i = 0; i < labels; ++i) {
        Scalar s = score(t - 1, i) + trans(i, j);
        if (s > best) {
          best = s;
          arg = i;
        }
      }
      score(t, j) = best + emissions(t, j);
      from(t, j) = arg;
    }
  }
  Scalar best = std::numeric_limits<Scalar>::lowest();
  int arg = 0;
  for (int j = 0; j < labels; ++j) {
    Scalar s = score(n - 1, j) + trans(j, kStop);
    if (s > best) {
      best = s;
      arg = j;
    }
  }
  std::vector<int> path(static_cast<size_t>(n));
  for (int t = n - 1; t >= 0; --t) {
    path[static_cast<size_t>(t)] = arg;
    arg = from(t, arg);
  }
  return path;
}

// log of the partition sum over all label paths, same chain score as viterbi.
double crf_log_partition(const Eigen::MatrixXd& emissions, const Eigen::MatrixXd& trans);

}  // namespace softlex::net
