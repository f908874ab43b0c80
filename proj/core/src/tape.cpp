#include "softlex/tape.hpp"

#include <cmath>

#include "softlex/errors.hpp"

namespace softlex::net {

namespace {

double logsumexp(const Eigen::VectorXd& v) {
  double m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

}  // namespace

Tape::Node& Tape::at(Var v) {
  if (v.id < 0 || static_cast<size_t>(v.id) >= nodes_.size())
    throw IntegrityError("tape: var does not belong to this tape");
  return nodes_[static_cast<size_t>(v.id)];
}

const Tape::Node& Tape::at(Var v) const {
  if (v.id < 0 || static_cast<size_t>(v.id) >= nodes_.size())
    throw IntegrityError("tape: var does not belong to this tape");
  return nodes_[static_cast<size_t>(v.id)];
}

Var Tape::push(Eigen::MatrixXd value, std::function<void()> back) {
  Node n;
  n.grad = Eigen::MatrixXd::Zero(value.rows(), value.cols());
  n.value = std::move(value);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size() - 1)};
}

const Eigen::MatrixXd& Tape::value(Var v) const { return at(v).value; }
const Eigen::MatrixXd& Tape::grad(Var v) const { return at(v).grad; }

Var Tape::constant(Eigen::MatrixXd v) { return push(std::move(v), {}); }

Var Tape::embed_row(Parameter& table, int row) {
  if (row < 0 || row >= table.value.rows())
    throw IntegrityError("tape: embedding row out of range for " + table.name);
  Var out{static_cast<int>(nodes_.size())};
  push(table.value.row(row).transpose(),
       [this, out, &table, row] { table.grad.row(row) += at(out).grad.transpose(); });
  return out;
}

Var Tape::weighted_rows(Parameter& table, std::vector<std::pair<int, double>> terms) {
  if (terms.empty()) throw IntegrityError("tape: weighted_rows with no terms");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(table.value.cols());
  for (auto& [row, coeff] : terms) {
    if (row < 0 || row >= table.value.rows())
      throw IntegrityError("tape: embedding row out of range for " + table.name);
    v += coeff * table.value.row(row).transpose();
  }
  Var out{static_cast<int>(nodes_.size())};
  push(std::move(v), [this, out, &table, terms = std::move(terms)] {
    const Eigen::MatrixXd& g = at(out).grad;
    for (const auto& [row, coeff] : terms) table.grad.row(row) += coeff * g.transpose();
  });
  return out;
}

Var Tape::affine(Parameter& W, Parameter& b, Var x) {
  const Eigen::MatrixXd& xv = at(x).value;
  if (xv.cols() != 1 || W.value.cols() != xv.rows() || b.value.rows() != W.value.rows() ||
      b.value.cols() != 1)
    throw IntegrityError("tape: affine shape mismatch for " + W.name);
  Var out{static_cast<int>(nodes_.size())};
  push(W.value * xv + b.value, [this, out, &W, &b, x] {
    const Eigen::MatrixXd& g = at(out).grad;
    W.grad += g * at(x).value.transpose();
    b.grad += g;
    at(x).grad += W.value.transpose() * g;
  });
  return out;
}

Var Tape::concat(const std::vector<Var>& xs) {
  if (xs.empty()) throw IntegrityError("tape: concat of nothing");
  Eigen::Index total = 0;
  for (Var x : xs) {
    if (at(x).value.cols() != 1) throw IntegrityError("tape: concat expects columns");
    total += at(x).value.rows();
  }
  Eigen::VectorXd v(total);
  Eigen::Index off = 0;
  for (Var x : xs) {
    v.segment(off, at(x).value.rows()) = at(x).value;
    off += at(x).value.rows();
  }
  Var out{static_cast<int>(nodes_.size())};
  push(std::move(v), [this, out, xs] {
    const Eigen::MatrixXd& g = at(out).grad;
    Eigen::Index o = 0;
    for (Var x : xs) {
      at(x).grad += g.block(o, 0, at(x).value.rows(), 1);
      o += at(x).value.rows();
    }
  });
  return out;
}

Var Tape::slice(Var x, int offset, int len) {
  const Eigen::MatrixXd& xv = at(x).value;
  if (xv.cols() != 1 || offset < 0 || len <= 0 || offset + len > xv.rows())
    throw IntegrityError("tape: slice out of range");
  Var out{static_cast<int>(nodes_.size())};
  push(xv.block(offset, 0, len, 1),
       [this, out, x, offset, len] { at(x).grad.block(offset, 0, len, 1) += at(out).grad; });
  return out;
}

Var Tape::sigmoid(Var x) {
  Eigen::MatrixXd v = (1.0 / (1.0 + (-at(x).value.array()).exp())).matrix();
  Var out{static_cast<int>(nodes_.size())};
  push(std::move(v), [this, out, x] {
    const Eigen::MatrixXd& y = at(out).value;
    at(x).grad.array() += at(out).grad.array() * y.array() * (1.0 - y.array());
  });
  return out;
}

Var Tape::tanh(Var x) {
  Eigen::MatrixXd v = at(x).value.array().tanh().matrix();
  Var out{static_cast<int>(nodes_.size())};
  push(std::move(v), [this, out, x] {
    const Eigen::MatrixXd& y = at(out).value;
    at(x).grad.array() += at(out).grad.array() * (1.0 - y.array().square());
  });
  return out;
}

Var Tape::cmul(Var a, Var b) {
  if (at(a).value.rows() != at(b).value.rows() || at(a).value.cols() != at(b).value.cols())
    throw IntegrityError("tape: cmul shape mismatch");
  Var out{static_cast<int>(nodes_.size())};
  push((at(a).value.array() * at(b).value.array()).matrix(), [this, out, a, b] {
    const Eigen::MatrixXd& g = at(out).grad;
    at(a).grad.array() += g.array() * at(b).value.array();
    at(b).grad.array() += g.array() * at(a).value.array();
  });
  return out;
}

Var Tape::add(Var a, Var b) {
  if (at(a).value.rows() != at(b).value.rows() || at(a).value.cols() != at(b).value.cols())
    throw IntegrityError("tape: add shape mismatch");
  Var out{static_cast<int>(nodes_.size())};
  push(at(a).value + at(b).value, [this, out, a, b] {
    at(a).grad += at(out).grad;
    at(b).grad += at(out).grad;
  });
  return out;
}

Var Tape::dropout(Var x, const Eigen::VectorXd& mask) {
  const Eigen::MatrixXd& xv = at(x).value;
  if (xv.cols() != 1 || mask.size() != xv.rows())
    throw IntegrityError("tape: dropout mask size mismatch");
  Var out{static_cast<int>(nodes_.size())};
  push((xv.array().colwise() * mask.array()).matrix(), [this, out, x, mask] {
    at(x).grad.array() += at(out).grad.array().colwise() * mask.array();
  });
  return out;
}

Var Tape::crf_nll(const std::vector<Var>& emissions, Parameter& trans,
                  const std::vector<int>& gold) {
  const int n = static_cast<int>(emissions.size());
  if (n == 0) throw IntegrityError("tape: crf_nll on empty sequence");
  const int labels = static_cast<int>(at(emissions[0]).value.rows());
  if (trans.value.rows() != labels + 2 || trans.value.cols() != labels + 2)
    throw IntegrityError("tape: transition matrix must be (|Y|+2)^2");
  if (static_cast<int>(gold.size()) != n)
    throw IntegrityError("tape: gold length mismatch");
  const int kStart = labels, kStop = labels + 1;
  const auto& T = trans.value;

  for (int t = 0; t < n; ++t) {
    if (at(emissions[t]).value.rows() != labels || at(emissions[t]).value.cols() != 1)
      throw IntegrityError("tape: emission shape mismatch");
    if (!at(emissions[t]).value.allFinite()) throw IntegrityError("tape: non-finite emission");
    if (gold[t] < 0 || gold[t] >= labels) throw IntegrityError("tape: gold label out of range");
  }

  // Log-space forward pass over real labels; the start row and stop column of
  // T are read explicitly so the -inf walls guarding the reverse directions
  // never enter the arithmetic.
  Eigen::MatrixXd alpha(n, labels);
  alpha.row(0) =
      (T.row(kStart).head(labels).transpose() + at(emissions[0]).value.col(0)).transpose();
  Eigen::VectorXd work(labels);
  for (int t = 1; t < n; ++t) {
    for (int j = 0; j < labels; ++j) {
      work = alpha.row(t - 1).transpose() + T.col(j).head(labels);
      alpha(t, j) = logsumexp(work) + at(emissions[t]).value(j, 0);
    }
  }
  Eigen::VectorXd final_scores = alpha.row(n - 1).transpose() + T.col(kStop).head(labels);
  const double log_z = logsumexp(final_scores);

  double gold_score = T(kStart, gold[0]);
  for (int t = 0; t < n; ++t) gold_score += at(emissions[t]).value(gold[t], 0);
  for (int t = 1; t < n; ++t) gold_score += T(gold[t - 1], gold[t]);
  gold_score += T(gold[n - 1], kStop);

  Eigen::MatrixXd nll(1, 1);
  nll(0, 0) = log_z - gold_score;

  std::vector<int> emis_ids(emissions.size());
  for (size_t i = 0; i < emissions.size(); ++i) emis_ids[i] = emissions[i].id;

  Var out{static_cast<int>(nodes_.size())};
  push(std::move(nll), [this, out, &trans, gold, emis_ids, alpha = std::move(alpha), log_z,
                        labels, kStart, kStop, n] {
    const double u = at(out).grad(0, 0);
    if (u == 0.0) return;
    const auto& Tv = trans.value;

    Eigen::MatrixXd beta(n, labels);
    beta.row(n - 1) = Tv.col(kStop).head(labels).transpose();
    Eigen::VectorXd work(labels);
    for (int t = n - 2; t >= 0; --t) {
      const Eigen::MatrixXd& e_next = at(Var{emis_ids[static_cast<size_t>(t) + 1]}).value;
      for (int i = 0; i < labels; ++i) {
        work = Tv.row(i).head(labels).transpose() + e_next.col(0) + beta.row(t + 1).transpose();
        beta(t, i) = logsumexp(work);
      }
    }

    for (int t = 0; t < n; ++t) {
      Eigen::MatrixXd& eg = at(Var{emis_ids[static_cast<size_t>(t)]}).grad;
      for (int j = 0; j < labels; ++j)
        eg(j, 0) += u * std::exp(alpha(t, j) + beta(t, j) - log_z);
      eg(gold[static_cast<size_t>(t)], 0) -= u;
    }

    for (int j = 0; j < labels; ++j)
      trans.grad(kStart, j) += u * std::exp(alpha(0, j) + beta(0, j) - log_z);
    trans.grad(kStart, gold[0]) -= u;
    for (int t = 0; t + 1 < n; ++t) {
      const Eigen::MatrixXd& e_next = at(Var{emis_ids[static_cast<size_t>(t) + 1]}).value;
      for (int i = 0; i < labels; ++i)
        for (int j = 0; j < labels; ++j)
          trans.grad(i, j) += u * std::exp(alpha(t, i) + Tv(i, j) + e_next(j, 0) +
                                           beta(t + 1, j) - log_z);
      trans.grad(gold[static_cast<size_t>(t)], gold[static_cast<size_t>(t) + 1]) -= u;
    }
    for (int j = 0; j < labels; ++j)
      trans.grad(j, kStop) += u * std::exp(alpha(n - 1, j) + beta(n - 1, j) - log_z);
    trans.grad(gold[static_cast<size_t>(n) - 1], kStop) -= u;
  });
  return out;
}

Var Tape::average(const std::vector<Var>& scalars) {
  if (scalars.empty()) throw IntegrityError("tape: average of nothing");
  double sum = 0.0;
  for (Var s : scalars) {
    if (at(s).value.rows() != 1 || at(s).value.cols() != 1)
      throw IntegrityError("tape: average expects scalars");
    sum += at(s).value(0, 0);
  }
  Eigen::MatrixXd v(1, 1);
  v(0, 0) = sum / static_cast<double>(scalars.size());
  Var out{static_cast<int>(nodes_.size())};
  push(std::move(v), [this, out, scalars] {
    const double u = at(out).grad(0, 0) / static_cast<double>(scalars.size());
    for (Var s : scalars) at(s).grad(0, 0) += u;
  });
  return out;
}

void Tape::backward(Var loss) {
  if (backward_done_)
    throw IntegrityError("tape: backward already ran; build a new tape for a new pass");
  Node& l = at(loss);
  if (l.value.rows() != 1 || l.value.cols() != 1)
    throw IntegrityError("tape: backward target must be scalar");
  backward_done_ = true;
  l.grad(0, 0) = 1.0;
  for (size_t i = nodes_.size(); i-- > 0;)
    if (nodes_[i].back) nodes_[i].back();
}

}  // namespace softlex::net
