#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace softlex::net {

// A learnable tensor. Parameters live outside the tape; ops hold references
// and scatter gradients into `grad` directly, so gradients accumulate across
// tapes until zero_grad().
struct Parameter {
  std::string name;
  Eigen::MatrixXd value;
  Eigen::MatrixXd grad;

  Parameter() = default;
  Parameter(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)),
        value(Eigen::MatrixXd::Zero(rows, cols)),
        grad(Eigen::MatrixXd::Zero(rows, cols)) {}

  void zero_grad() { grad.setZero(); }
};

struct Var {
  int id = -1;
};

// Reverse-mode tape over Eigen matrices. Column vectors are d x 1. One
// forward pass builds the node list; backward() runs the recorded closures in
// reverse creation order, exactly once per tape.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf with no gradient flow out of it.
  Var constant(Eigen::MatrixXd v);

  // table row as a column vector.
  Var embed_row(Parameter& table, int row);

  // sum of coeff * table.row(id) as a column vector.
  Var weighted_rows(Parameter& table, std::vector<std::pair<int, double>> terms);

  // W.value * x + b.value, b stored as a column.
  Var affine(Parameter& W, Parameter& b, Var x);

  Var concat(const std::vector<Var>& xs);
  Var slice(Var x, int offset, int len);
  Var sigmoid(Var x);
  Var tanh(Var x);
  Var cmul(Var a, Var b);
  Var add(Var a, Var b);

  // x scaled elementwise by a fixed mask (0 or 1/(1-p) entries). The mask is
  // the caller's; reusing one mask across positions is the caller's bug.
  Var dropout(Var x, const Eigen::VectorXd& mask);

  // Negative log-likelihood of `gold` under a linear-chain CRF. `emissions`
  // holds one |Y| x 1 column per position; trans is (|Y|+2)^2 with the start
  // state at row |Y| and the stop state at column |Y|+1. Returns a 1x1 node.
  Var crf_nll(const std::vector<Var>& emissions, Parameter& trans, const std::vector<int>& gold);

  // Mean of 1x1 nodes.
  Var average(const std::vector<Var>& scalars);

  const Eigen::MatrixXd& value(Var v) const;
  const Eigen::MatrixXd& grad(Var v) const;

  // Seeds d(loss)/d(loss) = 1 and runs all closures. A second call on the
  // same tape throws; build a new tape for a new forward pass.
  void backward(Var loss);

  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Eigen::MatrixXd value;
    Eigen::MatrixXd grad;
    std::function<void()> back;
  };

  Var push(Eigen::MatrixXd value, std::function<void()> back);
  Node& at(Var v);
  const Node& at(Var v) const;

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace softlex::net
