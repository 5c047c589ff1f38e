#ifndef TGL_AUTOGRAD_HPP
#define TGL_AUTOGRAD_HPP

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "tgl/tensor.hpp"

namespace tgl {

// Handle to a node of a dynamically built reverse-mode graph. Copies share
// the node. A Var built from a requires-grad leaf, or from any op whose
// inputs require grad, records how to push gradients back to its parents.
class Var {
 public:
  Var() = default;

  static Var constant(Tensor value);
  static Var leaf(Tensor value, bool requires_grad = true);

  const Tensor& value() const { return node_->value; }
  Tensor& mutable_value() { return node_->value; }
  const Tensor& grad() const { return node_->grad; }
  Tensor& mutable_grad() { return node_->grad; }
  const Shape& shape() const { return node_->value.shape(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  bool is_leaf() const { return node_->parents.empty(); }
  const std::string& op() const { return node_->op; }
  bool valid() const { return node_ != nullptr; }

  void zero_grad();

  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool grad_ready = false;
    std::string op;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward;

    // Adds `g` into this node's gradient, allocating it on first use.
    void accumulate(const Tensor& g);
    Tensor& grad_buffer();
  };

  static Var from_node(std::shared_ptr<Node> node) {
    Var v;
    v.node_ = std::move(node);
    return v;
  }
  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

Var matmul(const Var& a, const Var& b);
Var relu(const Var& x);
Var add(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& x, double factor);
Var square(const Var& x);
Var sum(const Var& x);
// x: [rows x n], bias: [n]; adds bias to every row.
Var add_row_bias(const Var& x, const Var& bias);
Var reshape(const Var& x, Shape shape);
// Horizontal concatenation of matrices with equal row counts.
Var concat_cols(const std::vector<Var>& parts);
// x holds `blocks` stacked [n x c] matrices; each block is left-multiplied by
// the constant operator op (n x n).
Var propagate(const Tensor& op, const Var& x);
Var mse_loss(const Var& pred, const Var& target);
Var mse_loss(const Var& pred, const Tensor& target);

// Reverse sweep from a scalar. Leaf gradients accumulate across calls;
// intermediate gradients are recomputed each time.
void backward(const Var& loss);

}  // namespace tgl

#endif  // TGL_AUTOGRAD_HPP
