#include "tgl/autograd.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace tgl {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

ConstMap as_matrix(const Tensor& t) { return ConstMap(t.data().data(), t.rows(), t.cols()); }
MutMap as_matrix(Tensor& t) { return MutMap(t.data().data(), t.rows(), t.cols()); }

Var make_result(Tensor value, std::string op, std::vector<Var> inputs, std::function<void(Var::Node&)> bw) {
  auto node = std::make_shared<Var::Node>();
  node->value = std::move(value);
  node->op = std::move(op);
  for (const auto& in : inputs) node->requires_grad = node->requires_grad || in.requires_grad();
  if (node->requires_grad) {
    for (const auto& in : inputs) node->parents.push_back(in.node());
    node->backward = std::move(bw);
  }
  return Var::from_node(std::move(node));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(what) + " shape mismatch: " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
}

}  // namespace

void Var::Node::accumulate(const Tensor& g) {
  Tensor& buf = grad_buffer();
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] += g[i];
}

Tensor& Var::Node::grad_buffer() {
  if (!grad_ready || grad.shape() != value.shape()) {
    grad = Tensor::zeros(value.shape());
    grad_ready = true;
  }
  return grad;
}

Var Var::constant(Tensor value) { return leaf(std::move(value), false); }

Var Var::leaf(Tensor value, bool requires_grad) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = requires_grad;
  node->op = "leaf";
  if (requires_grad) node->grad_buffer();
  return from_node(std::move(node));
}

void Var::zero_grad() {
  if (node_->grad_ready) std::fill(node_->grad.data().begin(), node_->grad.data().end(), 0.0);
}

Var matmul(const Var& a, const Var& b) {
  Tensor out = tgl::matmul(a.value(), b.value());
  return make_result(std::move(out), "matmul", {a, b}, [](Var::Node& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    auto g = as_matrix(self.grad);
    if (pa.requires_grad) as_matrix(pa.grad_buffer()).noalias() += g * as_matrix(pb.value).transpose();
    if (pb.requires_grad) as_matrix(pb.grad_buffer()).noalias() += as_matrix(pa.value).transpose() * g;
  });
}

Var relu(const Var& x) {
  Tensor out = x.value();
  for (auto& v : out.data()) v = (v > 0.0 || std::isnan(v)) ? v : 0.0;
  return make_result(std::move(out), "relu", {x}, [](Var::Node& self) {
    auto& px = *self.parents[0];
    Tensor& gx = px.grad_buffer();
    for (std::size_t i = 0; i < gx.size(); ++i) {
      if (px.value[i] > 0.0) gx[i] += self.grad[i];
    }
  });
}

Var add(const Var& a, const Var& b) {
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  return make_result(std::move(out), "add", {a, b}, [](Var::Node& self) {
    for (auto& p : self.parents) {
      if (p->requires_grad) p->accumulate(self.grad);
    }
  });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return make_result(std::move(out), "mul", {a, b}, [](Var::Node& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad) {
      Tensor& ga = pa.grad_buffer();
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += self.grad[i] * pb.value[i];
    }
    if (pb.requires_grad) {
      Tensor& gb = pb.grad_buffer();
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += self.grad[i] * pa.value[i];
    }
  });
}

Var scale(const Var& x, double factor) {
  Tensor out = x.value();
  for (auto& v : out.data()) v *= factor;
  return make_result(std::move(out), "scale", {x}, [factor](Var::Node& self) {
    Tensor& gx = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += factor * self.grad[i];
  });
}

Var square(const Var& x) { return mul(x, x); }

Var sum(const Var& x) {
  double total = 0.0;
  for (double v : x.value().data()) total += v;
  return make_result(Tensor::scalar(total), "sum", {x}, [](Var::Node& self) {
    Tensor& gx = self.parents[0]->grad_buffer();
    const double g = self.grad[0];
    for (auto& v : gx.data()) v += g;
  });
}

Var add_row_bias(const Var& x, const Var& bias) {
  const std::size_t r = x.value().rows(), c = x.value().cols();
  if (bias.value().size() != c) {
    throw DimensionError("bias of shape " + shape_string(bias.shape()) + " does not fit rows of " +
                         shape_string(x.shape()));
  }
  Tensor out = x.value();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out.at(i, j) += bias.value()[j];
  return make_result(std::move(out), "add_row_bias", {x, bias}, [r, c](Var::Node& self) {
    auto& px = *self.parents[0];
    auto& pb = *self.parents[1];
    if (px.requires_grad) px.accumulate(self.grad);
    if (pb.requires_grad) {
      Tensor& gb = pb.grad_buffer();
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) gb[j] += self.grad[i * c + j];
    }
  });
}

Var reshape(const Var& x, Shape shape) {
  Tensor out = x.value().reshaped(std::move(shape));
  return make_result(std::move(out), "reshape", {x}, [](Var::Node& self) {
    self.parents[0]->accumulate(self.grad);
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw DimensionError("concat_cols needs at least one input");
  const std::size_t r = parts.front().value().rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.value().rows() != r) {
      throw DimensionError("concat_cols row mismatch: " + shape_string(parts.front().shape()) + " vs " +
                           shape_string(p.shape()));
    }
    widths.push_back(p.value().cols());
    total += widths.back();
  }
  Tensor out({r, total});
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& v = parts[k].value();
    for (std::size_t i = 0; i < r; ++i)
      std::copy_n(v.data().begin() + i * widths[k], widths[k], out.data().begin() + i * total + offset);
    offset += widths[k];
  }
  return make_result(std::move(out), "concat_cols", parts, [r, total, widths](Var::Node& self) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < self.parents.size(); ++k) {
      auto& p = *self.parents[k];
      if (p.requires_grad) {
        Tensor& g = p.grad_buffer();
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < widths[k]; ++j) g[i * widths[k] + j] += self.grad[i * total + off + j];
      }
      off += widths[k];
    }
  });
}

namespace {

// Applies op (n x n) to each of the `blocks` stacked [n x c] slices of src by
// regrouping them side by side into one [n x blocks*c] product.
void apply_blockwise(const RowMatrix& op, const double* src, double* dst, std::size_t n, std::size_t c,
                     std::size_t blocks, bool accumulate) {
  RowMatrix wide(n, blocks * c);
  for (std::size_t b = 0; b < blocks; ++b) wide.middleCols(b * c, c) = ConstMap(src + b * n * c, n, c);
  RowMatrix result = op * wide;
  for (std::size_t b = 0; b < blocks; ++b) {
    MutMap out(dst + b * n * c, n, c);
    if (accumulate) {
      out += result.middleCols(b * c, c);
    } else {
      out = result.middleCols(b * c, c);
    }
  }
}

}  // namespace

Var propagate(const Tensor& op, const Var& x) {
  const std::size_t n = op.rows();
  if (op.cols() != n) throw DimensionError("propagation operator must be square, got " + shape_string(op.shape()));
  const std::size_t rows = x.value().rows(), c = x.value().cols();
  if (rows % n != 0) {
    throw DimensionError("propagate: operator " + shape_string(op.shape()) + " does not tile input " +
                         shape_string(x.shape()));
  }
  const std::size_t blocks = rows / n;
  Tensor out({rows, c});
  const RowMatrix s = as_matrix(op);
  apply_blockwise(s, x.value().data().data(), out.data().data(), n, c, blocks, false);
  // The transposed operator is captured by value so the graph does not dangle.
  RowMatrix st = s.transpose();
  return make_result(std::move(out), "propagate", {x}, [st = std::move(st), n, c, blocks](Var::Node& self) {
    Tensor& gx = self.parents[0]->grad_buffer();
    apply_blockwise(st, self.grad.data().data(), gx.data().data(), n, c, blocks, true);
  });
}

Var mse_loss(const Var& pred, const Var& target) {
  require_same_shape(pred.value(), target.value(), "mse_loss");
  const std::size_t count = pred.value().size();
  double total = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double d = pred.value()[i] - target.value()[i];
    total += d * d;
  }
  return make_result(Tensor::scalar(total / static_cast<double>(count)), "mse_loss", {pred, target},
                     [count](Var::Node& self) {
                       auto& pp = *self.parents[0];
                       auto& pt = *self.parents[1];
                       const double k = 2.0 * self.grad[0] / static_cast<double>(count);
                       if (pp.requires_grad) {
                         Tensor& g = pp.grad_buffer();
                         for (std::size_t i = 0; i < count; ++i) g[i] += k * (pp.value[i] - pt.value[i]);
                       }
                       if (pt.requires_grad) {
                         Tensor& g = pt.grad_buffer();
                         for (std::size_t i = 0; i < count; ++i) g[i] -= k * (pp.value[i] - pt.value[i]);
                       }
                     });
}

Var mse_loss(const Var& pred, const Tensor& target) { return mse_loss(pred, Var::constant(target)); }

void backward(const Var& loss) {
  if (!loss.valid() || !loss.value().is_scalar()) {
    throw DimensionError("backward needs a scalar loss, got " +
                         (loss.valid() ? shape_string(loss.shape()) : std::string("<null>")));
  }
  if (!loss.requires_grad()) throw ValidationError("backward: loss is not connected to any gradient-tracking input");

  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<Var::Node*> order;
  std::unordered_set<Var::Node*> seen;
  std::vector<std::pair<Var::Node*, std::size_t>> stack{{loss.node().get(), 0}};
  seen.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Var::Node* parent = node->parents[next++].get();
      if (parent->requires_grad && seen.insert(parent).second) stack.push_back({parent, 0});
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (auto* node : order) {
    if (!node->parents.empty()) {
      Tensor& g = node->grad_buffer();
      std::fill(g.data().begin(), g.data().end(), 0.0);
    }
  }
  loss.node()->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward) (*it)->backward(**it);
  }
}

}  // namespace tgl
