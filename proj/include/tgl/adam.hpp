#ifndef TGL_ADAM_HPP
#define TGL_ADAM_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "tgl/autograd.hpp"

namespace tgl {

struct AdamConfig {
  double learning_rate = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

// A trainable tensor plus its optimizer state. The gradient lives on the
// leaf node of `var`, so it is shared by every graph built from it.
struct Parameter {
  std::string name;
  Var var;
  Tensor adam_m;
  Tensor adam_v;
  std::uint64_t step_count = 0;

  Parameter() = default;
  Parameter(std::string name, Tensor value);

  const Tensor& value() const { return var.value(); }
  Tensor& value() { return var.mutable_value(); }
  const Tensor& grad() const { return var.grad(); }
  Tensor& grad() { return var.mutable_grad(); }
  const Shape& shape() const { return var.shape(); }
  void zero_grad() { var.zero_grad(); }
};

void zero_grad(std::vector<Parameter*> params);

// Bias-corrected Adam update followed by zeroing the gradients. If any
// gradient is non-finite, nothing is modified and NumericError names the
// first offending parameter index.
void adam_step(const std::vector<Parameter*>& params, const AdamConfig& cfg);

}  // namespace tgl

#endif  // TGL_ADAM_HPP
