#include "tgl/adam.hpp"

#include <cmath>

namespace tgl {

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ValidationError("adam learning_rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ValidationError("adam beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ValidationError("adam beta2 must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ValidationError("adam epsilon must be positive");
}

Parameter::Parameter(std::string name_, Tensor value)
    : name(std::move(name_)),
      var(Var::leaf(std::move(value), true)),
      adam_m(Tensor::zeros(var.shape())),
      adam_v(Tensor::zeros(var.shape())) {}

void zero_grad(std::vector<Parameter*> params) {
  for (auto* p : params) p->zero_grad();
}

void adam_step(const std::vector<Parameter*>& params, const AdamConfig& cfg) {
  cfg.validate();
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i]->grad().all_finite()) {
      throw NumericError("non-finite gradient in parameter " + std::to_string(i) + " (" + params[i]->name + ")");
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    ++p.step_count;
    const double t = static_cast<double>(p.step_count);
    const double correction1 = 1.0 - std::pow(cfg.beta1, t);
    const double correction2 = 1.0 - std::pow(cfg.beta2, t);
    Tensor& w = p.value();
    Tensor& g = p.grad();
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double gk = g[k];
      p.adam_m[k] = cfg.beta1 * p.adam_m[k] + (1.0 - cfg.beta1) * gk;
      p.adam_v[k] = cfg.beta2 * p.adam_v[k] + (1.0 - cfg.beta2) * gk * gk;
      const double m_hat = p.adam_m[k] / correction1;
      const double v_hat = p.adam_v[k] / correction2;
      w[k] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
    if (!w.all_finite()) throw NumericError("parameter " + std::to_string(i) + " (" + p.name + ") became non-finite");
    p.zero_grad();
  }
}

}  // namespace tgl
