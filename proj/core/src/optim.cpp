#include "kgat/optim.hpp"

#include <cmath>

#include "kgat/errors.hpp"

namespace kgat {

AdamState AdamState::zeros_like(const ParameterSet& params) {
  AdamState s;
  for (const auto& p : params) {
    s.first.emplace_back(p.value.shape(), 0.0);
    s.second.emplace_back(p.value.shape(), 0.0);
  }
  return s;
}

bool AdamState::matches(const ParameterSet& params) const {
  if (first.size() != params.size() || second.size() != params.size()) return false;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!first[i].same_shape(params[i].value) || !second[i].same_shape(params[i].value)) {
      return false;
    }
  }
  return true;
}

void adam_step(ParameterSet& params, AdamState& state, double lr, const AdamOptions& options) {
  if (!state.matches(params)) throw UsageError("adam_step: optimizer state does not match");
  for (const auto& p : params) {
    if (!p.grad.all_finite()) throw NumericError("non-finite gradient in parameter " + p.name);
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(options.beta1, t);
  const double c2 = 1.0 - std::pow(options.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto value = params[i].value.values();
    auto grad = params[i].grad.values();
    auto m = state.first[i].values();
    auto v = state.second[i].values();
    for (std::size_t k = 0; k < value.size(); ++k) {
      const double g = grad[k];
      m[k] = options.beta1 * m[k] + (1.0 - options.beta1) * g;
      v[k] = options.beta2 * v[k] + (1.0 - options.beta2) * g * g;
      const double m_hat = m[k] / c1;
      const double v_hat = v[k] / c2;
      value[k] -= lr * m_hat / (std::sqrt(v_hat) + options.epsilon);
    }
  }
}

double lr_schedule(std::size_t step, std::size_t total_steps, double peak_lr, double warmup) {
  if (total_steps == 0) return 0.0;
  const auto warm = static_cast<std::size_t>(std::ceil(warmup * static_cast<double>(total_steps)));
  if (step >= total_steps) return 0.0;
  if (warm > 0 && step < warm) {
    return peak_lr * static_cast<double>(step) / static_cast<double>(warm);
  }
  const double remaining = static_cast<double>(total_steps - step);
  const double span = static_cast<double>(total_steps - warm);
  return span > 0.0 ? peak_lr * remaining / span : 0.0;
}

}  // namespace kgat
