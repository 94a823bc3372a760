#ifndef KGAT_OPTIM_HPP_
#define KGAT_OPTIM_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "kgat/tensor.hpp"

namespace kgat {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First and second moment estimates, one pair per parameter, in parameter
// order.
struct AdamState {
  std::uint64_t step = 0;
  std::vector<Tensor> first;
  std::vector<Tensor> second;

  static AdamState zeros_like(const ParameterSet& params);
  bool matches(const ParameterSet& params) const;
};

// One bias-corrected Adam update from the gradients currently in params.
// Throws NumericError naming the parameter if any gradient is non-finite;
// nothing is updated in that case.
void adam_step(ParameterSet& params, AdamState& state, double lr,
               const AdamOptions& options = {});

// Linear warmup from 0 to peak over the first ceil(warmup * total) steps,
// then linear decay to 0 at total.
double lr_schedule(std::size_t step, std::size_t total_steps, double peak_lr, double warmup);

}  // namespace kgat

#endif  // KGAT_OPTIM_HPP_
