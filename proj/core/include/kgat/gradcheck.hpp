#ifndef KGAT_GRADCHECK_HPP_
#define KGAT_GRADCHECK_HPP_

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "kgat/tensor.hpp"

namespace kgat {

struct GradcheckOptions {
  double epsilon = 1e-5;
  double tolerance = 1e-3;
};

struct GradcheckEntry {
  std::string name;
  std::size_t checked = 0;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  bool passed = true;
};

struct GradcheckReport {
  std::vector<GradcheckEntry> entries;
  double tolerance = 0.0;

  bool passed() const;
  const GradcheckEntry* worst() const;
};

// |a - n| / max(|a|, |n|, 1e-7)
double relative_error(double analytic, double numeric);

// Compares the analytic gradient against central differences
// (L(theta + eps) - L(theta - eps)) / (2 eps) for every scalar of every
// parameter.
//
// `loss` evaluates the objective at the current parameter values.
// `gradient` zeroes and fills the parameter gradients; the checker calls it
// once up front. Throws NumericError if two evaluations of `loss` at the
// same point disagree.
GradcheckReport gradcheck(ParameterSet& params, const std::function<double()>& loss,
                          const std::function<void()>& gradient,
                          const GradcheckOptions& options = {});

}  // namespace kgat

#endif  // KGAT_GRADCHECK_HPP_
