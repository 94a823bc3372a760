#include "kgat/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "kgat/errors.hpp"

namespace kgat {

bool GradcheckReport::passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.passed; });
}

const GradcheckEntry* GradcheckReport::worst() const {
  const GradcheckEntry* w = nullptr;
  for (const auto& e : entries) {
    if (!w || e.max_rel_error > w->max_rel_error) w = &e;
  }
  return w;
}

// The floor sits above central-difference roundoff (about 1e-16 / eps = 1e-11
// at eps = 1e-5), so exactly-zero gradients do not read as relative errors.
double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-7});
  return std::abs(analytic - numeric) / denom;
}

GradcheckReport gradcheck(ParameterSet& params, const std::function<double()>& loss,
                          const std::function<void()>& gradient,
                          const GradcheckOptions& options) {
  const double base = loss();
  if (base != loss()) throw NumericError("gradcheck: non-deterministic forward");
  if (!std::isfinite(base)) throw NumericError("gradcheck: non-finite loss");

  gradient();
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params) analytic.push_back(p.grad);

  GradcheckReport report;
  report.tolerance = options.tolerance;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = params[i];
    GradcheckEntry entry;
    entry.name = p.name;
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double saved = p.value[k];
      p.value[k] = saved + options.epsilon;
      const double up = loss();
      p.value[k] = saved - options.epsilon;
      const double down = loss();
      p.value[k] = saved;
      const double numeric = (up - down) / (2.0 * options.epsilon);
      const double a = analytic[i][k];
      const double err = relative_error(a, numeric);
      ++entry.checked;
      if (err > entry.max_rel_error || entry.checked == 1) {
        entry.max_rel_error = err;
        entry.worst_index = k;
        entry.analytic = a;
        entry.numeric = numeric;
      }
    }
    entry.passed = entry.max_rel_error < options.tolerance;
    report.entries.push_back(entry);
  }
  return report;
}

}  // namespace kgat
