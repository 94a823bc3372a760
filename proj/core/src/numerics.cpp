#include "kgat/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kgat/errors.hpp"

namespace kgat {

std::vector<double> softmax(std::span<const double> v, std::span<const std::uint8_t> mask) {
  if (mask.size() != v.size()) throw UsageError("softmax: mask length mismatch");
  double top = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!mask[i]) continue;
    any = true;
    top = std::max(top, v[i]);
  }
  if (!any) throw NumericError("empty support");

  std::vector<double> out(v.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!mask[i]) continue;
    out[i] = std::exp(v[i] - top);
    total += out[i];
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (mask[i]) out[i] /= total;
  }
  return out;
}

std::vector<double> softmax(std::span<const double> v) {
  const Mask all(v.size(), 1);
  return softmax(v, all);
}

Tensor cosine_matrix(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols()) {
    throw UsageError("cosine_matrix: dimension mismatch " + a.shape_string() + " vs " +
                     b.shape_string());
  }
  if (a.cols() == 0) throw UsageError("cosine_matrix: zero feature dimension");
  const std::size_t d = a.cols();
  std::vector<double> na(a.rows()), nb(b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (double x : a.row(i)) s += x * x;
    na[i] = std::sqrt(s);
  }
  for (std::size_t j = 0; j < b.rows(); ++j) {
    double s = 0.0;
    for (double x : b.row(j)) s += x * x;
    nb[j] = std::sqrt(s);
  }
  Tensor out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.data() + i * d;
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* bj = b.data() + j * d;
      double dot = 0.0;
      for (std::size_t k = 0; k < d; ++k) dot += ai[k] * bj[k];
      const double c = dot / std::max(na[i] * nb[j], kCosineFloor);
      out.at(i, j) = std::clamp(c, -1.0, 1.0);
    }
  }
  return out;
}

double entropy(std::span<const double> p) {
  double total = 0.0;
  double h = 0.0;
  for (double x : p) {
    if (x < 0.0) throw NumericError("entropy: negative probability");
    total += x;
    if (x > 0.0) h -= x * std::log(x);
  }
  if (std::abs(total - 1.0) > 1e-6) throw NumericError("entropy: distribution not normalized");
  return h;
}

double log_sum_exp(std::span<const double> x) {
  if (x.empty()) return -std::numeric_limits<double>::infinity();
  const double top = *std::max_element(x.begin(), x.end());
  if (!std::isfinite(top)) return top;
  double s = 0.0;
  for (double v : x) s += std::exp(v - top);
  return top + std::log(s);
}

}  // namespace kgat
