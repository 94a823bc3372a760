#ifndef KGAT_NUMERICS_HPP_
#define KGAT_NUMERICS_HPP_

#include <span>
#include <vector>

#include "kgat/tensor.hpp"

namespace kgat {

inline constexpr double kCosineFloor = 1e-8;
inline constexpr double kLogClamp = 1e-10;
inline constexpr double kProbClamp = 1e-12;

// Masked, max-shifted softmax. Masked entries come out exactly zero.
// Throws NumericError("empty support") if no entry is unmasked.
std::vector<double> softmax(std::span<const double> v, std::span<const std::uint8_t> mask);
std::vector<double> softmax(std::span<const double> v);

// Row-wise cosine similarity between two token matrices that share the
// feature dimension. Denominator floored at kCosineFloor, result clamped to
// [-1, 1].
Tensor cosine_matrix(const Tensor& a, const Tensor& b);

// Shannon entropy in nats, 0 ln 0 = 0. Throws NumericError if the input is
// not normalized to within 1e-6.
double entropy(std::span<const double> p);

// log(sum(exp(x))) with max shift.
double log_sum_exp(std::span<const double> x);

}  // namespace kgat

#endif  // KGAT_NUMERICS_HPP_
