#ifndef KGAT_KERNELS_HPP_
#define KGAT_KERNELS_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "kgat/tensor.hpp"

namespace kgat {

struct GaussianKernel {
  double mu;
  double sigma;
};

inline constexpr double kExactMatchMu = 1.0;
inline constexpr double kExactMatchSigma = 1e-3;
inline constexpr double kSoftMatchSigma = 0.1;
inline constexpr std::size_t kDefaultKernelCount = 21;

// Bank of Gaussian kernels over cosine similarities. Holds exactly one
// exact-match kernel (mu = 1, sigma = 1e-3) first, then soft kernels with
// strictly decreasing mu.
class KernelBank {
 public:
  KernelBank() = default;
  // Validates the invariants; throws UsageError when violated.
  explicit KernelBank(std::vector<GaussianKernel> kernels);

  std::size_t size() const { return kernels_.size(); }
  const GaussianKernel& operator[](std::size_t k) const { return kernels_[k]; }
  std::span<const GaussianKernel> kernels() const { return kernels_; }

  bool operator==(const KernelBank& other) const;
  std::string describe() const;

 private:
  std::vector<GaussianKernel> kernels_;
};

// Exact-match kernel plus K-1 kernels with mu evenly spaced over
// [-0.95, 0.95] (descending) and sigma = 0.1. K must be odd and >= 3.
KernelBank default_bank(std::size_t count = kDefaultKernelCount);

// K_k = log(max(sum_j exp(-(row_j - mu_k)^2 / (2 sigma_k^2)), 1e-10)) over
// unmasked columns. Throws NumericError if no column is unmasked.
std::vector<double> kernel_pool_row(std::span<const double> row,
                                    std::span<const std::uint8_t> col_mask,
                                    const KernelBank& bank);

// Applies kernel_pool_row to every row of m. Rows with row_mask == 0 give
// all-zero features. An empty row_mask means every row is real.
Tensor kernel_pool(const Tensor& m, std::span<const std::uint8_t> row_mask,
                   std::span<const std::uint8_t> col_mask, const KernelBank& bank);

}  // namespace kgat

#endif  // KGAT_KERNELS_HPP_
