#include "kgat/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kgat/errors.hpp"
#include "kgat/numerics.hpp"

namespace kgat {

KernelBank::KernelBank(std::vector<GaussianKernel> kernels) : kernels_(std::move(kernels)) {
  if (kernels_.size() < 2) throw UsageError("kernel bank needs at least 2 kernels");
  std::size_t exact = 0;
  for (const auto& k : kernels_) {
    if (!(k.sigma > 0.0)) throw UsageError("kernel width must be positive");
    if (k.mu < -1.0 || k.mu > 1.0) throw UsageError("kernel mean outside [-1, 1]");
    if (k.mu == kExactMatchMu && k.sigma == kExactMatchSigma) ++exact;
  }
  if (exact != 1) throw UsageError("kernel bank needs exactly one exact-match kernel");
  if (kernels_[0].mu != kExactMatchMu || kernels_[0].sigma != kExactMatchSigma) {
    throw UsageError("exact-match kernel must come first");
  }
  for (std::size_t k = 2; k < kernels_.size(); ++k) {
    if (!(kernels_[k].mu < kernels_[k - 1].mu)) {
      throw UsageError("soft kernel means must be strictly decreasing");
    }
  }
}

bool KernelBank::operator==(const KernelBank& other) const {
  if (kernels_.size() != other.kernels_.size()) return false;
  for (std::size_t k = 0; k < kernels_.size(); ++k) {
    if (kernels_[k].mu != other.kernels_[k].mu || kernels_[k].sigma != other.kernels_[k].sigma) {
      return false;
    }
  }
  return true;
}

std::string KernelBank::describe() const {
  std::ostringstream out;
  out.precision(6);
  out << "K=" << kernels_.size() << '\n';
  for (std::size_t k = 0; k < kernels_.size(); ++k) {
    out << "  " << k << "  mu=" << kernels_[k].mu << "  sigma=" << kernels_[k].sigma << '\n';
  }
  return out.str();
}

KernelBank default_bank(std::size_t count) {
  if (count < 2) throw UsageError("kernel count must be at least 2");
  if (count % 2 == 0) throw UsageError("kernel count must be odd");
  std::vector<GaussianKernel> kernels;
  kernels.push_back({kExactMatchMu, kExactMatchSigma});
  const std::size_t soft = count - 1;
  const double step = 1.9 / static_cast<double>(soft - 1);
  for (std::size_t i = 0; i < soft; ++i) {
    const double mu = i + 1 == soft ? -0.95 : 0.95 - step * static_cast<double>(i);
    kernels.push_back({mu, kSoftMatchSigma});
  }
  return KernelBank(std::move(kernels));
}

std::vector<double> kernel_pool_row(std::span<const double> row,
                                    std::span<const std::uint8_t> col_mask,
                                    const KernelBank& bank) {
  if (col_mask.size() != row.size()) throw UsageError("kernel_pool_row: mask length mismatch");
  if (std::none_of(col_mask.begin(), col_mask.end(), [](std::uint8_t m) { return m != 0; })) {
    throw NumericError("kernel_pool_row: no unmasked entries");
  }
  std::vector<double> features(bank.size());
  for (std::size_t k = 0; k < bank.size(); ++k) {
    const double inv = 1.0 / (2.0 * bank[k].sigma * bank[k].sigma);
    double s = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (!col_mask[j]) continue;
      const double diff = row[j] - bank[k].mu;
      const double e = diff * diff * inv;
      s += e > 700.0 ? 0.0 : std::exp(-e);
    }
    features[k] = std::log(std::max(s, kLogClamp));
  }
  return features;
}

Tensor kernel_pool(const Tensor& m, std::span<const std::uint8_t> row_mask,
                   std::span<const std::uint8_t> col_mask, const KernelBank& bank) {
  if (!row_mask.empty() && row_mask.size() != m.rows()) {
    throw UsageError("kernel_pool: row mask length mismatch");
  }
  Tensor out(m.rows(), bank.size());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (!row_mask.empty() && !row_mask[i]) continue;
    const auto f = kernel_pool_row(m.row(i), col_mask, bank);
    std::copy(f.begin(), f.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace kgat
