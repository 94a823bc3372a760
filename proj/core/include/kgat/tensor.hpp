#ifndef KGAT_TENSOR_HPP_
#define KGAT_TENSOR_HPP_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace kgat {

// Position / node validity flags. 1 = real, 0 = masked.
using Mask = std::vector<std::uint8_t>;

// Dense row-major tensor of doubles. Rank 1 and rank 2 are the only shapes
// the model uses; rows()/cols() treat a rank-1 tensor as a single row.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0);

  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor vector(std::initializer_list<double> values);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return values_.size(); }
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& at(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }

  std::span<double> row(std::size_t r) { return values().subspan(r * cols(), cols()); }
  std::span<const double> row(std::size_t r) const {
    return values().subspan(r * cols(), cols());
  }

  void fill(double v);
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool all_finite() const;

  std::string shape_string() const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
};

// A trainable tensor together with its gradient accumulator.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter(std::string n, Tensor v);
  void zero_grad() { grad.fill(0.0); }
};

// Ordered, name-addressable collection of parameters. Layers refer to their
// tensors by index, which stays stable as parameters are added.
class ParameterSet {
 public:
  std::size_t add(std::string name, Tensor value);

  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  bool contains(const std::string& name) const;
  std::size_t index_of(const std::string& name) const;

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grad();

 private:
  std::vector<Parameter> params_;
};

// Linear layer: y = W x + b with W [out x in], b [out].
struct AffineMap {
  std::size_t weight = 0;
  std::size_t bias = 0;

  static AffineMap create(ParameterSet& params, const std::string& name, std::size_t in,
                          std::size_t out);
  std::size_t in_dim(const ParameterSet& params) const;
  std::size_t out_dim(const ParameterSet& params) const;
};

// affine -> ReLU -> affine.
struct TwoLayerPerceptron {
  AffineMap hidden;
  AffineMap output;

  static TwoLayerPerceptron create(ParameterSet& params, const std::string& name,
                                   std::size_t in, std::size_t width, std::size_t out);
};

}  // namespace kgat

#endif  // KGAT_TENSOR_HPP_
