#include "kgat/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>

#include "kgat/errors.hpp"

namespace kgat {

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)),
      values_(std::accumulate(shape_.begin(), shape_.end(), std::size_t{1},
                              std::multiplies<>()),
              fill) {}

Tensor::Tensor(std::size_t rows, std::size_t cols, double fill)
    : Tensor(std::vector<std::size_t>{rows, cols}, fill) {}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  Tensor t(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw UsageError("ragged rows in Tensor::from_rows");
    for (double v : row) t.values_[i++] = v;
  }
  return t;
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  Tensor t(std::vector<std::size_t>{values.size()});
  std::copy(values.begin(), values.end(), t.values_.begin());
  return t;
}

std::size_t Tensor::rows() const {
  if (shape_.size() == 2) return shape_[0];
  return shape_.empty() ? 0 : 1;
}

std::size_t Tensor::cols() const {
  if (shape_.size() == 2) return shape_[1];
  return shape_.empty() ? 0 : shape_[0];
}

void Tensor::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

std::string Tensor::shape_string() const {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) out << " x ";
    out << shape_[i];
  }
  out << ']';
  return out.str();
}

Parameter::Parameter(std::string n, Tensor v)
    : name(std::move(n)), value(std::move(v)), grad(value.shape(), 0.0) {}

std::size_t ParameterSet::add(std::string name, Tensor value) {
  if (contains(name)) throw UsageError("duplicate parameter name: " + name);
  params_.emplace_back(std::move(name), std::move(value));
  return params_.size() - 1;
}

Parameter& ParameterSet::get(const std::string& name) { return params_[index_of(name)]; }

const Parameter& ParameterSet::get(const std::string& name) const {
  return params_[index_of(name)];
}

bool ParameterSet::contains(const std::string& name) const {
  return std::any_of(params_.begin(), params_.end(),
                     [&](const Parameter& p) { return p.name == name; });
}

std::size_t ParameterSet::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return i;
  }
  throw DataError("missing parameter: " + name);
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

AffineMap AffineMap::create(ParameterSet& params, const std::string& name, std::size_t in,
                            std::size_t out) {
  AffineMap m;
  m.weight = params.add(name + ".weight", Tensor(out, in));
  m.bias = params.add(name + ".bias", Tensor(std::vector<std::size_t>{out}));
  return m;
}

std::size_t AffineMap::in_dim(const ParameterSet& params) const {
  return params[weight].value.cols();
}

std::size_t AffineMap::out_dim(const ParameterSet& params) const {
  return params[weight].value.rows();
}

TwoLayerPerceptron TwoLayerPerceptron::create(ParameterSet& params, const std::string& name,
                                              std::size_t in, std::size_t width,
                                              std::size_t out) {
  return {AffineMap::create(params, name + ".hidden", in, width),
          AffineMap::create(params, name + ".output", width, out)};
}

}  // namespace kgat
