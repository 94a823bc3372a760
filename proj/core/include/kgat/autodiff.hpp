#ifndef KGAT_AUTODIFF_HPP_
#define KGAT_AUTODIFF_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "kgat/tensor.hpp"

namespace kgat {

class KernelBank;

// Handle to a value recorded on a Tape.
struct Var {
  std::size_t id = static_cast<std::size_t>(-1);
};

// Reverse-mode tape over 2-D tensors. Each operation records its output
// value and a closure that pushes the output gradient back to its inputs.
// Parameter leaves accumulate into Parameter::grad when backward() finishes.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf with no gradient.
  Var constant(Tensor value);
  // Leaf bound to a trainable parameter. A parameter registered twice on the
  // same tape returns the same Var.
  Var param(Parameter& p);

  const Tensor& value(Var v) const { return nodes_[v.id].value; }
  Tensor& grad(Var v) { return nodes_[v.id].grad; }
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  // Seeds d(out)/d(out) = 1 for a scalar output and runs all closures in
  // reverse order. Gradients are added to (not written over) Parameter::grad,
  // multiplied by `scale`.
  void backward(Var out, double scale = 1.0);

  // Used by op implementations.
  using Backward = std::function<void(Tape&, std::size_t self)>;
  Var record(Tensor value, bool requires_grad, Backward backward);
  Tensor& grad_at(std::size_t id) { return nodes_[id].grad; }
  const Tensor& value_at(std::size_t id) const { return nodes_[id].value; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    Backward backward;
    Parameter* param = nullptr;
  };
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
};

namespace ops {

// C = op(A) * op(B) where op transposes when the flag is set.
Var matmul(Tape& t, Var a, Var b, bool transpose_a = false, bool transpose_b = false);
// X [r x in] -> X W^T + b, W [out x in], b [out].
Var affine(Tape& t, Var x, Var weight, Var bias);
Var relu(Tape& t, Var x);
Var scale(Tape& t, Var x, double s);
Var add(Tape& t, Var a, Var b);

Var slice_rows(Tape& t, Var x, std::size_t begin, std::size_t count);
Var concat_cols(Tape& t, Var a, Var b);
Var stack_rows(Tape& t, std::span<const Var> rows);
// Copy of x with row r replaced by the single-row v.
Var set_row(Tape& t, Var x, std::size_t r, Var v);
// Mean over rows whose mask is set -> [1 x cols].
Var masked_mean_rows(Tape& t, Var x, std::span<const std::uint8_t> mask);

// Rows of `table` selected by ids; the gradient is scattered straight into
// table.grad (times the scale passed to backward).
Var gather_rows(Tape& t, Parameter& table, std::span<const int> ids);

Var cosine_matrix(Tape& t, Var a, Var b);
// Row-wise Gaussian kernel pooling of a translation matrix. Rows whose
// row_mask is 0 produce zero features; columns whose col_mask is 0 are
// excluded from the sums. `bank` must outlive the tape.
Var kernel_pool(Tape& t, Var m, std::span<const std::uint8_t> row_mask,
                std::span<const std::uint8_t> col_mask, const KernelBank& bank);

// Softmax over every entry of x (any shape) restricted to mask.
Var masked_softmax(Tape& t, Var x, std::span<const std::uint8_t> mask);
Var softmax(Tape& t, Var x);

// -ln(max(p[index], kProbClamp)).
Var neg_log_prob(Tape& t, Var p, std::size_t index);
// max(0, margin - pos + neg) over two scalars.
Var pairwise_hinge(Tape& t, Var pos, Var neg, double margin);

}  // namespace ops
}  // namespace kgat

#endif  // KGAT_AUTODIFF_HPP_
