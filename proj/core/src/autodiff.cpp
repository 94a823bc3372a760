#include "kgat/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "kgat/errors.hpp"
#include "kgat/kernels.hpp"
#include "kgat/numerics.hpp"

namespace kgat {

Var Tape::constant(Tensor value) { return record(std::move(value), false, nullptr); }

Var Tape::param(Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var{it->second};
  Var v = record(p.value, true, nullptr);
  nodes_[v.id].param = &p;
  param_nodes_.emplace(&p, v.id);
  return v;
}

Var Tape::record(Tensor value, bool requires_grad, Backward backward) {
  Node n;
  n.grad = Tensor(value.shape(), 0.0);
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

void Tape::backward(Var out, double scale) {
  if (nodes_[out.id].value.size() != 1) throw UsageError("backward: output is not a scalar");
  nodes_[out.id].grad[0] += scale;
  for (std::size_t i = out.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad) continue;
    if (n.backward) n.backward(*this, i);
  }
  for (auto& n : nodes_) {
    if (!n.param) continue;
    auto dst = n.param->grad.values();
    auto src = n.grad.values();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }
}

namespace ops {
namespace {

bool any_grad(const Tape& t, std::initializer_list<Var> vars) {
  return std::any_of(vars.begin(), vars.end(), [&](Var v) { return t.requires_grad(v); });
}

}  // namespace

Var matmul(Tape& t, Var a, Var b, bool transpose_a, bool transpose_b) {
  const Tensor& A = t.value(a);
  const Tensor& B = t.value(b);
  const std::size_t m = transpose_a ? A.cols() : A.rows();
  const std::size_t ka = transpose_a ? A.rows() : A.cols();
  const std::size_t kb = transpose_b ? B.cols() : B.rows();
  const std::size_t n = transpose_b ? B.rows() : B.cols();
  if (ka != kb) {
    throw UsageError("matmul: inner dimension mismatch " + A.shape_string() + " vs " +
                     B.shape_string());
  }
  const std::size_t ac = A.cols(), bc = B.cols();
  auto a_at = [&](std::size_t i, std::size_t k) {
    return transpose_a ? A[k * ac + i] : A[i * ac + k];
  };
  auto b_at = [&](std::size_t k, std::size_t j) {
    return transpose_b ? B[j * bc + k] : B[k * bc + j];
  };
  Tensor C(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < ka; ++k) {
      const double aik = a_at(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) C[i * n + j] += aik * b_at(k, j);
    }
  }
  return t.record(std::move(C), any_grad(t, {a, b}),
                  [a, b, transpose_a, transpose_b, m, n, ka](Tape& t, std::size_t self) {
                    const Tensor& G = t.grad_at(self);
                    const Tensor& A = t.value(a);
                    const Tensor& B = t.value(b);
                    const std::size_t ac = A.cols(), bc = B.cols();
                    if (t.requires_grad(a)) {
                      Tensor& GA = t.grad(a);
                      // dA(i,k) = sum_j G(i,j) B(k,j)
                      for (std::size_t i = 0; i < m; ++i) {
                        for (std::size_t k = 0; k < ka; ++k) {
                          double s = 0.0;
                          for (std::size_t j = 0; j < n; ++j) {
                            const double bkj = transpose_b ? B[j * bc + k] : B[k * bc + j];
                            s += G[i * n + j] * bkj;
                          }
                          if (transpose_a) {
                            GA[k * ac + i] += s;
                          } else {
                            GA[i * ac + k] += s;
                          }
                        }
                      }
                    }
                    if (t.requires_grad(b)) {
                      Tensor& GB = t.grad(b);
                      // dB(k,j) = sum_i A(i,k) G(i,j)
                      for (std::size_t i = 0; i < m; ++i) {
                        for (std::size_t k = 0; k < ka; ++k) {
                          const double aik = transpose_a ? A[k * ac + i] : A[i * ac + k];
                          if (aik == 0.0) continue;
                          for (std::size_t j = 0; j < n; ++j) {
                            if (transpose_b) {
                              GB[j * bc + k] += aik * G[i * n + j];
                            } else {
                              GB[k * bc + j] += aik * G[i * n + j];
                            }
                          }
                        }
                      }
                    }
                  });
}

Var affine(Tape& t, Var x, Var weight, Var bias) {
  const Tensor& X = t.value(x);
  const Tensor& W = t.value(weight);
  const Tensor& b = t.value(bias);
  const std::size_t rows = X.rows(), in = X.cols(), out = W.rows();
  if (W.cols() != in || b.size() != out) {
    throw UsageError("affine: shape mismatch x" + X.shape_string() + " W" + W.shape_string() +
                     " b" + b.shape_string());
  }
  Tensor Y(rows, out);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = X.data() + r * in;
    for (std::size_t o = 0; o < out; ++o) {
      const double* wo = W.data() + o * in;
      double s = b[o];
      for (std::size_t k = 0; k < in; ++k) s += wo[k] * xr[k];
      Y[r * out + o] = s;
    }
  }
  return t.record(std::move(Y), any_grad(t, {x, weight, bias}),
                  [x, weight, bias, rows, in, out](Tape& t, std::size_t self) {
                    const Tensor& G = t.grad_at(self);
                    const Tensor& X = t.value(x);
                    const Tensor& W = t.value(weight);
                    if (t.requires_grad(x)) {
                      Tensor& GX = t.grad(x);
                      for (std::size_t r = 0; r < rows; ++r) {
                        for (std::size_t o = 0; o < out; ++o) {
                          const double g = G[r * out + o];
                          if (g == 0.0) continue;
                          const double* wo = W.data() + o * in;
                          double* gx = GX.data() + r * in;
                          for (std::size_t k = 0; k < in; ++k) gx[k] += g * wo[k];
                        }
                      }
                    }
                    if (t.requires_grad(weight)) {
                      Tensor& GW = t.grad(weight);
                      for (std::size_t r = 0; r < rows; ++r) {
                        const double* xr = X.data() + r * in;
                        for (std::size_t o = 0; o < out; ++o) {
                          const double g = G[r * out + o];
                          if (g == 0.0) continue;
                          double* gw = GW.data() + o * in;
                          for (std::size_t k = 0; k < in; ++k) gw[k] += g * xr[k];
                        }
                      }
                    }
                    if (t.requires_grad(bias)) {
                      Tensor& Gb = t.grad(bias);
                      for (std::size_t r = 0; r < rows; ++r) {
                        for (std::size_t o = 0; o < out; ++o) Gb[o] += G[r * out + o];
                      }
                    }
                  });
}

Var relu(Tape& t, Var x) {
  Tensor Y = t.value(x);
  for (double& v : Y.values()) v = v > 0.0 ? v : 0.0;
  return t.record(std::move(Y), t.requires_grad(x), [x](Tape& t, std::size_t self) {
    const Tensor& G = t.grad_at(self);
    const Tensor& X = t.value(x);
    Tensor& GX = t.grad(x);
    for (std::size_t i = 0; i < X.size(); ++i) {
      if (X[i] > 0.0) GX[i] += G[i];
    }
  });
}

Var scale(Tape& t, Var x, double s) {
  Tensor Y = t.value(x);
  for (double& v : Y.values()) v *= s;
  return t.record(std::move(Y), t.requires_grad(x), [x, s](Tape& t, std::size_t self) {
    const Tensor& G = t.grad_at(self);
    Tensor& GX = t.grad(x);
    for (std::size_t i = 0; i < G.size(); ++i) GX[i] += s * G[i];
  });
}

Var add(Tape& t, Var a, Var b) {
  const Tensor& A = t.value(a);
  const Tensor& B = t.value(b);
  if (A.size() != B.size()) throw UsageError("add: size mismatch");
  Tensor Y = A;
  for (std::size_t i = 0; i < Y.size(); ++i) Y[i] += B[i];
  return t.record(std::move(Y), any_grad(t, {a, b}), [a, b](Tape& t, std::size_t self) {
    const Tensor& G = t.grad_at(self);
    for (Var v : {a, b}) {
      if (!t.requires_grad(v)) continue;
      Tensor& GV = t.grad(v);
      for (std::size_t i = 0; i < G.size(); ++i) GV[i] += G[i];
    }
  });
}

Var slice_rows(Tape& t, Var x, std::size_t begin, std::size_t count) {
  const Tensor& X = t.value(x);
  if (begin + count > X.rows()) throw UsageError("slice_rows: out of range");
  const std::size_t c = X.cols();
  Tensor Y(count, c);
  std::copy_n(X.data() + begin * c, count * c, Y.data());
  return t.record(std::move(Y), t.requires_grad(x),
                  [x, begin, c](Tape& t, std::size_t self) {
                    const Tensor& G = t.grad_at(self);
                    double* gx = t.grad(x).data() + begin * c;
                    for (std::size_t i = 0; i < G.size(); ++i) gx[i] += G[i];
                  });
}

Var concat_cols(Tape& t, Var a, Var b) {
  const Tensor& A = t.value(a);
  const Tensor& B = t.value(b);
  if (A.rows() != B.rows()) throw UsageError("concat_cols: row mismatch");
  const std::size_t r = A.rows(), ca = A.cols(), cb = B.cols();
  Tensor Y(r, ca + cb);
  for (std::size_t i = 0; i < r; ++i) {
    std::copy_n(A.data() + i * ca, ca, Y.data() + i * (ca + cb));
    std::copy_n(B.data() + i * cb, cb, Y.data() + i * (ca + cb) + ca);
  }
  return t.record(std::move(Y), any_grad(t, {a, b}),
                  [a, b, r, ca, cb](Tape& t, std::size_t self) {
                    const Tensor& G = t.grad_at(self);
                    if (t.requires_grad(a)) {
                      Tensor& GA = t.grad(a);
                      for (std::size_t i = 0; i < r; ++i) {
                        for (std::size_t k = 0; k < ca; ++k) GA[i * ca + k] += G[i * (ca + cb) + k];
                      }
                    }
                    if (t.requires_grad(b)) {
                      Tensor& GB = t.grad(b);
                      for (std::size_t i = 0; i < r; ++i) {
                        for (std::size_t k = 0; k < cb; ++k) {
                          GB[i * cb + k] += G[i * (ca + cb) + ca + k];
                        }
                      }
                    }
                  });
}

Var stack_rows(Tape& t, std::span<const Var> rows) {
  if (rows.empty()) throw UsageError("stack_rows: no rows");
  const std::size_t c = t.value(rows[0]).size();
  Tensor Y(rows.size(), c);
  bool grad = false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Tensor& R = t.value(rows[i]);
    if (R.size() != c) throw UsageError("stack_rows: width mismatch");
    std::copy_n(R.data(), c, Y.data() + i * c);
    grad = grad || t.requires_grad(rows[i]);
  }
  std::vector<Var> inputs(rows.begin(), rows.end());
  return t.record(std::move(Y), grad, [inputs, c](Tape& t, std::size_t self) {
    const Tensor& G = t.grad_at(self);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (!t.requires_grad(inputs[i])) continue;
      double* g = t.grad(inputs[i]).data();
      for (std::size_t k = 0; k < c; ++k) g[k] += G[i * c + k];
    }
  });
}

Var set_row(Tape& t, Var x, std::size_t r, Var v) {
  const Tensor& V = t.value(v);
  Tensor Y = t.value(x);
  const std::size_t c = Y.cols();
  if (r >= Y.rows() || V.size() != c) throw UsageError("set_row: shape mismatch");
  std::copy_n(V.data(), c, Y.data() + r * c);
  return t.record(std::move(Y), any_grad(t, {x, v}), [x, r, v, c](Tape& t, std::size_t self) {
    const Tensor& G = t.grad_at(self);
    if (t.requires_grad(x)) {
      Tensor& GX = t.grad(x);
      for (std::size_t i = 0; i < G.size(); ++i) {
        if (i / c != r) GX[i] += G[i];
      }
    }
    if (t.requires_grad(v)) {
      double* gv = t.grad(v).data();
      for (std::size_t k = 0; k < c; ++k) gv[k] += G[r * c + k];
    }
  });
}

Var masked_mean_rows(Tape& t, Var x, std::span<const std::uint8_t> mask) {
  const Tensor& X = t.value(x);
  if (mask.size() != X.rows()) throw UsageError("masked_mean_rows: mask length mismatch");
  const std::size_t c = X.cols();
  const auto count = static_cast<std::size_t>(std::count_if(
      mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; }));
  if (count == 0) throw NumericError("masked_mean_rows: empty support");
  Tensor Y(1, c);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    if (!mask[i]) continue;
    for (std::size_t k = 0; k < c; ++k) Y[k] += X[i * c + k];
  }
  const double inv = 1.0 / static_cast<double>(count);
  for (double& y : Y.values()) y *= inv;
  Mask m(mask.begin(), mask.end());
  return t.record(std::move(Y), t.requires_grad(x), [x, m, c, inv](Tape& t, std::size_t self) {
    const Tensor& G = t.grad_at(self);
    Tensor& GX = t.grad(x);
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (!m[i]) continue;
      for (std::size_t k = 0; k < c; ++k) GX[i * c + k] += inv * G[k];
    }
  });
}

Var gather_rows(Tape& t, Parameter& table, std::span<const int> ids) {
  const Tensor& E = table.value;
  const std::size_t c = E.cols();
  Tensor Y(ids.size(), c);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= E.rows()) {
      throw DataError("token id " + std::to_string(ids[i]) + " out of range for " + table.name);
    }
    std::copy_n(E.data() + static_cast<std::size_t>(ids[i]) * c, c, Y.data() + i * c);
  }
  std::vector<int> idx(ids.begin(), ids.end());
  Parameter* p = &table;
  return t.record(std::move(Y), true, [p, idx, c](Tape& t, std::size_t self) {
    const Tensor& G = t.grad_at(self);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      double* g = p->grad.data() + static_cast<std::size_t>(idx[i]) * c;
      for (std::size_t k = 0; k < c; ++k) g[k] += G[i * c + k];
    }
  });
}

Var cosine_matrix(Tape& t, Var a, Var b) {
  const Tensor& A = t.value(a);
  const Tensor& B = t.value(b);
  if (A.cols() != B.cols()) throw UsageError("cosine_matrix: dimension mismatch");
  const std::size_t ra = A.rows(), rb = B.rows(), d = A.cols();
  auto na = std::make_shared<std::vector<double>>(ra);
  auto nb = std::make_shared<std::vector<double>>(rb);
  for (std::size_t i = 0; i < ra; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) s += A[i * d + k] * A[i * d + k];
    (*na)[i] = std::sqrt(s);
  }
  for (std::size_t j = 0; j < rb; ++j) {
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) s += B[j * d + k] * B[j * d + k];
    (*nb)[j] = std::sqrt(s);
  }
  // raw cosine before clamping; needed to know which entries were clamped
  auto raw = std::make_shared<std::vector<double>>(ra * rb);
  Tensor C(ra, rb);
  for (std::size_t i = 0; i < ra; ++i) {
    const double* ai = A.data() + i * d;
    for (std::size_t j = 0; j < rb; ++j) {
      const double* bj = B.data() + j * d;
      double dot = 0.0;
      for (std::size_t k = 0; k < d; ++k) dot += ai[k] * bj[k];
      const double c = dot / std::max((*na)[i] * (*nb)[j], kCosineFloor);
      (*raw)[i * rb + j] = c;
      C[i * rb + j] = std::clamp(c, -1.0, 1.0);
    }
  }
  return t.record(
      std::move(C), any_grad(t, {a, b}),
      [a, b, na, nb, raw, ra, rb, d](Tape& t, std::size_t self) {
        const Tensor& G = t.grad_at(self);
        const Tensor& A = t.value(a);
        const Tensor& B = t.value(b);
        const bool ga = t.requires_grad(a), gb = t.requires_grad(b);
        Tensor* GA = ga ? &t.grad(a) : nullptr;
        Tensor* GB = gb ? &t.grad(b) : nullptr;
        for (std::size_t i = 0; i < ra; ++i) {
          const double* ai = A.data() + i * d;
          for (std::size_t j = 0; j < rb; ++j) {
            const double g = G[i * rb + j];
            const double c = (*raw)[i * rb + j];
            if (g == 0.0 || c > 1.0 || c < -1.0) continue;
            const double* bj = B.data() + j * d;
            const double prod = (*na)[i] * (*nb)[j];
            if (prod < kCosineFloor) {
              // c = dot / floor
              const double f = g / kCosineFloor;
              if (ga) {
                for (std::size_t k = 0; k < d; ++k) (*GA)[i * d + k] += f * bj[k];
              }
              if (gb) {
                for (std::size_t k = 0; k < d; ++k) (*GB)[j * d + k] += f * ai[k];
              }
              continue;
            }
            const double inv = g / prod;
            if (ga) {
              const double ca = g * c / ((*na)[i] * (*na)[i]);
              for (std::size_t k = 0; k < d; ++k) (*GA)[i * d + k] += inv * bj[k] - ca * ai[k];
            }
            if (gb) {
              const double cb = g * c / ((*nb)[j] * (*nb)[j]);
              for (std::size_t k = 0; k < d; ++k) (*GB)[j * d + k] += inv * ai[k] - cb * bj[k];
            }
          }
        }
      });
}

Var kernel_pool(Tape& t, Var m, std::span<const std::uint8_t> row_mask,
                std::span<const std::uint8_t> col_mask, const KernelBank& bank) {
  const Tensor& M = t.value(m);
  const std::size_t rows = M.rows(), cols = M.cols(), K = bank.size();
  if (!row_mask.empty() && row_mask.size() != rows) {
    throw UsageError("kernel_pool: row mask length mismatch");
  }
  if (col_mask.size() != cols) throw UsageError("kernel_pool: column mask length mismatch");
  if (std::none_of(col_mask.begin(), col_mask.end(), [](std::uint8_t v) { return v != 0; })) {
    throw NumericError("kernel_pool: no unmasked columns");
  }
  Mask rmask = row_mask.empty() ? Mask(rows, 1) : Mask(row_mask.begin(), row_mask.end());
  Mask cmask(col_mask.begin(), col_mask.end());

  // Gaussian responses per (row, col, kernel) and the per-(row, kernel) sums.
  auto resp = std::make_shared<std::vector<double>>(rows * cols * K, 0.0);
  auto sums = std::make_shared<std::vector<double>>(rows * K, 0.0);
  std::vector<double> inv2s2(K);
  for (std::size_t k = 0; k < K; ++k) inv2s2[k] = 1.0 / (2.0 * bank[k].sigma * bank[k].sigma);

  Tensor F(rows, K);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!rmask[i]) continue;
    for (std::size_t j = 0; j < cols; ++j) {
      if (!cmask[j]) continue;
      const double x = M[i * cols + j];
      double* r = resp->data() + (i * cols + j) * K;
      for (std::size_t k = 0; k < K; ++k) {
        const double diff = x - bank[k].mu;
        const double e = diff * diff * inv2s2[k];
        // exp(-700) is far below the 1e-10 clamp; skip the call.
        r[k] = e > 700.0 ? 0.0 : std::exp(-e);
      }
    }
    for (std::size_t k = 0; k < K; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < cols; ++j) {
        if (cmask[j]) s += (*resp)[(i * cols + j) * K + k];
      }
      (*sums)[i * K + k] = s;
      F[i * K + k] = std::log(std::max(s, kLogClamp));
    }
  }
  const KernelBank* kb = &bank;
  return t.record(
      std::move(F), t.requires_grad(m),
      [m, rmask, cmask, resp, sums, rows, cols, K, kb](Tape& t, std::size_t self) {
        const Tensor& G = t.grad_at(self);
        const Tensor& M = t.value(m);
        Tensor& GM = t.grad(m);
        std::vector<double> coef(K);
        for (std::size_t i = 0; i < rows; ++i) {
          if (!rmask[i]) continue;
          bool any = false;
          for (std::size_t k = 0; k < K; ++k) {
            const double s = (*sums)[i * K + k];
            // Below the clamp the feature is constant.
            coef[k] = s > kLogClamp ? G[i * K + k] / s : 0.0;
            any = any || coef[k] != 0.0;
          }
          if (!any) continue;
          for (std::size_t j = 0; j < cols; ++j) {
            if (!cmask[j]) continue;
            const double x = M[i * cols + j];
            const double* r = resp->data() + (i * cols + j) * K;
            double g = 0.0;
            for (std::size_t k = 0; k < K; ++k) {
              if (coef[k] == 0.0 || r[k] == 0.0) continue;
              const double s2 = (*kb)[k].sigma * (*kb)[k].sigma;
              g += coef[k] * r[k] * (-(x - (*kb)[k].mu) / s2);
            }
            GM[i * cols + j] += g;
          }
        }
      });
}

Var masked_softmax(Tape& t, Var x, std::span<const std::uint8_t> mask) {
  const Tensor& X = t.value(x);
  std::vector<double> p = kgat::softmax(X.values(), mask);
  Tensor Y(X.shape());
  std::copy(p.begin(), p.end(), Y.data());
  return t.record(std::move(Y), t.requires_grad(x), [x](Tape& t, std::size_t self) {
    const Tensor& G = t.grad_at(self);
    const Tensor& P = t.value_at(self);
    double dot = 0.0;
    for (std::size_t i = 0; i < P.size(); ++i) dot += G[i] * P[i];
    Tensor& GX = t.grad(x);
    for (std::size_t i = 0; i < P.size(); ++i) {
      if (P[i] != 0.0) GX[i] += P[i] * (G[i] - dot);
    }
  });
}

Var softmax(Tape& t, Var x) {
  const Mask all(t.value(x).size(), 1);
  return masked_softmax(t, x, all);
}

Var neg_log_prob(Tape& t, Var p, std::size_t index) {
  const Tensor& P = t.value(p);
  if (index >= P.size()) throw UsageError("neg_log_prob: index out of range");
  const double v = P[index];
  const bool clamped = v < kProbClamp;
  Tensor L(1, 1, -std::log(clamped ? kProbClamp : v));
  return t.record(std::move(L), t.requires_grad(p),
                  [p, index, v, clamped](Tape& t, std::size_t self) {
                    if (clamped) return;
                    t.grad(p)[index] += -t.grad_at(self)[0] / v;
                  });
}

Var pairwise_hinge(Tape& t, Var pos, Var neg, double margin) {
  const double sp = t.value(pos)[0], sn = t.value(neg)[0];
  const double raw = margin - sp + sn;
  const bool active = raw > 0.0;
  Tensor L(1, 1, active ? raw : 0.0);
  return t.record(std::move(L), any_grad(t, {pos, neg}),
                  [pos, neg, active](Tape& t, std::size_t self) {
                    if (!active) return;
                    const double g = t.grad_at(self)[0];
                    if (t.requires_grad(pos)) t.grad(pos)[0] -= g;
                    if (t.requires_grad(neg)) t.grad(neg)[0] += g;
                  });
}

}  // namespace ops
}  // namespace kgat
