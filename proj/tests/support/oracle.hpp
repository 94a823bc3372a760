#ifndef KGAT_TESTS_ORACLE_HPP_
#define KGAT_TESTS_ORACLE_HPP_

// Plain scalar re-implementations used as test oracles. Everything is loops
// over std::vector<double>; nothing here touches the tape or Tensor kernels.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "kgat/dataset.hpp"
#include "kgat/kernels.hpp"
#include "kgat/model.hpp"
#include "kgat/tensor.hpp"
#include "kgat/vocabulary.hpp"

namespace kgat::oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double cosine(const Vec& a, const Vec& b) {
  const double c = dot(a, b) / std::max(norm(a) * norm(b), 1e-8);
  return std::min(1.0, std::max(-1.0, c));
}

inline Vec softmax(const Vec& x) {
  double mx = -INFINITY;
  for (double v : x) mx = std::max(mx, v);
  Vec out(x.size());
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += out[i] = std::exp(x[i] - mx);
  for (double& v : out) v /= s;
  return out;
}

// K_k(row) = log(max(sum_j exp(-(row_j - mu_k)^2 / (2 sigma_k^2)), 1e-10))
inline Vec kernel_row(const Vec& row, const std::vector<std::uint8_t>& col_mask,
                      const KernelBank& bank) {
  Vec f(bank.size());
  for (std::size_t k = 0; k < bank.size(); ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (!col_mask[j]) continue;
      const double diff = row[j] - bank[k].mu;
      s += std::exp(-diff * diff / (2.0 * bank[k].sigma * bank[k].sigma));
    }
    f[k] = std::log(std::max(s, 1e-10));
  }
  return f;
}

// Triple loop over rows, kernels, columns.
inline Mat kernel_pool(const Mat& m, const std::vector<std::uint8_t>& col_mask,
                       const KernelBank& bank) {
  Mat out;
  for (const Vec& row : m) out.push_back(kernel_row(row, col_mask, bank));
  return out;
}

struct Affine {
  Mat w;  // [out][in]
  Vec b;

  Vec operator()(const Vec& x) const {
    Vec y(b);
    for (std::size_t o = 0; o < w.size(); ++o) y[o] += dot(w[o], x);
    return y;
  }
};

inline Affine affine_from(const ParameterSet& params, const std::string& name) {
  const Tensor& w = params.get(name + ".weight").value;
  const Tensor& b = params.get(name + ".bias").value;
  Affine a;
  for (std::size_t r = 0; r < w.rows(); ++r) a.w.emplace_back(w.row(r).begin(), w.row(r).end());
  a.b.assign(b.values().begin(), b.values().end());
  return a;
}

struct NodeView {
  std::vector<int> ids;
  std::vector<std::uint8_t> mask;
  std::size_t claim_len = 0;  // claim tokens plus their [SEP]
  Mat h;                      // row 0 = z
  bool valid = false;
};

struct Result {
  std::array<double, 3> probs{};
  double loss = 0.0;
  Vec selection;  // over all candidates, 0 for PAD
  std::vector<Vec> beta;
};

// End-to-end forward pass of the graph model straight from the parameters.
inline Result forward(const ParameterSet& params, const Vocabulary& vocab, const KernelBank& bank,
                      const ClaimInstance& inst, AblationMode mode) {
  const Tensor& emb = params.get("encoder.embedding").value;
  const Affine proj = affine_from(params, "encoder.proj");
  const Affine attn = affine_from(params, "edge.token_attention");
  const Affine hidden = affine_from(params, "edge.sentence_mlp.hidden");
  const Affine output = affine_from(params, "edge.sentence_mlp.output");
  const Affine label = affine_from(params, "edge.label");
  const Affine select = affine_from(params, "node.selection");
  const std::size_t d = emb.cols();
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

  std::vector<NodeView> nodes;
  for (const auto& c : inst.candidates) {
    NodeView n;
    n.ids.push_back(Vocabulary::kCls);
    for (const auto& t : inst.claim_tokens) n.ids.push_back(vocab.id(t));
    n.ids.push_back(Vocabulary::kSep);
    n.claim_len = inst.claim_tokens.size() + 1;
    for (const auto& t : c.title_tokens) n.ids.push_back(vocab.id(t));
    if (c.is_pad) {
      n.ids.push_back(Vocabulary::kPad);
    } else {
      for (const auto& t : c.sentence_tokens) n.ids.push_back(vocab.id(t));
    }
    n.ids.push_back(Vocabulary::kSep);
    n.valid = !c.is_pad;
    for (int id : n.ids) {
      n.mask.push_back(id == Vocabulary::kPad ? 0 : 1);
      n.h.push_back(proj(Vec(emb.row(id).begin(), emb.row(id).end())));
    }
    Vec z(d, 0.0);
    double count = 0.0;
    for (std::size_t i = 1; i < n.ids.size(); ++i) {
      if (!n.mask[i]) continue;
      for (std::size_t j = 0; j < d; ++j) z[j] += n.h[i][j];
      count += 1.0;
    }
    for (double& v : z) v /= count;
    n.h[0] = z;
    nodes.push_back(std::move(n));
  }

  Result r;
  r.selection.assign(nodes.size(), 0.0);
  r.beta.assign(nodes.size(), {});
  std::vector<std::size_t> valid;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].valid) valid.push_back(i);
  }

  std::vector<Vec> per_node;
  Vec sel_logits;
  for (std::size_t p : valid) {
    const NodeView& np = nodes[p];
    const Vec& zp = np.h[0];
    std::vector<Vec> zhat;
    for (std::size_t q : valid) {
      const NodeView& nq = nodes[q];
      std::vector<std::size_t> support;
      Vec logits;
      for (std::size_t i = 1; i < nq.ids.size(); ++i) {
        if (!nq.mask[i]) continue;
        support.push_back(i);
        if (mode.edge == AttentionKind::kKernel) {
          Vec row;
          std::vector<std::uint8_t> cols;
          for (std::size_t j = 1; j < np.ids.size(); ++j) {
            row.push_back(cosine(nq.h[i], np.h[j]));
            cols.push_back(np.mask[j]);
          }
          logits.push_back(attn(kernel_row(row, cols, bank))[0]);
        } else {
          logits.push_back(dot(nq.h[i], zp) * inv_sqrt_d);
        }
      }
      const Vec alpha = softmax(logits);
      Vec zq(d, 0.0);
      for (std::size_t s = 0; s < support.size(); ++s) {
        for (std::size_t j = 0; j < d; ++j) zq[j] += alpha[s] * nq.h[support[s]][j];
      }
      zhat.push_back(zq);
    }
    Vec scores;
    for (const Vec& zq : zhat) {
      Vec x(zp);
      x.insert(x.end(), zq.begin(), zq.end());
      Vec hdn = hidden(x);
      for (double& v : hdn) v = std::max(0.0, v);
      scores.push_back(output(hdn)[0]);
    }
    const Vec beta = softmax(scores);
    r.beta[p].assign(nodes.size(), 0.0);
    Vec v(d, 0.0);
    for (std::size_t qi = 0; qi < zhat.size(); ++qi) {
      r.beta[p][valid[qi]] = beta[qi];
      for (std::size_t j = 0; j < d; ++j) v[j] += beta[qi] * zhat[qi][j];
    }
    v.insert(v.end(), zp.begin(), zp.end());
    per_node.push_back(softmax(label(v)));

    if (mode.node == AttentionKind::kKernel) {
      Vec phi(bank.size(), 0.0);
      double rows = 0.0;
      for (std::size_t i = 1; i <= np.claim_len; ++i) {
        if (!np.mask[i]) continue;
        Vec row;
        std::vector<std::uint8_t> cols;
        for (std::size_t j = np.claim_len + 1; j < np.ids.size(); ++j) {
          row.push_back(cosine(np.h[i], np.h[j]));
          cols.push_back(np.mask[j]);
        }
        const Vec f = kernel_row(row, cols, bank);
        for (std::size_t k = 0; k < f.size(); ++k) phi[k] += f[k];
        rows += 1.0;
      }
      for (double& x : phi) x /= rows;
      sel_logits.push_back(select(phi)[0]);
    } else {
      Vec mean(d, 0.0);
      double rows = 0.0;
      for (std::size_t i = 1; i <= np.claim_len; ++i) {
        if (!np.mask[i]) continue;
        for (std::size_t j = 0; j < d; ++j) mean[j] += np.h[i][j];
        rows += 1.0;
      }
      for (double& x : mean) x /= rows;
      sel_logits.push_back(dot(mean, zp) * inv_sqrt_d);
    }
  }
  const Vec sel = softmax(sel_logits);
  for (std::size_t pi = 0; pi < valid.size(); ++pi) {
    r.selection[valid[pi]] = sel[pi];
    for (std::size_t y = 0; y < 3; ++y) r.probs[y] += sel[pi] * per_node[pi][y];
  }
  r.loss = -std::log(std::max(r.probs[static_cast<std::size_t>(inst.label)], 1e-12));
  return r;
}

}  // namespace kgat::oracle

#endif  // KGAT_TESTS_ORACLE_HPP_
