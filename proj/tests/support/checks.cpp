#include "checks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kgat/autodiff.hpp"
#include "kgat/kernels.hpp"
#include "kgat/model.hpp"
#include "kgat/random.hpp"
#include "kgat/synthetic.hpp"
#include "oracle.hpp"

namespace kgat::checks {
namespace {

double total(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

SentenceKey key(const char* doc, int idx) { return {doc, idx}; }

ClaimInstance property_instance(Rng& rng, const RandomInstanceSpec& spec, int i) {
  ClaimInstance inst = random_instance(rng, spec, "p" + std::to_string(i));
  for (auto& c : inst.candidates) {
    if (c.is_pad || !rng.bernoulli(0.3)) continue;
    const std::size_t n = 1 + rng.below(3);
    for (std::size_t k = 0; k < n; ++k) c.sentence_tokens.emplace_back("[PAD]");
  }
  return inst;
}

}  // namespace

double kernel_pool_oracle_gap(int trials, std::uint64_t seed) {
  Rng rng(seed);
  const KernelBank bank = default_bank(21);
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    const std::size_t a = 1 + rng.below(20), b = 1 + rng.below(20);
    Tensor m(a, b);
    oracle::Mat om(a, oracle::Vec(b));
    for (std::size_t i = 0; i < a; ++i) {
      for (std::size_t j = 0; j < b; ++j) om[i][j] = m.at(i, j) = rng.uniform(-1.0, 1.0);
    }
    if (trial % 3 == 0) om[0][0] = m.at(0, 0) = 1.0;
    Mask cols(b, 1);
    if (b > 1 && trial % 2 == 0) cols[rng.below(b)] = 0;
    const Tensor fast = kernel_pool(m, {}, cols, bank);
    Tape t;
    const Tensor taped = t.value(ops::kernel_pool(t, t.constant(m), Mask(a, 1), cols, bank));
    const oracle::Mat slow = oracle::kernel_pool(om, cols, bank);
    for (std::size_t i = 0; i < a; ++i) {
      for (std::size_t k = 0; k < bank.size(); ++k) {
        worst = std::max(worst, std::abs(fast.at(i, k) - slow[i][k]));
        worst = std::max(worst, std::abs(taped.at(i, k) - slow[i][k]));
      }
    }
  }
  return worst;
}

ClaimInstance two_node_instance() {
  ClaimInstance inst;
  inst.claim_id = "hand";
  inst.label = Label::kRefutes;
  inst.claim_tokens = {"tok_1", "tok_2"};
  EvidenceSentence a, b;
  a.doc_id = "A";
  a.title_tokens = {"tok_3"};
  a.sentence_tokens = {"tok_1", "tok_4"};
  b.doc_id = "B";
  b.title_tokens = {"tok_5"};
  b.sentence_tokens = {"tok_2", "tok_6", "tok_0"};
  inst.candidates = {a, b};
  inst.golden_sets = {{a.key()}};
  return inst;
}

double two_node_oracle_gap() {
  const Vocabulary vocab = random_instance_vocabulary(RandomInstanceSpec{});
  const ClaimInstance inst = two_node_instance();
  double worst = 0.0;
  for (std::size_t k : {5, 21}) {
    ModelConfig mc;
    mc.dim = 4;
    mc.kernel_count = k;
    mc.evidence_per_claim = 2;
    KgatModel model(mc, vocab, 17);
    Rng rng(99);
    for (const char* name : {"edge.token_attention.weight", "node.selection.weight"}) {
      for (double& v : model.params().get(name).value.values()) v = rng.uniform(-0.3, 0.3);
    }
    for (AblationMode mode : AblationMode::all()) {
      const ForwardResult r = model.forward(inst, mode);
      const oracle::Result o = oracle::forward(model.params(), vocab, model.bank(), inst, mode);
      for (std::size_t y = 0; y < 3; ++y) worst = std::max(worst, std::abs(r.probs[y] - o.probs[y]));
      worst = std::max(worst, std::abs(r.loss - o.loss));
      for (std::size_t p = 0; p < 2; ++p) {
        worst = std::max(worst, std::abs(r.trace.selection[p] - o.selection[p]));
        for (std::size_t q = 0; q < 2; ++q) {
          worst = std::max(worst, std::abs(r.trace.beta[p][q] - o.beta[p][q]));
        }
      }
    }
  }
  return worst;
}

PropertyReport property_suite(int instances) {
  PropertyReport rep;
  rep.instances = instances;
  RandomInstanceSpec spec;
  spec.max_pad = 3;
  const Vocabulary vocab = random_instance_vocabulary(spec);
  ModelConfig mc;
  mc.dim = 8;
  mc.kernel_count = 11;
  KgatModel model(mc, vocab, 77);
  Rng rng(2025);
  auto gap = [&rep](double s) { rep.normalization_gap = std::max(rep.normalization_gap, std::abs(s - 1.0)); };

  for (int i = 0; i < instances; ++i) {
    const ClaimInstance inst = property_instance(rng, spec, i);
    const AblationMode mode = AblationMode::all()[static_cast<std::size_t>(i) % 4];
    const ForwardResult r = model.forward(inst, mode);
    const AttentionTrace& tr = r.trace;
    gap(r.probs[0] + r.probs[1] + r.probs[2]);
    gap(total(tr.selection));
    for (std::size_t p = 0; p < tr.valid.size(); ++p) {
      if (!tr.valid[p]) {
        if (tr.selection[p] != 0.0 || !tr.beta[p].empty()) ++rep.pad_violations;
        continue;
      }
      gap(total(tr.beta[p]));
      for (std::size_t q = 0; q < tr.valid.size(); ++q) {
        if (!tr.valid[q] && tr.beta[p][q] != 0.0) ++rep.pad_violations;
      }
    }
    for (const EdgeTrace& e : tr.edges) {
      gap(total(e.alpha));
      const auto& ids = tr.node_tokens[e.from];
      for (std::size_t pos = 0; pos < ids.size(); ++pos) {
        if (ids[pos] == Vocabulary::kPad && e.alpha[pos] != 0.0) ++rep.pad_violations;
      }
    }

    std::vector<std::size_t> perm(inst.candidates.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(perm);
    ClaimInstance shuffled = inst;
    for (std::size_t k = 0; k < perm.size(); ++k) shuffled.candidates[k] = inst.candidates[perm[k]];
    const ForwardResult b = model.forward(shuffled, mode);
    double& eq = rep.equivariance_gap;
    for (std::size_t y = 0; y < 3; ++y) eq = std::max(eq, std::abs(r.probs[y] - b.probs[y]));
    for (std::size_t k = 0; k < perm.size(); ++k) {
      eq = std::max(eq, std::abs(b.trace.selection[k] - tr.selection[perm[k]]));
      if (!tr.valid[perm[k]]) continue;
      for (std::size_t m = 0; m < perm.size(); ++m) {
        if (!tr.valid[perm[m]]) continue;
        eq = std::max(eq, std::abs(b.trace.beta[k][m] - tr.beta[perm[k]][perm[m]]));
      }
    }
  }
  return rep;
}

MetricsFixture metrics_fixture() {
  MetricsFixture f;
  f.gold = {
      {"c1", Label::kNotEnoughInfo, {}},
      {"c2", Label::kRefutes, {{key("B", 0), key("B", 1)}}},
      {"c3", Label::kNotEnoughInfo, {}},
      {"c4", Label::kSupports, {{key("C", 0)}, {key("D", 0)}}},
      {"c5", Label::kSupports, {{key("G", 0)}}},
      {"c6", Label::kRefutes, {{key("E", 0)}}},
  };
  f.preds = {
      {"c6", Label::kRefutes,
       {key("F", 0), key("F", 1), key("F", 2), key("F", 3), key("F", 4), key("E", 0)}},
      {"c1", Label::kSupports, {key("A", 0)}},
      {"c2", Label::kRefutes, {key("B", 0), key("Y", 0)}},
      {"c3", Label::kNotEnoughInfo, {key("Z", 0)}},
      {"c4", Label::kSupports, {key("D", 0), key("C", 1)}},
      {"c5", Label::kRefutes, {key("G", 0)}},
  };
  // Hand counts: labels right on c2, c3, c4, c6; complete golden set in the
  // top five with the right label on c3 (NEI) and c4. Evidence terms over
  // c2, c4, c5, c6: 10 scored sentences, 3 hits, 6 golden sentences.
  f.la = 4.0 / 6.0;
  f.fever = 2.0 / 6.0;
  f.gfever = 2.0 / 6.0;
  f.precision = 3.0 / 10.0;
  f.recall = 3.0 / 6.0;
  f.f1 = 2.0 * f.precision * f.recall / (f.precision + f.recall);
  return f;
}

bool metrics_fixture_exact() {
  const MetricsFixture f = metrics_fixture();
  const EvidencePrf prf = evidence_prf(f.preds, f.gold);
  return label_accuracy(f.preds, f.gold) == f.la && fever_score(f.preds, f.gold) == f.fever &&
         gfever_score(f.preds, f.gold) == f.gfever && prf.precision == f.precision &&
         prf.recall == f.recall && prf.f1 == f.f1;
}

}  // namespace kgat::checks
