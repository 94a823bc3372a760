#include "kgat/metrics.hpp"

#include <algorithm>
#include <unordered_map>

#include "kgat/errors.hpp"

namespace kgat {

GoldClaim GoldClaim::from(const ClaimInstance& instance) {
  return {instance.claim_id, instance.label, instance.golden_sets};
}

namespace {

std::unordered_map<std::string, const Prediction*> index_predictions(
    std::span<const Prediction> predictions) {
  std::unordered_map<std::string, const Prediction*> out;
  for (const auto& p : predictions) {
    if (!out.emplace(p.claim_id, &p).second) {
      throw DataError("duplicate prediction for claim " + p.claim_id);
    }
  }
  return out;
}

const Prediction& lookup(const std::unordered_map<std::string, const Prediction*>& index,
                         const std::string& claim_id) {
  auto it = index.find(claim_id);
  if (it == index.end()) throw DataError("missing prediction for claim " + claim_id);
  return *it->second;
}

bool evidence_complete(const Prediction& p, const GoldClaim& g) {
  const std::size_t n = std::min(p.evidence.size(), kFeverEvidenceLimit);
  const auto begin = p.evidence.begin();
  const auto end = begin + static_cast<std::ptrdiff_t>(n);
  return std::any_of(g.golden_sets.begin(), g.golden_sets.end(), [&](const auto& set) {
    return std::all_of(set.begin(), set.end(),
                       [&](const SentenceKey& k) { return std::find(begin, end, k) != end; });
  });
}

}  // namespace

double label_accuracy(std::span<const Prediction> predictions, std::span<const GoldClaim> gold) {
  if (gold.empty()) throw DataError("label_accuracy: empty gold set");
  const auto index = index_predictions(predictions);
  std::size_t correct = 0;
  for (const auto& g : gold) {
    if (lookup(index, g.claim_id).label == g.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(gold.size());
}

double fever_score(std::span<const Prediction> predictions, std::span<const GoldClaim> gold) {
  if (gold.empty()) throw DataError("fever_score: empty gold set");
  const auto index = index_predictions(predictions);
  std::size_t correct = 0;
  for (const auto& g : gold) {
    const Prediction& p = lookup(index, g.claim_id);
    if (p.label != g.label) continue;
    if (g.label == Label::kNotEnoughInfo || evidence_complete(p, g)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(gold.size());
}

double gfever_score(std::span<const Prediction> golden_run_predictions,
                    std::span<const GoldClaim> gold) {
  return fever_score(golden_run_predictions, gold);
}

EvidencePrf evidence_prf(std::span<const Prediction> predictions, std::span<const GoldClaim> gold,
                         std::size_t k) {
  const auto index = index_predictions(predictions);
  std::size_t hits = 0, predicted = 0, relevant = 0, claims = 0;
  for (const auto& g : gold) {
    std::vector<SentenceKey> golden;
    for (const auto& set : g.golden_sets) {
      for (const auto& key : set) {
        if (std::find(golden.begin(), golden.end(), key) == golden.end()) golden.push_back(key);
      }
    }
    if (golden.empty()) continue;
    ++claims;
    const Prediction& p = lookup(index, g.claim_id);
    const std::size_t n = std::min(k, p.evidence.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (std::find(golden.begin(), golden.end(), p.evidence[i]) != golden.end()) ++hits;
    }
    predicted += n;
    relevant += golden.size();
  }
  if (claims == 0) throw DataError("no verifiable claims");
  EvidencePrf out;
  out.precision = predicted ? static_cast<double>(hits) / static_cast<double>(predicted) : 0.0;
  out.recall = static_cast<double>(hits) / static_cast<double>(relevant);
  const double sum = out.precision + out.recall;
  out.f1 = sum > 0.0 ? 2.0 * out.precision * out.recall / sum : 0.0;
  return out;
}

}  // namespace kgat
