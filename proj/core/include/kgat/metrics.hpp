#ifndef KGAT_METRICS_HPP_
#define KGAT_METRICS_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "kgat/dataset.hpp"

namespace kgat {

struct Prediction {
  std::string claim_id;
  Label label = Label::kNotEnoughInfo;
  // Predicted evidence in rank order; only the first k count.
  std::vector<SentenceKey> evidence;
};

struct GoldClaim {
  std::string claim_id;
  Label label = Label::kNotEnoughInfo;
  std::vector<std::vector<SentenceKey>> golden_sets;

  static GoldClaim from(const ClaimInstance& instance);
};

inline constexpr std::size_t kFeverEvidenceLimit = 5;

// Fraction of gold claims whose prediction carries the same label. Every
// gold claim needs a prediction with its claim_id (DataError otherwise);
// an empty gold set is an error.
double label_accuracy(std::span<const Prediction> predictions, std::span<const GoldClaim> gold);

// A claim counts iff its label is right and, for verifiable claims, some
// golden set lies entirely within the first five predicted sentences.
double fever_score(std::span<const Prediction> predictions, std::span<const GoldClaim> gold);

// Same rule, applied to a run whose candidates had golden evidence supplied.
double gfever_score(std::span<const Prediction> golden_run_predictions,
                    std::span<const GoldClaim> gold);

struct EvidencePrf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Micro-averaged over claims with a non-empty golden union, using the first
// k predicted sentences. Throws DataError("no verifiable claims") when no
// claim has golden evidence.
EvidencePrf evidence_prf(std::span<const Prediction> predictions, std::span<const GoldClaim> gold,
                         std::size_t k = kFeverEvidenceLimit);

}  // namespace kgat

#endif  // KGAT_METRICS_HPP_
