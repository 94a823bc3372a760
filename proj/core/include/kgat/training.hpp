#ifndef KGAT_TRAINING_HPP_
#define KGAT_TRAINING_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "kgat/checkpoint.hpp"
#include "kgat/config.hpp"
#include "kgat/dataset.hpp"
#include "kgat/gradcheck.hpp"
#include "kgat/metrics.hpp"
#include "kgat/model.hpp"

namespace kgat {

struct StepRecord {
  std::size_t step = 0;
  double lr = 0.0;
  double loss = 0.0;  // mean over the instances of the step
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  std::uint64_t shuffle_seed = 0;
  double train_loss = 0.0;
  double dev_la = 0.0;
  double dev_fever = 0.0;
};

struct TrainHistory {
  std::uint64_t seed = 0;
  std::string mode;
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 0 = initial weights
  double best_dev_la = 0.0;

  std::string to_json() const;
};

struct TrainResult {
  Checkpoint checkpoint;
  TrainHistory history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Mini-batch training with gradient accumulation and the warmup schedule.
// The returned checkpoint holds the weights with the best dev LA seen
// (initial weights included). Throws NumericError on a non-finite loss.
TrainResult train(const std::vector<ClaimInstance>& train_set,
                  const std::vector<ClaimInstance>& dev_set, const Vocabulary& vocab,
                  const TrainConfig& config, AblationMode mode, std::uint64_t seed,
                  const EpochCallback& on_epoch = {});

// Sum over `batch` of scale * grad(loss); returns the summed loss.
double accumulate_gradients(KgatModel& model, std::span<const ClaimInstance> batch,
                            AblationMode mode, double scale);

struct ClaimEvaluation {
  std::string claim_id;
  Label gold = Label::kNotEnoughInfo;
  Label predicted = Label::kNotEnoughInfo;
  std::array<double, kLabelCount> probs{};
  std::vector<double> selection;
  // Valid candidates ordered by selection weight, at most five.
  std::vector<SentenceKey> top_evidence;
  bool multi_evidence = false;
};

struct EvaluationSummary {
  std::size_t claims = 0;
  double label_accuracy = 0.0;
  double fever = 0.0;
  EvidencePrf evidence;
  bool has_evidence_metrics = false;
};

struct EvaluationResult {
  std::vector<ClaimEvaluation> claims;
  std::vector<AttentionTrace> traces;
  EvaluationSummary summary;

  std::vector<Prediction> predictions() const;
};

struct EvaluateOptions {
  std::size_t threads = 1;
  bool keep_traces = true;
};

EvaluationResult evaluate(KgatModel& model, const std::vector<ClaimInstance>& dataset,
                          AblationMode mode, const EvaluateOptions& options = {});

// Finite-difference check of every model parameter on one instance.
GradcheckReport gradcheck_model(KgatModel& model, const ClaimInstance& instance,
                                AblationMode mode, const GradcheckOptions& options = {});

// Subset of claims with a golden set of two or more sentences.
std::vector<ClaimInstance> multi_evidence_subset(const std::vector<ClaimInstance>& dataset);

}  // namespace kgat

#endif  // KGAT_TRAINING_HPP_
