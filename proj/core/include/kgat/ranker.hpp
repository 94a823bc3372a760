#ifndef KGAT_RANKER_HPP_
#define KGAT_RANKER_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kgat/autodiff.hpp"
#include "kgat/dataset.hpp"
#include "kgat/encoder.hpp"
#include "kgat/kernels.hpp"
#include "kgat/optim.hpp"
#include "kgat/tensor.hpp"
#include "kgat/vocabulary.hpp"

namespace kgat {

inline constexpr int kRankerVersion = 1;

// max(0, margin - pos + neg)
double pairwise_loss(double s_pos, double s_neg, double margin = 1.0);

// Kernel sentence scorer: an affine map K -> 1 over the claim-averaged
// kernel features of cos(claim states, sentence states).
class RankerModel {
 public:
  RankerModel(std::size_t dim, Vocabulary vocab, KernelBank bank, std::uint64_t seed);
  RankerModel(Vocabulary vocab, KernelBank bank, ParameterSet params);

  double score(const std::vector<std::string>& claim_tokens, const EvidenceSentence& sentence);
  Var score(Tape& tape, std::span<const int> claim_ids, std::span<const int> sentence_ids);

  std::vector<int> sentence_ids(const EvidenceSentence& sentence) const;

  const Vocabulary& vocabulary() const { return vocab_; }
  const KernelBank& bank() const { return bank_; }
  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }
  std::size_t dim() const { return encoder_.dim(); }

 private:
  Vocabulary vocab_;
  KernelBank bank_;
  ParameterSet params_;
  EmbeddingEncoder encoder_;
  AffineMap scorer_;
};

struct ScoredCandidate {
  EvidenceSentence sentence;
  double score = 0.0;
};

// Top-k by descending score; ties fall back to (doc_id, sent_idx).
std::vector<ScoredCandidate> rank(const std::vector<std::string>& claim_tokens,
                                  const std::vector<EvidenceSentence>& candidates,
                                  RankerModel& model, std::size_t k = 5);

struct RankerTrainOptions {
  std::size_t epochs = 3;
  double lr = 1e-3;
  double margin = 1.0;
  std::uint64_t seed = 1;
};

struct RankerHistory {
  std::vector<double> epoch_loss;
};

// One (golden, uniformly drawn non-golden) pair per golden sentence per
// epoch, one Adam step per pair.
RankerHistory train_ranker(RankerModel& model, const std::vector<ClaimRecord>& records,
                           const RankerTrainOptions& options);

std::string serialize_ranker(const RankerModel& model);
RankerModel parse_ranker(const std::string& text);
void save_ranker(const RankerModel& model, const std::string& path);
RankerModel load_ranker(const std::string& path);

}  // namespace kgat

#endif  // KGAT_RANKER_HPP_
