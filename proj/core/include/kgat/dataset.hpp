#ifndef KGAT_DATASET_HPP_
#define KGAT_DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kgat/vocabulary.hpp"

namespace kgat {

enum class Label : int { kSupports = 0, kRefutes = 1, kNotEnoughInfo = 2 };
inline constexpr std::size_t kLabelCount = 3;
inline constexpr std::size_t kDefaultEvidencePerClaim = 5;

// "SUPPORTS", "REFUTES", "NOT ENOUGH INFO".
std::string_view label_name(Label label);
// Throws DataError on anything else.
Label parse_label(std::string_view name);

// (doc_id, sent_idx)
using SentenceKey = std::pair<std::string, int>;

struct EvidenceSentence {
  std::string doc_id;
  int sent_idx = 0;
  std::vector<std::string> title_tokens;
  std::vector<std::string> sentence_tokens;
  std::optional<double> retrieval_score;
  bool is_pad = false;

  SentenceKey key() const { return {doc_id, sent_idx}; }
  // Score used for ordering; missing scores sort last, PAD below everything.
  double sort_score() const;
  static EvidenceSentence pad();
};

// One record of a dataset file: all candidates, before truncation.
struct ClaimRecord {
  std::string claim_id;
  std::vector<std::string> claim_tokens;
  Label label = Label::kNotEnoughInfo;
  std::vector<EvidenceSentence> candidates;
  std::vector<std::vector<SentenceKey>> golden_sets;
};

// A record prepared for the model: exactly evidence_per_claim candidates.
struct ClaimInstance {
  std::string claim_id;
  std::vector<std::string> claim_tokens;
  Label label = Label::kNotEnoughInfo;
  std::vector<EvidenceSentence> candidates;
  std::vector<std::vector<SentenceKey>> golden_sets;

  std::size_t valid_count() const;
  // Union of all golden sets, deduplicated, in first-seen order.
  std::vector<SentenceKey> golden_union() const;
  bool is_multi_evidence() const;
};

struct PrepareOptions {
  std::size_t evidence_per_claim = kDefaultEvidencePerClaim;
  // Put golden sentences first (training graphs and the golden-evidence
  // evaluation condition), then fill with the best-scored remainder.
  bool force_golden = false;
};

// Orders candidates by descending retrieval score then (doc_id, sent_idx).
void sort_candidates(std::vector<EvidenceSentence>& candidates);

ClaimInstance prepare(const ClaimRecord& record, const PrepareOptions& options = {});
std::vector<ClaimInstance> prepare(const std::vector<ClaimRecord>& records,
                                   const PrepareOptions& options = {});

// Line-delimited JSON records. Validates every record; DataError messages
// carry the 1-based line number.
std::vector<ClaimRecord> read_records(const std::string& path);
ClaimRecord parse_record(std::string_view line, std::size_t line_number);
std::string serialize_record(const ClaimRecord& record);
void write_records(const std::string& path, const std::vector<ClaimRecord>& records);

std::vector<ClaimInstance> load_dataset(const std::string& path,
                                        const PrepareOptions& options = {});

// Throws DataError when a record breaks a schema invariant.
void validate(const ClaimRecord& record);

}  // namespace kgat

#endif  // KGAT_DATASET_HPP_
