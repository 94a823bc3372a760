#ifndef KGAT_ANALYSIS_HPP_
#define KGAT_ANALYSIS_HPP_

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "kgat/metrics.hpp"
#include "kgat/model.hpp"
#include "kgat/vocabulary.hpp"

namespace kgat {

// Entropy in nats of a normalized distribution (0 ln 0 = 0). Throws
// NumericError when the mass is off from 1 by more than 1e-6.
double attention_entropy(std::span<const double> distribution);

struct EntropyReport {
  std::size_t claims = 0;
  // Node attention = the selection distribution P(n^p | G).
  double node_entropy = 0.0;
  double node_uniform = 0.0;
  // Sentence-level beta per target node.
  double sentence_entropy = 0.0;
  double sentence_uniform = 0.0;
  // Token-level alpha per edge.
  double edge_entropy = 0.0;
  double edge_uniform = 0.0;
};

// Per-claim means first, then averaged over claims. Uniform baselines use
// each distribution's actual support size.
EntropyReport entropy_report(std::span<const AttentionTrace> traces);

// Ranks each claim's candidates by P(n^p | G) (ties keep candidate order)
// and returns covered golden sentences / all golden sentences over claims
// with golden evidence. Traces and gold are matched by claim_id.
double selection_recall_at_k(std::span<const AttentionTrace> traces,
                             std::span<const GoldClaim> gold, std::size_t k);

// Counts of per-claim max P(n^p | G) in ten equal bins over [0, 1]; the
// last bin is closed.
std::array<std::size_t, 10> max_selection_weight_histogram(std::span<const AttentionTrace> traces);

// Every alpha weight over real tokens, sorted descending, pooled across
// traces (the input to top-x% token plots).
std::vector<double> sorted_token_weights(std::span<const AttentionTrace> traces);

struct CaseToken {
  std::size_t position = 0;
  std::string token;
  double weight = 0.0;
};

struct CaseExport {
  std::string claim_id;
  std::size_t from = 0;  // q, 0-based
  std::size_t to = 0;    // p, 0-based
  std::vector<CaseToken> tokens;
  std::vector<double> beta_to;    // beta[to][*]
  std::vector<double> selection;  // P(n^p | G)
};

// Token weights of edge from -> to, in sequence order, PAD and [CLS]
// omitted. Throws DataError if the edge is absent.
CaseExport export_case_attention(const AttentionTrace& trace, const Vocabulary& vocab,
                                 std::size_t from, std::size_t to);
// Aligned text table: position, token, weight, and a bar.
std::string format_case_table(const CaseExport& c);

}  // namespace kgat

#endif  // KGAT_ANALYSIS_HPP_
