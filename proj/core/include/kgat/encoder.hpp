#ifndef KGAT_ENCODER_HPP_
#define KGAT_ENCODER_HPP_

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kgat/autodiff.hpp"
#include "kgat/random.hpp"
#include "kgat/tensor.hpp"

namespace kgat {

inline constexpr std::size_t kDefaultMaxLen = 130;

// [CLS] claim [SEP] title evidence [SEP].
// Claim positions are 1..claim_len (the claim's [SEP] included), evidence
// positions claim_len+1 .. claim_len+evidence_len (title and closing [SEP]
// included).
struct NodeSequence {
  std::vector<int> ids;
  Mask mask;  // 1 = real token; PAD positions 0. Position 0 is real.
  std::size_t claim_len = 0;
  std::size_t evidence_len = 0;

  std::size_t length() const { return ids.size(); }
  std::size_t claim_begin() const { return 1; }
  std::size_t evidence_begin() const { return 1 + claim_len; }
  // Mask over positions 1..length-1 (what attention and propagation see).
  Mask content_mask() const;
  Mask claim_mask() const;
  Mask evidence_mask() const;
  bool has_real_evidence() const;
};

// Builds the node sequence, cutting evidence tokens from the end (the closing
// [SEP] is kept) until the total fits in max_len. Throws DataError if the
// claim alone does not fit.
NodeSequence build_sequence(std::span<const int> claim_ids, std::span<const int> title_ids,
                            std::span<const int> sentence_ids,
                            std::size_t max_len = kDefaultMaxLen);

struct TokenStates {
  Tensor h;  // [length x d], row 0 = z
  Mask mask;

  std::span<const double> z() const { return h.row(0); }
};

// Identifies a graph node for encoders keyed by position.
struct NodeRef {
  std::string claim_id;
  std::size_t index = 0;
};

class NodeEncoder {
 public:
  virtual ~NodeEncoder() = default;
  virtual std::size_t dim() const = 0;
  // Records the node's token states [length x d] on the tape.
  virtual Var encode(Tape& tape, ParameterSet& params, const NodeSequence& seq,
                     const NodeRef& ref) const = 0;
};

// Trainable reference encoder: embedding table [V x d] followed by one
// affine map d -> d applied per token. Row 0 is overwritten with the mean of
// the real content rows, since the per-token map has no mixing that could
// make a [CLS] state informative.
class EmbeddingEncoder final : public NodeEncoder {
 public:
  EmbeddingEncoder() = default;
  // Registers "<prefix>.embedding", "<prefix>.proj.weight", "<prefix>.proj.bias".
  EmbeddingEncoder(ParameterSet& params, const std::string& prefix, std::size_t vocab_size,
                   std::size_t dim, Rng& rng);
  // Binds to parameters that already exist (checkpoint load).
  static EmbeddingEncoder bind(const ParameterSet& params, const std::string& prefix);

  std::size_t dim() const override { return dim_; }
  std::size_t vocab_size() const { return vocab_size_; }

  Var encode(Tape& tape, ParameterSet& params, const NodeSequence& seq,
             const NodeRef& ref) const override;
  // Per-token projection only, no sentence row: [ids.size() x d].
  Var encode_tokens(Tape& tape, ParameterSet& params, std::span<const int> ids) const;

 private:
  std::size_t embedding_ = 0;
  AffineMap proj_;
  std::size_t vocab_size_ = 0;
  std::size_t dim_ = 0;
};

// Frozen, precomputed states keyed by (claim_id, node index).
//
// Text container:
//   KGATSTATES 1 <d>
//   node <claim_id> <index> <rows> <cols>
//   <cols values>          (repeated rows times)
class ExternalStateEncoder final : public NodeEncoder {
 public:
  explicit ExternalStateEncoder(std::size_t dim) : dim_(dim) {}

  // Throws DataError on a dimension mismatch with the configured d.
  static ExternalStateEncoder load(const std::string& path, std::size_t expected_dim);
  void save(const std::string& path) const;
  void insert(const std::string& claim_id, std::size_t index, Tensor states);

  std::size_t dim() const override { return dim_; }
  const Tensor& states(const std::string& claim_id, std::size_t index) const;

  // Throws DataError naming (claim_id, index) for an absent node, or on a
  // row-count mismatch against the sequence.
  Var encode(Tape& tape, ParameterSet& params, const NodeSequence& seq,
             const NodeRef& ref) const override;

 private:
  std::size_t dim_;
  std::map<std::pair<std::string, std::size_t>, Tensor> states_;
};

// Evaluates an encoder outside of training.
TokenStates encode_states(const NodeEncoder& encoder, ParameterSet& params,
                          const NodeSequence& seq, const NodeRef& ref = {});

}  // namespace kgat

#endif  // KGAT_ENCODER_HPP_
