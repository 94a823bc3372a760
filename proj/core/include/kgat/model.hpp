#ifndef KGAT_MODEL_HPP_
#define KGAT_MODEL_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgat/autodiff.hpp"
#include "kgat/dataset.hpp"
#include "kgat/encoder.hpp"
#include "kgat/kernels.hpp"
#include "kgat/tensor.hpp"
#include "kgat/vocabulary.hpp"

namespace kgat {

enum class AttentionKind : std::uint8_t { kKernel, kDot };

// Which attention computation the edges (token level) and the readout
// (node selection) use.
//   full = (kernel, kernel)   node = (dot, kernel)
//   edge = (kernel, dot)      gat  = (dot, dot)
struct AblationMode {
  AttentionKind edge = AttentionKind::kKernel;
  AttentionKind node = AttentionKind::kKernel;

  static AblationMode full() { return {AttentionKind::kKernel, AttentionKind::kKernel}; }
  static AblationMode node_only() { return {AttentionKind::kDot, AttentionKind::kKernel}; }
  static AblationMode edge_only() { return {AttentionKind::kKernel, AttentionKind::kDot}; }
  static AblationMode gat() { return {AttentionKind::kDot, AttentionKind::kDot}; }

  // "full", "node", "edge", "gat".
  std::string_view name() const;
  static AblationMode parse(std::string_view name);
  static std::array<AblationMode, 4> all() { return {full(), node_only(), edge_only(), gat()}; }

  bool operator==(const AblationMode&) const = default;
};

struct ModelConfig {
  std::size_t dim = 32;
  std::size_t kernel_count = kDefaultKernelCount;
  std::size_t evidence_per_claim = kDefaultEvidencePerClaim;
  std::size_t max_len = kDefaultMaxLen;
  std::size_t vocab_size = 0;

  bool operator==(const ModelConfig&) const = default;
};

struct GraphNode {
  NodeSequence sequence;
  TokenStates states;
  SentenceKey key;
  bool valid = false;
};

// Fully-connected graph over claim-evidence nodes. PAD evidence nodes are
// kept in place but are invalid: they have no edges and no attention.
struct EvidenceGraph {
  std::vector<GraphNode> nodes;

  std::size_t size() const { return nodes.size(); }
  Mask validity() const;
  std::vector<std::size_t> valid_nodes() const;
  // Ordered pairs (q, p) of valid nodes, self-edges included.
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;
};

struct EdgeTrace {
  std::size_t from = 0;  // q
  std::size_t to = 0;    // p
  // One weight per position of q's sequence; [CLS] and PAD slots are 0.
  std::vector<double> alpha;
};

struct AttentionTrace {
  std::string claim_id;
  Mask valid;
  std::vector<std::vector<int>> node_tokens;
  std::vector<SentenceKey> node_keys;
  std::vector<EdgeTrace> edges;
  // beta[p][q]; empty for invalid p, zero for invalid q.
  std::vector<std::vector<double>> beta;
  // P(n^p | G); zero for invalid nodes.
  std::vector<double> selection;
  // P(y | n^p, G); empty for invalid nodes.
  std::vector<std::vector<double>> node_label;

  const EdgeTrace* edge(std::size_t from, std::size_t to) const;
};

struct ForwardResult {
  std::array<double, kLabelCount> probs{};
  double loss = 0.0;
  AttentionTrace trace;

  Label predicted() const;
};

// Weights of one linear layer as tape variables.
struct LinearVars {
  Var weight;
  Var bias;
};

struct PerceptronVars {
  LinearVars hidden;
  LinearVars output;
};

// The building blocks of the forward pass, exposed for testing and reuse.
namespace graph_ops {

// Attention of node p over q's content positions 1..len-1, returned as a
// column [len-1 x 1]. Kernel: softmax of attn(kernel_pool(cos(H^q, H^p))).
// Dot: softmax of H^q_i . z^p / sqrt(d). Masked positions are exactly 0.
Var token_attention(Tape& t, Var hq, const NodeSequence& q, Var hp, const NodeSequence& p,
                    const KernelBank& bank, const LinearVars& attn, AttentionKind kind);

// zhat = sum_i alpha_i H^q_i over content positions -> [1 x d].
Var propagate(Tape& t, Var hq, Var alpha);

// beta over the given neighbours (all valid q, self included) -> [n x 1].
Var sentence_attention(Tape& t, Var zp, std::span<const Var> zhat, const PerceptronVars& mlp);

// v^p = (sum_q beta_q zhat_q) concat z^p -> [1 x 2d].
Var update_node(Tape& t, Var beta, std::span<const Var> zhat, Var zp);

// softmax(label(v^p)) -> [1 x 3].
Var per_node_distribution(Tape& t, Var v, const LinearVars& label);

// Mean over real claim rows of kernel_pool(cos(claim rows, evidence rows))
// -> [1 x K].
Var node_selection_features(Tape& t, Var hp, const NodeSequence& p, const KernelBank& bank);

// Selection logits for one node -> [1 x 1]. Kernel: select(phi). Dot:
// mean(claim rows) . z^p / sqrt(d).
Var selection_logit(Tape& t, Var hp, const NodeSequence& p, const KernelBank& bank,
                    const LinearVars& select, AttentionKind kind);

// P(n^p | G) over the stacked logits -> [n x 1].
Var selection_distribution(Tape& t, std::span<const Var> logits);

// P(y | G) = sum_p P(y | n^p, G) P(n^p | G) -> [1 x 3].
Var joint_distribution(Tape& t, Var per_node, Var selection);

Var loss(Tape& t, Var joint, Label gold);

}  // namespace graph_ops

class KgatModel {
 public:
  // Fresh model with weights drawn from `seed`.
  KgatModel(ModelConfig config, Vocabulary vocab, std::uint64_t seed);
  // Model around existing parameters (checkpoint load). Throws DataError if
  // a required parameter is missing or misshaped.
  KgatModel(ModelConfig config, Vocabulary vocab, KernelBank bank, ParameterSet params);

  const ModelConfig& config() const { return config_; }
  const Vocabulary& vocabulary() const { return vocab_; }
  const KernelBank& bank() const { return bank_; }
  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }

  // Replaces the trainable embedding encoder with frozen external states.
  void use_external_states(std::shared_ptr<const ExternalStateEncoder> states);
  const NodeEncoder& encoder() const;

  EvidenceGraph build_graph(const ClaimInstance& instance);

  ForwardResult forward(const ClaimInstance& instance, AblationMode mode);
  // Forward plus backward; adds scale * dL/dtheta into the parameter grads.
  ForwardResult forward_backward(const ClaimInstance& instance, AblationMode mode,
                                 double scale = 1.0);

 private:
  ForwardResult run(const ClaimInstance& instance, AblationMode mode, bool backward,
                    double scale);
  std::vector<NodeSequence> sequences(const ClaimInstance& instance) const;
  void bind_layers();

  ModelConfig config_;
  Vocabulary vocab_;
  KernelBank bank_;
  ParameterSet params_;
  EmbeddingEncoder embedding_;
  std::shared_ptr<const ExternalStateEncoder> external_;
  AffineMap attn_;
  TwoLayerPerceptron sentence_mlp_;
  AffineMap label_;
  AffineMap select_;
};

}  // namespace kgat

#endif  // KGAT_MODEL_HPP_
