#include "kgat/model.hpp"

#include <algorithm>
#include <cmath>

#include "kgat/errors.hpp"
#include "kgat/numerics.hpp"
#include "kgat/random.hpp"

namespace kgat {

std::string_view AblationMode::name() const {
  if (edge == AttentionKind::kKernel) return node == AttentionKind::kKernel ? "full" : "edge";
  return node == AttentionKind::kKernel ? "node" : "gat";
}

AblationMode AblationMode::parse(std::string_view name) {
  if (name == "full") return full();
  if (name == "node") return node_only();
  if (name == "edge") return edge_only();
  if (name == "gat") return gat();
  throw UsageError("unknown mode '" + std::string(name) + "' (expected full|node|edge|gat)");
}

Mask EvidenceGraph::validity() const {
  Mask m(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) m[i] = nodes[i].valid ? 1 : 0;
  return m;
}

std::vector<std::size_t> EvidenceGraph::valid_nodes() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].valid) out.push_back(i);
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> EvidenceGraph::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const auto valid = valid_nodes();
  for (std::size_t q : valid) {
    for (std::size_t p : valid) out.emplace_back(q, p);
  }
  return out;
}

const EdgeTrace* AttentionTrace::edge(std::size_t from, std::size_t to) const {
  for (const auto& e : edges) {
    if (e.from == from && e.to == to) return &e;
  }
  return nullptr;
}

Label ForwardResult::predicted() const {
  const auto it = std::max_element(probs.begin(), probs.end());
  return static_cast<Label>(std::distance(probs.begin(), it));
}

namespace graph_ops {
namespace {

double inv_sqrt_dim(const Tensor& h) { return 1.0 / std::sqrt(static_cast<double>(h.cols())); }

Var content_rows(Tape& t, Var h, const NodeSequence& seq) {
  return ops::slice_rows(t, h, 1, seq.length() - 1);
}

}  // namespace

Var token_attention(Tape& t, Var hq, const NodeSequence& q, Var hp, const NodeSequence& p,
                    const KernelBank& bank, const LinearVars& attn, AttentionKind kind) {
  const Mask q_mask = q.content_mask();
  Var q_rows = content_rows(t, hq, q);
  Var logits;
  if (kind == AttentionKind::kKernel) {
    Var p_rows = content_rows(t, hp, p);
    Var m = ops::cosine_matrix(t, q_rows, p_rows);
    Var features = ops::kernel_pool(t, m, q_mask, p.content_mask(), bank);
    logits = ops::affine(t, features, attn.weight, attn.bias);
  } else {
    Var zp = ops::slice_rows(t, hp, 0, 1);
    logits = ops::scale(t, ops::matmul(t, q_rows, zp, false, true), inv_sqrt_dim(t.value(hp)));
  }
  return ops::masked_softmax(t, logits, q_mask);
}

Var propagate(Tape& t, Var hq, Var alpha) {
  const Tensor& h = t.value(hq);
  const std::size_t n = t.value(alpha).size();
  Var rows = h.rows() == n ? hq : ops::slice_rows(t, hq, 1, n);
  return ops::matmul(t, alpha, rows, true, false);
}

Var sentence_attention(Tape& t, Var zp, std::span<const Var> zhat, const PerceptronVars& mlp) {
  std::vector<Var> inputs;
  inputs.reserve(zhat.size());
  for (Var z : zhat) inputs.push_back(ops::concat_cols(t, zp, z));
  Var x = ops::stack_rows(t, inputs);
  Var hidden = ops::relu(t, ops::affine(t, x, mlp.hidden.weight, mlp.hidden.bias));
  Var scores = ops::affine(t, hidden, mlp.output.weight, mlp.output.bias);
  return ops::softmax(t, scores);
}

Var update_node(Tape& t, Var beta, std::span<const Var> zhat, Var zp) {
  Var stacked = ops::stack_rows(t, zhat);
  Var combined = ops::matmul(t, beta, stacked, true, false);
  return ops::concat_cols(t, combined, zp);
}

Var per_node_distribution(Tape& t, Var v, const LinearVars& label) {
  return ops::softmax(t, ops::affine(t, v, label.weight, label.bias));
}

Var node_selection_features(Tape& t, Var hp, const NodeSequence& p, const KernelBank& bank) {
  if (!p.has_real_evidence()) throw UsageError("node_selection_features: node has no evidence");
  const Mask claim = p.claim_mask();
  Var claim_rows = ops::slice_rows(t, hp, p.claim_begin(), p.claim_len);
  Var evidence_rows = ops::slice_rows(t, hp, p.evidence_begin(), p.evidence_len);
  Var m = ops::cosine_matrix(t, claim_rows, evidence_rows);
  Var features = ops::kernel_pool(t, m, claim, p.evidence_mask(), bank);
  return ops::masked_mean_rows(t, features, claim);
}

Var selection_logit(Tape& t, Var hp, const NodeSequence& p, const KernelBank& bank,
                    const LinearVars& select, AttentionKind kind) {
  if (kind == AttentionKind::kKernel) {
    Var phi = node_selection_features(t, hp, p, bank);
    return ops::affine(t, phi, select.weight, select.bias);
  }
  Var claim_rows = ops::slice_rows(t, hp, p.claim_begin(), p.claim_len);
  Var claim_mean = ops::masked_mean_rows(t, claim_rows, p.claim_mask());
  Var zp = ops::slice_rows(t, hp, 0, 1);
  return ops::scale(t, ops::matmul(t, claim_mean, zp, false, true), inv_sqrt_dim(t.value(hp)));
}

Var selection_distribution(Tape& t, std::span<const Var> logits) {
  if (logits.empty()) throw NumericError("selection_distribution: no valid nodes");
  return ops::softmax(t, ops::stack_rows(t, logits));
}

Var joint_distribution(Tape& t, Var per_node, Var selection) {
  return ops::matmul(t, selection, per_node, true, false);
}

Var loss(Tape& t, Var joint, Label gold) {
  return ops::neg_log_prob(t, joint, static_cast<std::size_t>(gold));
}

}  // namespace graph_ops

namespace {

void init_uniform(Tensor& t, double limit, Rng& rng) {
  for (double& v : t.values()) v = rng.uniform(-limit, limit);
}

void init_xavier(ParameterSet& params, const AffineMap& m, Rng& rng) {
  Tensor& w = params[m.weight].value;
  init_uniform(w, std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols())), rng);
}

void check_shape(const ParameterSet& params, std::size_t index, std::size_t rows,
                 std::size_t cols) {
  const Tensor& t = params[index].value;
  if (t.rank() != 2 || t.rows() != rows || t.cols() != cols) {
    throw DataError("parameter " + params[index].name + " has shape " + t.shape_string() +
                    ", expected [" + std::to_string(rows) + " x " + std::to_string(cols) + "]");
  }
}

void check_bias(const ParameterSet& params, std::size_t index, std::size_t n) {
  if (params[index].value.size() != n) {
    throw DataError("parameter " + params[index].name + " has " +
                    std::to_string(params[index].value.size()) + " values, expected " +
                    std::to_string(n));
  }
}

AffineMap bind_affine(const ParameterSet& params, const std::string& name, std::size_t in,
                      std::size_t out) {
  AffineMap m{params.index_of(name + ".weight"), params.index_of(name + ".bias")};
  check_shape(params, m.weight, out, in);
  check_bias(params, m.bias, out);
  return m;
}

LinearVars linear_vars(Tape& t, ParameterSet& params, const AffineMap& m) {
  return {t.param(params[m.weight]), t.param(params[m.bias])};
}

}  // namespace

KgatModel::KgatModel(ModelConfig config, Vocabulary vocab, std::uint64_t seed)
    : config_(config), vocab_(std::move(vocab)), bank_(default_bank(config.kernel_count)) {
  if (config_.vocab_size == 0) config_.vocab_size = vocab_.size();
  if (config_.vocab_size != vocab_.size()) throw UsageError("vocab_size does not match vocabulary");
  if (config_.dim == 0) throw UsageError("dim must be positive");
  Rng rng(seed);
  const std::size_t d = config_.dim, K = config_.kernel_count;
  embedding_ = EmbeddingEncoder(params_, "encoder", config_.vocab_size, d, rng);
  attn_ = AffineMap::create(params_, "edge.token_attention", K, 1);
  sentence_mlp_ = TwoLayerPerceptron::create(params_, "edge.sentence_mlp", 2 * d, d, 1);
  label_ = AffineMap::create(params_, "edge.label", 2 * d, kLabelCount);
  select_ = AffineMap::create(params_, "node.selection", K, 1);

  // Kernel features sit near ln(1e-10) for unmatched kernels; small weights
  // keep the first softmaxes away from saturation.
  init_uniform(params_[attn_.weight].value, 0.01, rng);
  init_uniform(params_[select_.weight].value, 0.01, rng);
  init_xavier(params_, sentence_mlp_.hidden, rng);
  init_xavier(params_, sentence_mlp_.output, rng);
  init_xavier(params_, label_, rng);
}

KgatModel::KgatModel(ModelConfig config, Vocabulary vocab, KernelBank bank, ParameterSet params)
    : config_(config), vocab_(std::move(vocab)), bank_(std::move(bank)),
      params_(std::move(params)) {
  if (bank_.size() != config_.kernel_count) throw DataError("config mismatch: kernel count");
  if (config_.vocab_size != vocab_.size()) throw DataError("config mismatch: vocabulary size");
  bind_layers();
}

void KgatModel::bind_layers() {
  const std::size_t d = config_.dim, K = config_.kernel_count;
  embedding_ = EmbeddingEncoder::bind(params_, "encoder");
  if (embedding_.dim() != d || embedding_.vocab_size() != config_.vocab_size) {
    throw DataError("config mismatch: encoder.embedding shape");
  }
  attn_ = bind_affine(params_, "edge.token_attention", K, 1);
  sentence_mlp_.hidden = bind_affine(params_, "edge.sentence_mlp.hidden", 2 * d, d);
  sentence_mlp_.output = bind_affine(params_, "edge.sentence_mlp.output", d, 1);
  label_ = bind_affine(params_, "edge.label", 2 * d, kLabelCount);
  select_ = bind_affine(params_, "node.selection", K, 1);
}

void KgatModel::use_external_states(std::shared_ptr<const ExternalStateEncoder> states) {
  if (states && states->dim() != config_.dim) {
    throw DataError("external states width " + std::to_string(states->dim()) +
                    " does not match d=" + std::to_string(config_.dim));
  }
  external_ = std::move(states);
}

const NodeEncoder& KgatModel::encoder() const {
  if (external_) return *external_;
  return embedding_;
}

std::vector<NodeSequence> KgatModel::sequences(const ClaimInstance& instance) const {
  const std::vector<int> claim = vocab_.encode(instance.claim_tokens);
  std::vector<NodeSequence> out;
  out.reserve(instance.candidates.size());
  for (const auto& c : instance.candidates) {
    const std::vector<int> title = vocab_.encode(c.title_tokens);
    const std::vector<int> sentence =
        c.is_pad ? std::vector<int>{Vocabulary::kPad} : vocab_.encode(c.sentence_tokens);
    out.push_back(build_sequence(claim, title, sentence, config_.max_len));
  }
  return out;
}

EvidenceGraph KgatModel::build_graph(const ClaimInstance& instance) {
  EvidenceGraph g;
  auto seqs = sequences(instance);
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    GraphNode node;
    node.key = instance.candidates[i].key();
    node.valid = !instance.candidates[i].is_pad && seqs[i].has_real_evidence();
    node.states = encode_states(encoder(), params_, seqs[i], NodeRef{instance.claim_id, i});
    node.sequence = std::move(seqs[i]);
    g.nodes.push_back(std::move(node));
  }
  return g;
}

ForwardResult KgatModel::forward(const ClaimInstance& instance, AblationMode mode) {
  return run(instance, mode, false, 1.0);
}

ForwardResult KgatModel::forward_backward(const ClaimInstance& instance, AblationMode mode,
                                          double scale) {
  return run(instance, mode, true, scale);
}

ForwardResult KgatModel::run(const ClaimInstance& instance, AblationMode mode, bool backward,
                             double scale) {
  const auto seqs = sequences(instance);
  const std::size_t l = seqs.size();

  ForwardResult result;
  AttentionTrace& trace = result.trace;
  trace.claim_id = instance.claim_id;
  trace.valid.assign(l, 0);
  trace.beta.assign(l, {});
  trace.selection.assign(l, 0.0);
  trace.node_label.assign(l, {});
  std::vector<std::size_t> valid;
  for (std::size_t i = 0; i < l; ++i) {
    trace.node_tokens.push_back(seqs[i].ids);
    trace.node_keys.push_back(instance.candidates[i].key());
    if (!instance.candidates[i].is_pad && seqs[i].has_real_evidence()) {
      trace.valid[i] = 1;
      valid.push_back(i);
    }
  }
  if (valid.empty()) throw NumericError("claim " + instance.claim_id + ": no valid evidence");

  Tape tape;
  const NodeEncoder& enc = encoder();
  std::vector<Var> h(l);
  for (std::size_t p : valid) {
    h[p] = enc.encode(tape, params_, seqs[p], NodeRef{instance.claim_id, p});
  }
  const LinearVars attn = linear_vars(tape, params_, attn_);
  const PerceptronVars mlp{linear_vars(tape, params_, sentence_mlp_.hidden),
                           linear_vars(tape, params_, sentence_mlp_.output)};
  const LinearVars label = linear_vars(tape, params_, label_);
  const LinearVars select = linear_vars(tape, params_, select_);

  std::vector<Var> dists;
  std::vector<Var> sel_logits;
  std::vector<Var> betas;
  std::vector<Var> alphas;  // (q, p) in edge order
  dists.reserve(valid.size());
  for (std::size_t p : valid) {
    Var zp = ops::slice_rows(tape, h[p], 0, 1);
    std::vector<Var> zhat;
    zhat.reserve(valid.size());
    for (std::size_t q : valid) {
      Var alpha = graph_ops::token_attention(tape, h[q], seqs[q], h[p], seqs[p], bank_, attn,
                                             mode.edge);
      alphas.push_back(alpha);
      zhat.push_back(graph_ops::propagate(tape, h[q], alpha));
    }
    Var beta = graph_ops::sentence_attention(tape, zp, zhat, mlp);
    betas.push_back(beta);
    Var v = graph_ops::update_node(tape, beta, zhat, zp);
    dists.push_back(graph_ops::per_node_distribution(tape, v, label));
    sel_logits.push_back(
        graph_ops::selection_logit(tape, h[p], seqs[p], bank_, select, mode.node));
  }
  Var selection = graph_ops::selection_distribution(tape, sel_logits);
  Var per_node = ops::stack_rows(tape, dists);
  Var joint = graph_ops::joint_distribution(tape, per_node, selection);
  Var loss = graph_ops::loss(tape, joint, instance.label);

  const Tensor& joint_v = tape.value(joint);
  for (std::size_t y = 0; y < kLabelCount; ++y) result.probs[y] = joint_v[y];
  result.loss = tape.value(loss)[0];
  if (!std::isfinite(result.loss)) {
    throw NumericError("claim " + instance.claim_id + ": non-finite loss");
  }

  const Tensor& sel_v = tape.value(selection);
  std::size_t e = 0;
  for (std::size_t pi = 0; pi < valid.size(); ++pi) {
    const std::size_t p = valid[pi];
    trace.selection[p] = sel_v[pi];
    const Tensor& dist = tape.value(dists[pi]);
    trace.node_label[p].assign(dist.data(), dist.data() + dist.size());
    const Tensor& beta = tape.value(betas[pi]);
    trace.beta[p].assign(l, 0.0);
    for (std::size_t qi = 0; qi < valid.size(); ++qi) {
      const std::size_t q = valid[qi];
      trace.beta[p][q] = beta[qi];
      const Tensor& alpha = tape.value(alphas[e++]);
      EdgeTrace et;
      et.from = q;
      et.to = p;
      et.alpha.assign(seqs[q].length(), 0.0);
      std::copy(alpha.data(), alpha.data() + alpha.size(), et.alpha.begin() + 1);
      trace.edges.push_back(std::move(et));
    }
  }

  if (backward) tape.backward(loss, scale);
  return result;
}

}  // namespace kgat
