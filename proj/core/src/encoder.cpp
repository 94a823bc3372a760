#include "kgat/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kgat/errors.hpp"
#include "kgat/io_util.hpp"
#include "kgat/vocabulary.hpp"

namespace kgat {

Mask NodeSequence::content_mask() const { return Mask(mask.begin() + 1, mask.end()); }

Mask NodeSequence::claim_mask() const {
  return Mask(mask.begin() + 1, mask.begin() + 1 + static_cast<std::ptrdiff_t>(claim_len));
}

Mask NodeSequence::evidence_mask() const {
  const auto begin = mask.begin() + static_cast<std::ptrdiff_t>(evidence_begin());
  return Mask(begin, begin + static_cast<std::ptrdiff_t>(evidence_len));
}

bool NodeSequence::has_real_evidence() const {
  const Mask m = evidence_mask();
  // The closing [SEP] alone does not count as evidence.
  for (std::size_t i = 0; i + 1 < m.size(); ++i) {
    if (m[i]) return true;
  }
  return false;
}

NodeSequence build_sequence(std::span<const int> claim_ids, std::span<const int> title_ids,
                            std::span<const int> sentence_ids, std::size_t max_len) {
  NodeSequence seq;
  const std::size_t claim_len = claim_ids.size() + 1;
  if (1 + claim_len + 1 > max_len) {
    throw DataError("claim of " + std::to_string(claim_ids.size()) +
                    " tokens does not fit max_len " + std::to_string(max_len));
  }
  std::vector<int> evidence(title_ids.begin(), title_ids.end());
  evidence.insert(evidence.end(), sentence_ids.begin(), sentence_ids.end());
  const std::size_t room = max_len - 1 - claim_len - 1;
  if (evidence.size() > room) evidence.resize(room);

  seq.ids.push_back(Vocabulary::kCls);
  seq.ids.insert(seq.ids.end(), claim_ids.begin(), claim_ids.end());
  seq.ids.push_back(Vocabulary::kSep);
  seq.ids.insert(seq.ids.end(), evidence.begin(), evidence.end());
  seq.ids.push_back(Vocabulary::kSep);
  seq.claim_len = claim_len;
  seq.evidence_len = evidence.size() + 1;
  seq.mask.resize(seq.ids.size());
  for (std::size_t i = 0; i < seq.ids.size(); ++i) {
    seq.mask[i] = seq.ids[i] == Vocabulary::kPad ? 0 : 1;
  }
  return seq;
}

EmbeddingEncoder::EmbeddingEncoder(ParameterSet& params, const std::string& prefix,
                                   std::size_t vocab_size, std::size_t dim, Rng& rng)
    : vocab_size_(vocab_size), dim_(dim) {
  Tensor table(vocab_size, dim);
  for (double& v : table.values()) v = rng.uniform(-1.0, 1.0);
  embedding_ = params.add(prefix + ".embedding", std::move(table));
  proj_ = AffineMap::create(params, prefix + ".proj", dim, dim);
  // Identity plus a small perturbation keeps early token states close to the
  // embeddings.
  Tensor& w = params[proj_.weight].value;
  const double a = 0.1 / std::sqrt(static_cast<double>(dim));
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t c = 0; c < dim; ++c) w.at(r, c) = (r == c ? 1.0 : 0.0) + rng.uniform(-a, a);
  }
}

EmbeddingEncoder EmbeddingEncoder::bind(const ParameterSet& params, const std::string& prefix) {
  EmbeddingEncoder e;
  e.embedding_ = params.index_of(prefix + ".embedding");
  e.proj_.weight = params.index_of(prefix + ".proj.weight");
  e.proj_.bias = params.index_of(prefix + ".proj.bias");
  const Tensor& table = params[e.embedding_].value;
  if (table.rank() != 2) throw DataError(prefix + ".embedding must be a matrix");
  e.vocab_size_ = table.rows();
  e.dim_ = table.cols();
  const Tensor& w = params[e.proj_.weight].value;
  if (w.rank() != 2 || w.rows() != e.dim_ || w.cols() != e.dim_ ||
      params[e.proj_.bias].value.size() != e.dim_) {
    throw DataError(prefix + ".proj has the wrong shape");
  }
  return e;
}

Var EmbeddingEncoder::encode_tokens(Tape& tape, ParameterSet& params,
                                    std::span<const int> ids) const {
  Var emb = ops::gather_rows(tape, params[embedding_], ids);
  return ops::affine(tape, emb, tape.param(params[proj_.weight]), tape.param(params[proj_.bias]));
}

Var EmbeddingEncoder::encode(Tape& tape, ParameterSet& params, const NodeSequence& seq,
                             const NodeRef&) const {
  Var rows = encode_tokens(tape, params, seq.ids);
  Mask content(seq.mask);
  content[0] = 0;
  Var z = ops::masked_mean_rows(tape, rows, content);
  return ops::set_row(tape, rows, 0, z);
}

void ExternalStateEncoder::insert(const std::string& claim_id, std::size_t index,
                                  Tensor states) {
  if (states.rank() != 2 || states.cols() != dim_) {
    throw DataError("external states for (" + claim_id + ", " + std::to_string(index) +
                    ") have width " + std::to_string(states.cols()) + ", expected " +
                    std::to_string(dim_));
  }
  states_[{claim_id, index}] = std::move(states);
}

const Tensor& ExternalStateEncoder::states(const std::string& claim_id,
                                           std::size_t index) const {
  auto it = states_.find({claim_id, index});
  if (it == states_.end()) {
    throw DataError("no external states for node (" + claim_id + ", " + std::to_string(index) +
                    ")");
  }
  return it->second;
}

Var ExternalStateEncoder::encode(Tape& tape, ParameterSet&, const NodeSequence& seq,
                                 const NodeRef& ref) const {
  const Tensor& s = states(ref.claim_id, ref.index);
  if (s.rows() != seq.length()) {
    throw DataError("external states for (" + ref.claim_id + ", " + std::to_string(ref.index) +
                    ") have " + std::to_string(s.rows()) + " rows, sequence has " +
                    std::to_string(seq.length()));
  }
  return tape.constant(s);
}

ExternalStateEncoder ExternalStateEncoder::load(const std::string& path,
                                                std::size_t expected_dim) {
  std::istringstream in(read_file(path));
  std::string magic;
  int version = 0;
  std::size_t dim = 0;
  if (!(in >> magic >> version >> dim) || magic != "KGATSTATES") {
    throw DataError(path + ": missing KGATSTATES header");
  }
  if (version != 1) throw DataError(path + ": unsupported version " + std::to_string(version));
  if (dim != expected_dim) {
    throw DataError(path + ": state width " + std::to_string(dim) + " does not match d=" +
                    std::to_string(expected_dim));
  }
  ExternalStateEncoder enc(dim);
  std::string tag;
  while (in >> tag) {
    if (tag != "node") throw DataError(path + ": expected 'node' record, got '" + tag + "'");
    std::string claim_id;
    std::size_t index = 0, rows = 0, cols = 0;
    if (!(in >> claim_id >> index >> rows >> cols)) throw DataError(path + ": bad node header");
    if (cols != dim) {
      throw DataError(path + ": node (" + claim_id + ", " + std::to_string(index) +
                      ") width " + std::to_string(cols) + " does not match d=" +
                      std::to_string(dim));
    }
    Tensor t(rows, cols);
    for (double& v : t.values()) {
      std::string tok;
      if (!(in >> tok)) throw DataError(path + ": truncated node (" + claim_id + ")");
      v = parse_double(tok);
    }
    enc.insert(claim_id, index, std::move(t));
  }
  return enc;
}

void ExternalStateEncoder::save(const std::string& path) const {
  std::ostringstream out;
  out << "KGATSTATES 1 " << dim_ << '\n';
  for (const auto& [key, t] : states_) {
    out << "node " << key.first << ' ' << key.second << ' ' << t.rows() << ' ' << t.cols()
        << '\n';
    for (std::size_t r = 0; r < t.rows(); ++r) {
      for (std::size_t c = 0; c < t.cols(); ++c) {
        if (c) out << ' ';
        out << format_double(t.at(r, c));
      }
      out << '\n';
    }
  }
  write_file_atomic(path, out.str());
}

TokenStates encode_states(const NodeEncoder& encoder, ParameterSet& params,
                          const NodeSequence& seq, const NodeRef& ref) {
  Tape tape;
  Var h = encoder.encode(tape, params, seq, ref);
  return TokenStates{tape.value(h), seq.mask};
}

}  // namespace kgat
