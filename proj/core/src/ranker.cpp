#include "kgat/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kgat/errors.hpp"
#include "kgat/io_util.hpp"
#include "kgat/numerics.hpp"
#include "kgat/random.hpp"
#include "text_records.hpp"

namespace kgat {

using namespace text_records;

double pairwise_loss(double s_pos, double s_neg, double margin) {
  return std::max(0.0, margin - s_pos + s_neg);
}

RankerModel::RankerModel(std::size_t dim, Vocabulary vocab, KernelBank bank, std::uint64_t seed)
    : vocab_(std::move(vocab)), bank_(std::move(bank)) {
  Rng rng(seed);
  encoder_ = EmbeddingEncoder(params_, "ranker.encoder", vocab_.size(), dim, rng);
  scorer_ = AffineMap::create(params_, "ranker.score", bank_.size(), 1);
  for (double& w : params_[scorer_.weight].value.values()) w = rng.uniform(-0.01, 0.01);
}

RankerModel::RankerModel(Vocabulary vocab, KernelBank bank, ParameterSet params)
    : vocab_(std::move(vocab)), bank_(std::move(bank)), params_(std::move(params)) {
  encoder_ = EmbeddingEncoder::bind(params_, "ranker.encoder");
  if (encoder_.vocab_size() != vocab_.size()) {
    throw DataError("ranker embedding rows do not match the vocabulary");
  }
  scorer_ = AffineMap{params_.index_of("ranker.score.weight"), params_.index_of("ranker.score.bias")};
  const Tensor& w = params_[scorer_.weight].value;
  if (w.rows() != 1 || w.cols() != bank_.size() || params_[scorer_.bias].value.size() != 1) {
    throw DataError("ranker.score has the wrong shape for K=" + std::to_string(bank_.size()));
  }
}

std::vector<int> RankerModel::sentence_ids(const EvidenceSentence& sentence) const {
  std::vector<int> ids = vocab_.encode(sentence.title_tokens);
  const auto body = vocab_.encode(sentence.sentence_tokens);
  ids.insert(ids.end(), body.begin(), body.end());
  return ids;
}

Var RankerModel::score(Tape& tape, std::span<const int> claim_ids,
                       std::span<const int> sentence_ids) {
  if (claim_ids.empty()) throw DataError("ranker: empty claim");
  if (sentence_ids.empty()) throw DataError("ranker: empty sentence");
  Var claim = encoder_.encode_tokens(tape, params_, claim_ids);
  Var sentence = encoder_.encode_tokens(tape, params_, sentence_ids);
  Var m = ops::cosine_matrix(tape, claim, sentence);
  const Mask rows(claim_ids.size(), 1), cols(sentence_ids.size(), 1);
  Var features = ops::kernel_pool(tape, m, rows, cols, bank_);
  Var phi = ops::masked_mean_rows(tape, features, rows);
  return ops::affine(tape, phi, tape.param(params_[scorer_.weight]),
                     tape.param(params_[scorer_.bias]));
}

double RankerModel::score(const std::vector<std::string>& claim_tokens,
                          const EvidenceSentence& sentence) {
  if (sentence.is_pad || sentence.sentence_tokens.empty()) {
    throw DataError("ranker: empty sentence " + sentence.doc_id);
  }
  Tape tape;
  const auto claim = vocab_.encode(claim_tokens);
  const auto ids = sentence_ids(sentence);
  return tape.value(score(tape, claim, ids))[0];
}

std::vector<ScoredCandidate> rank(const std::vector<std::string>& claim_tokens,
                                  const std::vector<EvidenceSentence>& candidates,
                                  RankerModel& model, std::size_t k) {
  std::vector<ScoredCandidate> scored;
  scored.reserve(candidates.size());
  for (const auto& c : candidates) {
    if (c.is_pad) continue;
    scored.push_back({c, model.score(claim_tokens, c)});
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.sentence.key() < b.sentence.key();
  });
  if (scored.size() > k) scored.resize(k);
  return scored;
}

RankerHistory train_ranker(RankerModel& model, const std::vector<ClaimRecord>& records,
                           const RankerTrainOptions& options) {
  Rng rng(options.seed);
  AdamState adam = AdamState::zeros_like(model.params());
  RankerHistory history;
  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(order);
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t idx : order) {
      const ClaimRecord& r = records[idx];
      std::vector<SentenceKey> golden;
      for (const auto& set : r.golden_sets) golden.insert(golden.end(), set.begin(), set.end());
      std::vector<const EvidenceSentence*> positives, negatives;
      for (const auto& c : r.candidates) {
        const bool g = std::find(golden.begin(), golden.end(), c.key()) != golden.end();
        (g ? positives : negatives).push_back(&c);
      }
      if (positives.empty() || negatives.empty()) continue;
      const auto claim = model.vocabulary().encode(r.claim_tokens);
      for (const EvidenceSentence* pos : positives) {
        const EvidenceSentence* neg = negatives[rng.below(negatives.size())];
        model.params().zero_grad();
        Tape tape;
        const auto pos_ids = model.sentence_ids(*pos);
        const auto neg_ids = model.sentence_ids(*neg);
        Var sp = model.score(tape, claim, pos_ids);
        Var sn = model.score(tape, claim, neg_ids);
        Var loss = ops::pairwise_hinge(tape, sp, sn, options.margin);
        const double l = tape.value(loss)[0];
        total += l;
        ++pairs;
        if (l > 0.0) {
          tape.backward(loss);
          adam_step(model.params(), adam, options.lr);
        }
      }
    }
    history.epoch_loss.push_back(pairs ? total / static_cast<double>(pairs) : 0.0);
  }
  return history;
}

std::string serialize_ranker(const RankerModel& model) {
  std::ostringstream out;
  out << "KGATRANKER " << kRankerVersion << '\n';
  out << "kernels " << model.bank().size() << '\n';
  for (const auto& k : model.bank().kernels()) {
    out << "kernel " << format_double(k.mu) << ' ' << format_double(k.sigma) << '\n';
  }
  out << "vocab " << model.vocabulary().size() << '\n';
  for (const auto& t : model.vocabulary().tokens()) out << t << '\n';
  out << "params " << model.params().size() << '\n';
  for (const auto& p : model.params()) write_tensor(out, "param", p.name, p.value);
  out << "end\n";
  return out.str();
}

RankerModel parse_ranker(const std::string& text) {
  LineReader r(text);
  const auto header = r.next("header");
  if (header.size() != 2 || header[0] != "KGATRANKER") throw DataError("not a ranker checkpoint");
  if (header[1] != std::to_string(kRankerVersion)) {
    throw DataError("unknown ranker version " + header[1]);
  }
  const auto kh = r.next("kernels");
  expect(kh, "kernels", 2);
  std::vector<GaussianKernel> kernels;
  for (std::size_t k = 0, n = to_size(kh[1]); k < n; ++k) {
    const auto f = r.next("kernel");
    expect(f, "kernel", 3);
    kernels.push_back({parse_double(f[1]), parse_double(f[2])});
  }
  KernelBank bank(std::move(kernels));
  const auto vh = r.next("vocab");
  expect(vh, "vocab", 2);
  std::vector<std::string> tokens;
  for (std::size_t i = 0, n = to_size(vh[1]); i < n; ++i) tokens.push_back(r.raw("vocab token"));
  Vocabulary vocab = Vocabulary::from_tokens(tokens);
  const auto ph = r.next("params");
  expect(ph, "params", 2);
  ParameterSet params;
  for (std::size_t i = 0, n = to_size(ph[1]); i < n; ++i) {
    std::string name;
    Tensor t = read_tensor(r, "param", &name);
    params.add(name, std::move(t));
  }
  expect(r.next("end marker"), "end", 1);
  return RankerModel(std::move(vocab), std::move(bank), std::move(params));
}

void save_ranker(const RankerModel& model, const std::string& path) {
  write_file_atomic(path, serialize_ranker(model));
}

RankerModel load_ranker(const std::string& path) {
  try {
    return parse_ranker(read_file(path));
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace kgat
