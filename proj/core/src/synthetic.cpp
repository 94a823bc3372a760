#include "kgat/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>

#include "kgat/errors.hpp"
#include "kgat/random.hpp"

namespace kgat {
namespace {

std::string entity_token(std::size_t i) { return "ent_" + std::to_string(i); }
std::string attribute_token(std::size_t i) { return "attr_" + std::to_string(i); }
std::string filler_token(std::size_t i) { return "w_" + std::to_string(i); }

class ClaimBuilder {
 public:
  ClaimBuilder(const SyntheticSpec& spec, Rng& rng) : spec_(spec), rng_(rng) {}

  std::size_t pick_entity_except(std::initializer_list<std::size_t> avoid) {
    for (;;) {
      const auto e = static_cast<std::size_t>(rng_.below(spec_.entity_count));
      if (std::find(avoid.begin(), avoid.end(), e) == avoid.end()) return e;
    }
  }
  std::size_t pick_attribute_except(std::size_t avoid) {
    for (;;) {
      const auto a = static_cast<std::size_t>(rng_.below(spec_.attribute_count));
      if (a != avoid) return a;
    }
  }
  std::string filler() { return filler_token(rng_.below(spec_.filler_count)); }

  // "<subject> w [not] <object> w"
  EvidenceSentence sentence(std::size_t doc_entity, const std::string& subject,
                            const std::string& object, bool negated, bool related) {
    EvidenceSentence s;
    s.doc_id = entity_token(doc_entity);
    s.sent_idx = next_index_[s.doc_id]++;
    s.title_tokens = {entity_token(doc_entity)};
    s.sentence_tokens = {subject, filler()};
    if (negated) s.sentence_tokens.emplace_back(kNegationToken);
    s.sentence_tokens.push_back(object);
    s.sentence_tokens.push_back(filler());
    s.retrieval_score = related ? rng_.uniform(0.5, 1.0) : rng_.uniform(0.0, 0.45);
    return s;
  }

  EvidenceSentence entity_distractor(std::size_t entity, std::size_t attribute) {
    const std::size_t other = pick_attribute_except(attribute);
    return sentence(entity, entity_token(entity), attribute_token(other), false, true);
  }

  EvidenceSentence attribute_distractor(std::size_t entity, std::size_t attribute) {
    const std::size_t other = pick_entity_except({entity});
    return sentence(other, entity_token(other), attribute_token(attribute), false, true);
  }

  EvidenceSentence random_sentence(std::size_t entity, std::size_t attribute) {
    const std::size_t e = pick_entity_except({entity});
    const std::size_t a = pick_attribute_except(attribute);
    return sentence(e, entity_token(e), attribute_token(a), false, false);
  }

  ClaimRecord build(const std::string& claim_id, Label label, bool multi) {
    next_index_.clear();
    const auto entity = static_cast<std::size_t>(rng_.below(spec_.entity_count));
    const auto attribute = static_cast<std::size_t>(rng_.below(spec_.attribute_count));

    ClaimRecord r;
    r.claim_id = claim_id;
    r.label = label;
    r.claim_tokens = {entity_token(entity), filler(), attribute_token(attribute)};

    std::vector<EvidenceSentence> related;
    if (label == Label::kNotEnoughInfo) {
      std::size_t n_entity = 4;
      if (multi) {
        // Bridge pair whose second hop lands on a different attribute.
        const std::size_t bridge = pick_entity_except({entity});
        related.push_back(
            sentence(entity, entity_token(entity), entity_token(bridge), false, true));
        related.push_back(sentence(bridge, entity_token(bridge),
                                   attribute_token(pick_attribute_except(attribute)), false,
                                   true));
        n_entity = 2;
      }
      for (std::size_t i = 0; i < n_entity; ++i) {
        related.push_back(entity_distractor(entity, attribute));
      }
    } else {
      const bool negated = label == Label::kRefutes;
      std::vector<SentenceKey> golden;
      if (multi) {
        const std::size_t bridge = pick_entity_except({entity});
        related.push_back(
            sentence(entity, entity_token(entity), entity_token(bridge), false, true));
        related.push_back(sentence(bridge, entity_token(bridge), attribute_token(attribute),
                                   negated, true));
        golden = {related[0].key(), related[1].key()};
        related.push_back(entity_distractor(entity, attribute));
      } else {
        related.push_back(sentence(entity, entity_token(entity), attribute_token(attribute),
                                   negated, true));
        golden = {related[0].key()};
        related.push_back(entity_distractor(entity, attribute));
        related.push_back(entity_distractor(entity, attribute));
      }
      related.push_back(attribute_distractor(entity, attribute));
      r.golden_sets.push_back(std::move(golden));
    }

    r.candidates = std::move(related);
    while (r.candidates.size() < spec_.candidates_per_claim) {
      r.candidates.push_back(random_sentence(entity, attribute));
    }
    rng_.shuffle(r.candidates);
    validate(r);
    return r;
  }

 private:
  const SyntheticSpec& spec_;
  Rng& rng_;
  std::map<std::string, int> next_index_;
};

std::vector<ClaimRecord> build_split(const SyntheticSpec& spec, Rng& rng, const char* prefix,
                                     std::size_t n) {
  std::vector<Label> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<Label>(i % kLabelCount);
  rng.shuffle(labels);

  // Exactly round(multi_frac * count) multi-evidence claims among each group.
  std::vector<std::uint8_t> multi(n, 0);
  std::vector<std::size_t> verifiable, nei;
  for (std::size_t i = 0; i < n; ++i) {
    (labels[i] == Label::kNotEnoughInfo ? nei : verifiable).push_back(i);
  }
  for (auto* group : {&verifiable, &nei}) {
    rng.shuffle(*group);
    const auto take = static_cast<std::size_t>(
        std::llround(spec.multi_frac * static_cast<double>(group->size())));
    for (std::size_t k = 0; k < take && k < group->size(); ++k) multi[(*group)[k]] = 1;
  }

  ClaimBuilder builder(spec, rng);
  std::vector<ClaimRecord> out;
  out.reserve(n);
  char id[64];
  for (std::size_t i = 0; i < n; ++i) {
    std::snprintf(id, sizeof(id), "%s-%05zu", prefix, i);
    out.push_back(builder.build(id, labels[i], multi[i] != 0));
  }
  return out;
}

}  // namespace

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
  if (!(spec.multi_frac >= 0.0 && spec.multi_frac <= 1.0)) {
    throw UsageError("multi_frac must lie in [0, 1]");
  }
  if (spec.entity_count < 3 || spec.attribute_count < 2 || spec.filler_count < 1) {
    throw UsageError("synthetic world too small");
  }
  if (spec.candidates_per_claim < 5) throw UsageError("need at least 5 candidates per claim");

  SyntheticCorpus corpus;
  for (std::size_t i = 0; i < spec.entity_count; ++i) corpus.vocabulary.add(entity_token(i));
  for (std::size_t i = 0; i < spec.attribute_count; ++i) {
    corpus.vocabulary.add(attribute_token(i));
  }
  for (std::size_t i = 0; i < spec.filler_count; ++i) corpus.vocabulary.add(filler_token(i));
  corpus.vocabulary.add(kNegationToken);

  Rng rng(spec.seed);
  corpus.train = build_split(spec, rng, "train", spec.n_train);
  corpus.dev = build_split(spec, rng, "dev", spec.n_dev);
  return corpus;
}

void write_corpus(const SyntheticCorpus& corpus, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  write_records((base / "train.jsonl").string(), corpus.train);
  write_records((base / "dev.jsonl").string(), corpus.dev);
  corpus.vocabulary.save((base / "vocab.txt").string());
}

}  // namespace kgat

namespace kgat {

namespace {
std::string random_word(std::size_t i) { return "tok_" + std::to_string(i); }
}  // namespace

Vocabulary random_instance_vocabulary(const RandomInstanceSpec& spec) {
  Vocabulary v;
  for (std::size_t i = 0; i < spec.word_count; ++i) v.add(random_word(i));
  return v;
}

ClaimInstance random_instance(Rng& rng, const RandomInstanceSpec& spec,
                              const std::string& claim_id) {
  if (spec.evidence == 0 || spec.max_field_tokens == 0 || spec.word_count == 0) {
    throw UsageError("random instance spec must be positive");
  }
  auto words = [&] {
    std::vector<std::string> out(1 + rng.below(spec.max_field_tokens));
    for (auto& w : out) w = random_word(rng.below(spec.word_count));
    return out;
  };
  ClaimInstance inst;
  inst.claim_id = claim_id;
  inst.label = static_cast<Label>(rng.below(kLabelCount));
  inst.claim_tokens = words();
  const std::size_t pads = std::min<std::size_t>(rng.below(spec.max_pad + 1), spec.evidence - 1);
  for (std::size_t i = 0; i + pads < spec.evidence; ++i) {
    EvidenceSentence s;
    s.doc_id = "doc_" + std::to_string(i);
    s.sent_idx = 0;
    s.title_tokens = words();
    s.sentence_tokens = words();
    s.retrieval_score = 1.0 - 0.1 * static_cast<double>(i);
    inst.candidates.push_back(std::move(s));
  }
  for (std::size_t i = 0; i < pads; ++i) inst.candidates.push_back(EvidenceSentence::pad());
  if (inst.label != Label::kNotEnoughInfo) inst.golden_sets.push_back({inst.candidates[0].key()});
  return inst;
}

}  // namespace kgat
