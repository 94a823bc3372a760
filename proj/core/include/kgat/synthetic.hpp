#ifndef KGAT_SYNTHETIC_HPP_
#define KGAT_SYNTHETIC_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "kgat/dataset.hpp"
#include "kgat/random.hpp"
#include "kgat/vocabulary.hpp"

namespace kgat {

// Shape of the synthetic claim-verification world.
//
// Claims read "<entity> <filler>* <attribute>". Documents are titled by their
// entity. A SUPPORTS golden sentence mentions the entity and the attribute;
// a REFUTES golden sentence puts the negation token directly before the
// attribute. Multi-evidence claims route through a bridge entity: sentence A
// links the claim entity to the bridge, sentence B (titled by the bridge)
// carries the attribute. NOT ENOUGH INFO claims have no candidate that
// mentions the attribute. Distractors share the entity or the attribute but
// never satisfy the label rule; the negation token only appears in golden
// REFUTES sentences.
struct SyntheticSpec {
  std::uint64_t seed = 7;
  std::size_t n_train = 2000;
  std::size_t n_dev = 500;
  double multi_frac = 0.3;

  std::size_t entity_count = 120;
  std::size_t attribute_count = 40;
  std::size_t filler_count = 16;
  // Raw candidates written per claim, before truncation to five.
  std::size_t candidates_per_claim = 10;
};

struct SyntheticCorpus {
  std::vector<ClaimRecord> train;
  std::vector<ClaimRecord> dev;
  Vocabulary vocabulary;
};

inline constexpr const char* kNegationToken = "not";

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec);

// Small random instance over a throwaway vocabulary, for numeric checks.
// Field lengths are drawn from 1..max_field_tokens; up to max_pad trailing
// candidates are PAD.
struct RandomInstanceSpec {
  std::size_t evidence = kDefaultEvidencePerClaim;
  std::size_t max_field_tokens = 12;
  std::size_t word_count = 24;
  std::size_t max_pad = 0;
};

// Vocabulary holding every token random_instance can emit.
Vocabulary random_instance_vocabulary(const RandomInstanceSpec& spec);
ClaimInstance random_instance(Rng& rng, const RandomInstanceSpec& spec,
                              const std::string& claim_id = "rand");

// Writes train.jsonl, dev.jsonl and vocab.txt into dir (created if needed).
void write_corpus(const SyntheticCorpus& corpus, const std::string& dir);

}  // namespace kgat

#endif  // KGAT_SYNTHETIC_HPP_
