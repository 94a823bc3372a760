#include <doctest.h>

#include <string>

#include "kgat/encoder.hpp"
#include "kgat/errors.hpp"
#include "kgat/random.hpp"
#include "kgat/vocabulary.hpp"
#include "temp_dir.hpp"

using namespace kgat;
using kgat::testing::TempDir;

namespace {

EmbeddingEncoder identity_encoder(ParameterSet& ps, std::size_t vocab, std::size_t d) {
  Rng rng(4);
  EmbeddingEncoder enc(ps, "enc", vocab, d, rng);
  Tensor& w = ps.get("enc.proj.weight").value;
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) w.row(r)[c] = r == c ? 1.0 : 0.0;
  }
  ps.get("enc.proj.bias").value.fill(0.0);
  return enc;
}

}  // namespace

TEST_CASE("build_sequence layout") {
  const std::vector<int> claim{10, 11}, title{20}, sentence{30, 31, 32};
  const NodeSequence s = build_sequence(claim, title, sentence, 130);
  CHECK(s.ids == std::vector<int>{Vocabulary::kCls, 10, 11, Vocabulary::kSep, 20, 30, 31, 32,
                                  Vocabulary::kSep});
  CHECK(s.claim_len == 3);
  CHECK(s.evidence_len == 5);
  CHECK(s.evidence_begin() == 4);
  CHECK(s.content_mask().size() == s.length() - 1);
  CHECK(s.has_real_evidence());
}

TEST_CASE("build_sequence truncates evidence, never the claim") {
  const std::vector<int> claim{10, 11, 12}, title{20}, sentence{30, 31, 32, 33, 34};
  const NodeSequence s = build_sequence(claim, title, sentence, 9);
  CHECK(s.length() == 9);
  CHECK(s.ids.back() == Vocabulary::kSep);
  CHECK(s.ids[5] == 20);
  CHECK(s.ids[6] == 30);
  CHECK(s.ids[7] == 31);
  CHECK_THROWS_AS(build_sequence(claim, title, sentence, 5), DataError);
}

TEST_CASE("PAD evidence is masked and has no real evidence") {
  const std::vector<int> claim{10}, title{Vocabulary::kPad}, sentence{Vocabulary::kPad};
  const NodeSequence s = build_sequence(claim, title, sentence, 130);
  CHECK_FALSE(s.has_real_evidence());
  CHECK(s.mask[3] == 0);
  CHECK(s.mask[4] == 0);
}

TEST_CASE("embedding encoder") {
  ParameterSet ps;
  const EmbeddingEncoder enc = identity_encoder(ps, 40, 4);
  const Tensor& emb = ps.get("enc.embedding").value;

  SUBCASE("identity projection returns the embedding") {
    Tape t;
    const std::vector<int> ids{7};
    const Tensor h = t.value(enc.encode_tokens(t, ps, ids));
    for (std::size_t j = 0; j < 4; ++j) CHECK(h.at(0, j) == emb.at(7, j));
  }
  SUBCASE("z averages real content rows; PAD rows excluded") {
    const std::vector<int> claim{5, 6}, pad{Vocabulary::kPad};
    const NodeSequence s = build_sequence(claim, pad, pad, 130);
    const TokenStates st = encode_states(enc, ps, s);
    // real content: 5, 6, [SEP] (claim side) and the closing [SEP]
    for (std::size_t j = 0; j < 4; ++j) {
      const double expect = (emb.at(5, j) + emb.at(6, j) + 2 * emb.at(Vocabulary::kSep, j)) / 4.0;
      CHECK(st.h.at(0, j) == doctest::Approx(expect).epsilon(1e-14));
    }
    CHECK(st.h.rows() == s.length());
  }
  SUBCASE("identical ids give identical states") {
    const std::vector<int> claim{5, 9}, title{12}, sentence{13, 14};
    const NodeSequence s = build_sequence(claim, title, sentence, 130);
    const TokenStates a = encode_states(enc, ps, s);
    const TokenStates b = encode_states(enc, ps, s);
    CHECK(a.h.values().size() == b.h.values().size());
    for (std::size_t i = 0; i < a.h.size(); ++i) CHECK(a.h[i] == b.h[i]);
  }
  SUBCASE("bind finds existing parameters") {
    const EmbeddingEncoder again = EmbeddingEncoder::bind(ps, "enc");
    CHECK(again.dim() == 4);
    CHECK(again.vocab_size() == 40);
    CHECK_THROWS_AS(EmbeddingEncoder::bind(ps, "missing"), DataError);
  }
}

TEST_CASE("external state encoder") {
  TempDir dir;
  Rng rng(2);
  ExternalStateEncoder states(16);
  Tensor t(6, 16);
  for (double& v : t.values()) v = rng.uniform(-1, 1);
  states.insert("claim-1", 0, t);
  states.save(dir.file("s.txt"));

  SUBCASE("matching width loads exactly") {
    const auto back = ExternalStateEncoder::load(dir.file("s.txt"), 16);
    const Tensor& u = back.states("claim-1", 0);
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(u[i] == t[i]);
  }
  SUBCASE("width mismatch") {
    CHECK_THROWS_AS(ExternalStateEncoder::load(dir.file("s.txt"), 32), DataError);
  }
  SUBCASE("absent node names the claim and index") {
    try {
      states.states("claim-1", 3);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("claim-1") != std::string::npos);
      CHECK(msg.find("3") != std::string::npos);
    }
  }
  SUBCASE("row count must match the sequence") {
    ParameterSet ps;
    const std::vector<int> claim{5}, title{6}, sentence{7};
    const NodeSequence s = build_sequence(claim, title, sentence, 130);  // 6 rows
    CHECK(encode_states(states, ps, s, {"claim-1", 0}).h.rows() == 6);
    const std::vector<int> longer{7, 8};
    const NodeSequence s2 = build_sequence(claim, title, longer, 130);
    CHECK_THROWS_AS(encode_states(states, ps, s2, {"claim-1", 0}), DataError);
  }
}
