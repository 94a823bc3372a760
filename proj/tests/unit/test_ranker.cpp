#include <doctest.h>

#include "kgat/errors.hpp"
#include "kgat/kernels.hpp"
#include "kgat/ranker.hpp"
#include "kgat/synthetic.hpp"
#include "temp_dir.hpp"

using namespace kgat;

namespace {

EvidenceSentence sentence(const std::string& doc, int idx, std::vector<std::string> tokens,
                          double score = 0.0) {
  EvidenceSentence s;
  s.doc_id = doc;
  s.sent_idx = idx;
  s.title_tokens = {doc};
  s.sentence_tokens = std::move(tokens);
  s.retrieval_score = score;
  return s;
}

Vocabulary toy_vocab() {
  Vocabulary v;
  for (const char* t : {"a", "b", "c", "d", "e", "D1", "D2", "D3"}) v.add(t);
  return v;
}

}  // namespace

TEST_CASE("pairwise hinge loss") {
  CHECK(pairwise_loss(0.9, 0.2) == doctest::Approx(0.3));
  CHECK(pairwise_loss(2.0, 0.5) == 0.0);
  CHECK(pairwise_loss(0.5, 0.5) == doctest::Approx(1.0));
  CHECK(pairwise_loss(0.1, 0.8) == doctest::Approx(1.7));
  CHECK(pairwise_loss(1.0, 0.0) == 0.0);
  CHECK(pairwise_loss(0.0, 0.0, 0.25) == doctest::Approx(0.25));
}

TEST_CASE("ranking") {
  RankerModel model(8, toy_vocab(), default_bank(5), 3);
  const std::vector<std::string> claim{"a", "b", "c"};

  SUBCASE("identical sentences score the same") {
    const auto x = sentence("D1", 0, {"a", "d"});
    auto y = x;
    y.sent_idx = 4;
    CHECK(model.score(claim, x) == model.score(claim, y));
  }
  SUBCASE("k above the candidate count returns every real candidate") {
    std::vector<EvidenceSentence> cands{sentence("D1", 0, {"a"}), sentence("D2", 1, {"e"}),
                                        EvidenceSentence::pad()};
    const auto r = rank(claim, cands, model, 10);
    CHECK(r.size() == 2);
    CHECK(r[0].score >= r[1].score);
  }
  SUBCASE("ties break on doc id then sentence index") {
    std::vector<EvidenceSentence> cands{sentence("D2", 0, {"b"}), sentence("D1", 3, {"b"}),
                                        sentence("D1", 1, {"b"})};
    // Same title keeps the scores tied.
    for (auto& c : cands) c.title_tokens = {"D3"};
    const auto r = rank(claim, cands, model, 5);
    REQUIRE(r.size() == 3);
    CHECK(r[0].sentence.key() == SentenceKey{"D1", 1});
    CHECK(r[1].sentence.key() == SentenceKey{"D1", 3});
    CHECK(r[2].sentence.key() == SentenceKey{"D2", 0});
  }
  SUBCASE("truncation to k") {
    std::vector<EvidenceSentence> cands;
    for (int i = 0; i < 9; ++i) cands.push_back(sentence("D1", i, {i % 2 ? "a" : "e"}));
    CHECK(rank(claim, cands, model, 5).size() == 5);
  }
  CHECK_THROWS_AS(model.score(claim, EvidenceSentence::pad()), DataError);
}

TEST_CASE("ranker training lowers the hinge loss") {
  SyntheticSpec spec;
  spec.seed = 5;
  spec.n_train = 120;
  spec.n_dev = 1;
  const SyntheticCorpus corpus = generate_synthetic(spec);
  RankerModel model(16, corpus.vocabulary, default_bank(11), 2);
  RankerTrainOptions opt;
  opt.epochs = 4;
  opt.lr = 1e-2;
  const RankerHistory h = train_ranker(model, corpus.train, opt);
  REQUIRE(h.epoch_loss.size() == 4);
  CHECK(h.epoch_loss.back() < h.epoch_loss.front());
}

TEST_CASE("ranker save and load") {
  RankerModel model(6, toy_vocab(), default_bank(7), 9);
  testing::TempDir dir;
  const std::string path = dir.file("ranker.txt");
  save_ranker(model, path);
  RankerModel back = load_ranker(path);
  CHECK(serialize_ranker(back) == serialize_ranker(model));
  const auto s = sentence("D2", 2, {"c", "d", "a"});
  CHECK(back.score({"a", "c"}, s) == model.score({"a", "c"}, s));
  const std::string text = serialize_ranker(model);
  CHECK_THROWS_AS(parse_ranker(text.substr(0, text.size() / 3)), DataError);
  try {
    load_ranker(dir.file("nope.txt"));
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("nope.txt") != std::string::npos);
  }
}
