#include <doctest.h>

#include <set>
#include <string>

#include "kgat/dataset.hpp"
#include "kgat/errors.hpp"
#include "kgat/synthetic.hpp"
#include "kgat/vocabulary.hpp"
#include "temp_dir.hpp"

using namespace kgat;
using kgat::testing::slurp;
using kgat::testing::TempDir;

namespace {

std::string candidate(const std::string& doc, int idx, double score) {
  return R"({"doc_id":")" + doc + R"(","sent_idx":)" + std::to_string(idx) +
         R"(,"title":")" + doc + R"(","text":"some words here","score":)" +
         std::to_string(score) + "}";
}

std::string record(const std::string& id, const std::string& label, int n_candidates,
                   const std::string& golden) {
  std::string c;
  for (int i = 0; i < n_candidates; ++i) {
    if (i) c += ",";
    c += candidate("D" + std::to_string(i), 0, 0.1 * (i + 1));
  }
  return R"({"claim_id":")" + id + R"(","claim":"a b c","label":")" + label +
         R"(","candidates":[)" + c + R"(],"golden":)" + golden + "}";
}

}  // namespace

TEST_CASE("labels") {
  CHECK(parse_label("SUPPORTS") == Label::kSupports);
  CHECK(parse_label("REFUTES") == Label::kRefutes);
  CHECK(parse_label("NOT ENOUGH INFO") == Label::kNotEnoughInfo);
  CHECK(label_name(Label::kNotEnoughInfo) == "NOT ENOUGH INFO");
  CHECK_THROWS_AS(parse_label("MAYBE"), DataError);
}

TEST_CASE("load_dataset truncation and padding") {
  TempDir dir;
  SUBCASE("six candidates keep the top five by score") {
    const auto path = dir.write("a.jsonl", record("c1", "SUPPORTS", 6, R"([[["D5",0]]])") + "\n");
    const auto data = load_dataset(path);
    REQUIRE(data.size() == 1);
    REQUIRE(data[0].candidates.size() == 5);
    CHECK(data[0].candidates[0].doc_id == "D5");
    CHECK(data[0].candidates[4].doc_id == "D1");
    CHECK(data[0].valid_count() == 5);
  }
  SUBCASE("three candidates are padded to five") {
    const auto path = dir.write("b.jsonl", record("c1", "SUPPORTS", 3, R"([[["D0",0]]])") + "\n");
    const auto data = load_dataset(path);
    REQUIRE(data[0].candidates.size() == 5);
    CHECK(data[0].valid_count() == 3);
    CHECK(data[0].candidates[3].is_pad);
    CHECK(data[0].candidates[4].is_pad);
  }
  SUBCASE("NEI with golden evidence is rejected") {
    const auto path =
        dir.write("c.jsonl", record("c1", "NOT ENOUGH INFO", 3, R"([[["D0",0]]])") + "\n");
    CHECK_THROWS_AS(load_dataset(path), DataError);
  }
  SUBCASE("errors carry the line number") {
    const auto path = dir.write("d.jsonl", record("c1", "SUPPORTS", 3, R"([[["D0",0]]])") +
                                               "\n{\"claim_id\": 5}\n");
    try {
      load_dataset(path);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
  SUBCASE("forced golden evidence displaces low-scored candidates") {
    const auto path = dir.write("e.jsonl", record("c1", "SUPPORTS", 8, R"([[["D0",0]]])") + "\n");
    const auto plain = load_dataset(path);
    const auto forced = load_dataset(path, {5, true});
    auto has_d0 = [](const ClaimInstance& c) {
      for (const auto& s : c.candidates) {
        if (s.doc_id == "D0") return true;
      }
      return false;
    };
    CHECK_FALSE(has_d0(plain[0]));
    CHECK(has_d0(forced[0]));
    CHECK(forced[0].candidates.size() == 5);
  }
}

TEST_CASE("records round-trip through JSON") {
  TempDir dir;
  SyntheticSpec spec;
  spec.n_train = 30;
  spec.n_dev = 6;
  const auto corpus = generate_synthetic(spec);
  write_records(dir.file("r.jsonl"), corpus.train);
  const auto back = read_records(dir.file("r.jsonl"));
  REQUIRE(back.size() == corpus.train.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(serialize_record(back[i]) == serialize_record(corpus.train[i]));
  }
}

TEST_CASE("synthetic generator") {
  SUBCASE("multi_frac = 0 gives single-sentence golden sets") {
    SyntheticSpec spec;
    spec.n_train = 90;
    spec.n_dev = 30;
    spec.multi_frac = 0.0;
    for (const auto& r : generate_synthetic(spec).train) {
      for (const auto& set : r.golden_sets) CHECK(set.size() == 1);
    }
  }
  SUBCASE("multi_frac = 1 gives two-sentence golden sets") {
    SyntheticSpec spec;
    spec.n_train = 90;
    spec.n_dev = 30;
    spec.multi_frac = 1.0;
    for (const auto& r : generate_synthetic(spec).train) {
      for (const auto& set : r.golden_sets) CHECK(set.size() == 2);
    }
  }
  SUBCASE("labels are balanced and multi-evidence share is exact") {
    SyntheticSpec spec;
    spec.n_train = 300;
    spec.n_dev = 30;
    spec.multi_frac = 0.3;
    const auto corpus = generate_synthetic(spec);
    std::size_t counts[3] = {0, 0, 0};
    std::size_t multi = 0;
    for (const auto& r : corpus.train) {
      ++counts[static_cast<int>(r.label)];
      for (const auto& set : r.golden_sets) multi += set.size() >= 2 ? 1 : 0;
    }
    CHECK(counts[0] == 100);
    CHECK(counts[1] == 100);
    CHECK(counts[2] == 100);
    CHECK(multi == 60);
  }
  SUBCASE("golden sentences are always among the five best-scored") {
    SyntheticSpec spec;
    spec.n_train = 200;
    spec.n_dev = 10;
    for (const auto& inst : prepare(generate_synthetic(spec).train)) {
      std::set<SentenceKey> kept;
      for (const auto& c : inst.candidates) kept.insert(c.key());
      for (const auto& g : inst.golden_union()) CHECK(kept.count(g) == 1);
    }
  }
  SUBCASE("same seed gives byte-identical files") {
    TempDir a, b;
    SyntheticSpec spec;
    spec.n_train = 50;
    spec.n_dev = 20;
    write_corpus(generate_synthetic(spec), a.path().string());
    write_corpus(generate_synthetic(spec), b.path().string());
    for (const char* f : {"train.jsonl", "dev.jsonl", "vocab.txt"}) {
      CHECK(slurp(a.file(f)) == slurp(b.file(f)));
    }
    spec.seed = 8;
    write_corpus(generate_synthetic(spec), b.path().string());
    CHECK(slurp(a.file("train.jsonl")) != slurp(b.file("train.jsonl")));
  }
  SUBCASE("negation only appears in golden refuting sentences") {
    SyntheticSpec spec;
    spec.n_train = 150;
    spec.n_dev = 10;
    for (const auto& r : generate_synthetic(spec).train) {
      std::set<SentenceKey> golden;
      for (const auto& set : r.golden_sets) golden.insert(set.begin(), set.end());
      for (const auto& c : r.candidates) {
        bool neg = false;
        for (const auto& t : c.sentence_tokens) neg = neg || t == kNegationToken;
        if (neg) {
          CHECK(r.label == Label::kRefutes);
          CHECK(golden.count(c.key()) == 1);
        }
      }
    }
  }
}

TEST_CASE("vocabulary") {
  Vocabulary v;
  CHECK(v.size() == 4);
  CHECK(v.id("[CLS]") == Vocabulary::kCls);
  CHECK(v.id("[PAD]") == Vocabulary::kPad);
  const int a = v.add("alpha");
  CHECK(v.add("alpha") == a);
  CHECK(v.id("never-seen") == Vocabulary::kUnk);
  TempDir dir;
  v.save(dir.file("v.txt"));
  CHECK(Vocabulary::load(dir.file("v.txt")) == v);
  CHECK_THROWS_AS(Vocabulary::from_tokens({"x", "y"}), DataError);
}
