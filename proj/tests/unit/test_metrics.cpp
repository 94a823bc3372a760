#include <doctest.h>

#include <string>
#include <vector>

#include "kgat/errors.hpp"
#include "kgat/metrics.hpp"

using namespace kgat;

namespace {

SentenceKey k(const char* doc, int idx) { return {doc, idx}; }

// Six claims, one per counting branch:
//   c1 NEI gold, wrong label                      LA 0  FEVER 0  (no evidence terms)
//   c2 REFUTES, right label, golden set half-covered  LA 1  FEVER 0
//   c3 NEI, right label, evidence irrelevant      LA 1  FEVER 1
//   c4 SUPPORTS, right label, second of two golden sets covered  LA 1  FEVER 1
//   c5 SUPPORTS, wrong label, golden set covered  LA 0  FEVER 0
//   c6 REFUTES, right label, golden sentence only at rank 6  LA 1  FEVER 0
struct Fixture {
  std::vector<GoldClaim> gold{
      {"c1", Label::kNotEnoughInfo, {}},
      {"c2", Label::kRefutes, {{k("B", 0), k("B", 1)}}},
      {"c3", Label::kNotEnoughInfo, {}},
      {"c4", Label::kSupports, {{k("C", 0)}, {k("D", 0)}}},
      {"c5", Label::kSupports, {{k("G", 0)}}},
      {"c6", Label::kRefutes, {{k("E", 0)}}},
  };
  std::vector<Prediction> preds{
      {"c6", Label::kRefutes, {k("F", 0), k("F", 1), k("F", 2), k("F", 3), k("F", 4), k("E", 0)}},
      {"c1", Label::kSupports, {k("A", 0)}},
      {"c2", Label::kRefutes, {k("B", 0), k("Y", 0)}},
      {"c3", Label::kNotEnoughInfo, {k("Z", 0)}},
      {"c4", Label::kSupports, {k("D", 0), k("C", 1)}},
      {"c5", Label::kRefutes, {k("G", 0)}},
  };
};

}  // namespace

TEST_CASE("six-claim fixture") {
  const Fixture f;
  CHECK(label_accuracy(f.preds, f.gold) == 4.0 / 6.0);
  CHECK(fever_score(f.preds, f.gold) == 2.0 / 6.0);
  CHECK(gfever_score(f.preds, f.gold) == 2.0 / 6.0);
  // Verifiable claims c2, c4, c5, c6: 10 sentences scored (c6 capped at 5),
  // 3 hits, 6 golden sentences in the unions.
  const EvidencePrf prf = evidence_prf(f.preds, f.gold);
  const double p = 3.0 / 10.0, r = 3.0 / 6.0;
  CHECK(prf.precision == p);
  CHECK(prf.recall == r);
  CHECK(prf.f1 == 2.0 * p * r / (p + r));
}

TEST_CASE("label accuracy") {
  const std::vector<GoldClaim> gold{{"a", Label::kSupports, {{k("x", 0)}}},
                                    {"b", Label::kRefutes, {{k("x", 0)}}},
                                    {"c", Label::kNotEnoughInfo, {}},
                                    {"d", Label::kSupports, {{k("x", 0)}}}};
  std::vector<Prediction> half{{"a", Label::kSupports, {}},
                               {"b", Label::kSupports, {}},
                               {"c", Label::kNotEnoughInfo, {}},
                               {"d", Label::kRefutes, {}}};
  CHECK(label_accuracy(half, gold) == 0.5);
  half[1].label = Label::kRefutes;
  half[3].label = Label::kSupports;
  CHECK(label_accuracy(half, gold) == 1.0);
  CHECK_THROWS_AS(label_accuracy(half, std::vector<GoldClaim>{}), DataError);
  half.pop_back();
  CHECK_THROWS_AS(label_accuracy(half, gold), DataError);
}

TEST_CASE("fever counting rule") {
  const std::vector<GoldClaim> gold{{"a", Label::kSupports, {{k("D1", 0), k("D1", 1)}}}};
  CHECK(fever_score(std::vector<Prediction>{{"a", Label::kSupports, {k("D1", 1), k("D1", 0)}}},
                    gold) == 1.0);
  CHECK(fever_score(std::vector<Prediction>{{"a", Label::kSupports, {k("D1", 0)}}}, gold) == 0.0);
  const std::vector<GoldClaim> nei{{"n", Label::kNotEnoughInfo, {}}};
  CHECK(fever_score(std::vector<Prediction>{{"n", Label::kNotEnoughInfo, {}}}, nei) == 1.0);
}

TEST_CASE("evidence precision, recall, F1") {
  const std::vector<GoldClaim> gold{{"a", Label::kSupports, {{k("G", 0), k("G", 1)}}}};
  SUBCASE("golden pair padded with three misses") {
    const std::vector<Prediction> p{
        {"a", Label::kSupports, {k("G", 0), k("G", 1), k("W", 0), k("W", 1), k("W", 2)}}};
    const EvidencePrf prf = evidence_prf(p, gold);
    CHECK(prf.precision == doctest::Approx(0.4));
    CHECK(prf.recall == 1.0);
    CHECK(prf.f1 == doctest::Approx(4.0 / 7.0));
  }
  SUBCASE("no overlap") {
    const std::vector<Prediction> p{{"a", Label::kSupports, {k("W", 0)}}};
    const EvidencePrf prf = evidence_prf(p, gold);
    CHECK(prf.precision == 0.0);
    CHECK(prf.recall == 0.0);
    CHECK(prf.f1 == 0.0);
  }
  SUBCASE("no verifiable claims") {
    const std::vector<GoldClaim> nei{{"n", Label::kNotEnoughInfo, {}}};
    const std::vector<Prediction> p{{"n", Label::kNotEnoughInfo, {}}};
    try {
      evidence_prf(p, nei);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("no verifiable claims") != std::string::npos);
    }
  }
}

TEST_CASE("fever never exceeds label accuracy") {
  const Fixture f;
  CHECK(fever_score(f.preds, f.gold) <= label_accuracy(f.preds, f.gold));
}
