#include <doctest.h>

#include "kgat/checkpoint.hpp"
#include "kgat/errors.hpp"
#include "kgat/random.hpp"
#include "kgat/synthetic.hpp"
#include "temp_dir.hpp"

using namespace kgat;

namespace {

Checkpoint small_checkpoint(std::uint64_t seed) {
  ModelConfig mc;
  mc.dim = 6;
  mc.kernel_count = 5;
  KgatModel model(mc, random_instance_vocabulary(RandomInstanceSpec{}), seed);
  AdamState opt = AdamState::zeros_like(model.params());
  opt.step = 3;
  Rng rng(seed);
  for (Tensor& t : opt.first) {
    for (double& v : t.values()) v = rng.uniform(-1.0, 1.0);
  }
  for (Tensor& t : opt.second) {
    for (double& v : t.values()) v = rng.uniform();
  }
  return Checkpoint::from_model(model, AblationMode::edge_only(), opt, seed);
}

}  // namespace

TEST_CASE("checkpoint round trip is exact") {
  const Checkpoint ck = small_checkpoint(4);
  testing::TempDir dir;
  const std::string path = dir.file("model.ckpt");
  save_checkpoint(ck, path);
  const Checkpoint back = load_checkpoint(path);
  CHECK(back.config == ck.config);
  CHECK(back.mode == ck.mode);
  CHECK(back.seed == 4);
  CHECK(back.vocabulary == ck.vocabulary);
  CHECK(back.optimizer.step == 3);
  REQUIRE(back.params.size() == ck.params.size());
  for (std::size_t i = 0; i < ck.params.size(); ++i) {
    CHECK(back.params[i].name == ck.params[i].name);
    const auto a = ck.params[i].value.values();
    const auto b = back.params[i].value.values();
    CHECK(std::equal(a.begin(), a.end(), b.begin(), b.end()));
    const auto m = ck.optimizer.first[i].values();
    const auto mb = back.optimizer.first[i].values();
    CHECK(std::equal(m.begin(), m.end(), mb.begin(), mb.end()));
  }
  CHECK(serialize_checkpoint(back) == serialize_checkpoint(ck));

  KgatModel m1 = ck.to_model();
  KgatModel m2 = back.to_model();
  Rng rng(10);
  for (int i = 0; i < 5; ++i) {
    const ClaimInstance inst = random_instance(rng, RandomInstanceSpec{});
    const ForwardResult r1 = m1.forward(inst, AblationMode::full());
    const ForwardResult r2 = m2.forward(inst, AblationMode::full());
    CHECK(r1.probs == r2.probs);
    CHECK(r1.loss == r2.loss);
  }
}

TEST_CASE("checkpoint load errors") {
  const Checkpoint ck = small_checkpoint(2);
  const std::string text = serialize_checkpoint(ck);
  testing::TempDir dir;

  SUBCASE("truncated file") {
    const std::string path = dir.write("cut.ckpt", text.substr(0, text.size() / 2));
    CHECK_THROWS_AS(load_checkpoint(path), DataError);
  }
  SUBCASE("unknown version") {
    std::string bad = text;
    bad.replace(0, bad.find('\n'), "KGATCKPT 99");
    CHECK_THROWS_AS(parse_checkpoint(bad), DataError);
  }
  SUBCASE("missing file names the path") {
    const std::string path = dir.file("absent.ckpt");
    try {
      load_checkpoint(path);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("absent.ckpt") != std::string::npos);
    }
  }
  SUBCASE("kernel count mismatch") {
    const std::string path = dir.write("ok.ckpt", text);
    ModelConfig expected = ck.config;
    expected.kernel_count = 21;
    try {
      load_checkpoint(path, expected);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("config mismatch") != std::string::npos);
    }
    CHECK_NOTHROW(load_checkpoint(path, ck.config));
  }
}
