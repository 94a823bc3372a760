#include "kgat/checkpoint.hpp"

#include <sstream>

#include "kgat/errors.hpp"
#include "kgat/io_util.hpp"
#include "text_records.hpp"

namespace kgat {

using namespace text_records;

KgatModel Checkpoint::to_model() const { return KgatModel(config, vocabulary, bank, params); }

Checkpoint Checkpoint::from_model(const KgatModel& model, AblationMode mode,
                                  const AdamState& optimizer, std::uint64_t seed) {
  return Checkpoint{model.config(), mode,      model.bank(), model.vocabulary(),
                    model.params(), optimizer, seed};
}

std::string serialize_checkpoint(const Checkpoint& c) {
  std::ostringstream out;
  out << "KGATCKPT " << kCheckpointVersion << '\n';
  out << "config dim " << c.config.dim << " kernels " << c.config.kernel_count << " evidence "
      << c.config.evidence_per_claim << " max_len " << c.config.max_len << " vocab "
      << c.config.vocab_size << '\n';
  out << "mode " << c.mode.name() << '\n';
  out << "seed " << c.seed << '\n';
  out << "kernels " << c.bank.size() << '\n';
  for (const auto& k : c.bank.kernels()) {
    out << "kernel " << format_double(k.mu) << ' ' << format_double(k.sigma) << '\n';
  }
  out << "vocab " << c.vocabulary.size() << '\n';
  for (const auto& t : c.vocabulary.tokens()) out << t << '\n';
  out << "params " << c.params.size() << '\n';
  for (const auto& p : c.params) write_tensor(out, "param", p.name, p.value);
  const bool has_moments = c.optimizer.matches(c.params);
  out << "adam " << c.optimizer.step << ' ' << (has_moments ? 1 : 0) << '\n';
  if (has_moments) {
    for (std::size_t i = 0; i < c.params.size(); ++i) {
      write_tensor(out, "moment1", c.params[i].name, c.optimizer.first[i]);
      write_tensor(out, "moment2", c.params[i].name, c.optimizer.second[i]);
    }
  }
  out << "end\n";
  return out.str();
}

Checkpoint parse_checkpoint(const std::string& text) {
  LineReader r(text);
  const auto header = r.next("header");
  if (header.size() != 2 || header[0] != "KGATCKPT") throw DataError("not a KGAT checkpoint");
  if (header[1] != std::to_string(kCheckpointVersion)) {
    throw DataError("unknown checkpoint version " + header[1]);
  }
  Checkpoint c;
  const auto cfg = r.next("config");
  expect(cfg, "config", 11);
  for (std::size_t i = 1; i + 1 < cfg.size(); i += 2) {
    const std::size_t v = to_size(cfg[i + 1]);
    if (cfg[i] == "dim") c.config.dim = v;
    else if (cfg[i] == "kernels") c.config.kernel_count = v;
    else if (cfg[i] == "evidence") c.config.evidence_per_claim = v;
    else if (cfg[i] == "max_len") c.config.max_len = v;
    else if (cfg[i] == "vocab") c.config.vocab_size = v;
    else throw DataError("unknown config key " + cfg[i]);
  }
  const auto mode = r.next("mode");
  expect(mode, "mode", 2);
  c.mode = AblationMode::parse(mode[1]);
  const auto seed = r.next("seed");
  expect(seed, "seed", 2);
  c.seed = to_size(seed[1]);

  const auto kh = r.next("kernels");
  expect(kh, "kernels", 2);
  std::vector<GaussianKernel> kernels;
  for (std::size_t k = 0, n = to_size(kh[1]); k < n; ++k) {
    const auto f = r.next("kernel");
    expect(f, "kernel", 3);
    kernels.push_back({parse_double(f[1]), parse_double(f[2])});
  }
  try {
    c.bank = KernelBank(std::move(kernels));
  } catch (const UsageError& e) {
    throw DataError(std::string("invalid kernel bank: ") + e.what());
  }

  const auto vh = r.next("vocab");
  expect(vh, "vocab", 2);
  std::vector<std::string> tokens;
  for (std::size_t i = 0, n = to_size(vh[1]); i < n; ++i) tokens.push_back(r.raw("vocab token"));
  c.vocabulary = Vocabulary::from_tokens(tokens);

  const auto ph = r.next("params");
  expect(ph, "params", 2);
  for (std::size_t i = 0, n = to_size(ph[1]); i < n; ++i) {
    std::string name;
    Tensor t = read_tensor(r, "param", &name);
    c.params.add(name, std::move(t));
  }

  const auto ah = r.next("adam");
  expect(ah, "adam", 3);
  c.optimizer.step = to_size(ah[1]);
  if (ah[2] == "1") {
    for (std::size_t i = 0; i < c.params.size(); ++i) {
      std::string n1, n2;
      Tensor m1 = read_tensor(r, "moment1", &n1);
      Tensor m2 = read_tensor(r, "moment2", &n2);
      if (n1 != c.params[i].name || n2 != c.params[i].name) {
        throw DataError("optimizer moments out of order at " + c.params[i].name);
      }
      c.optimizer.first.push_back(std::move(m1));
      c.optimizer.second.push_back(std::move(m2));
    }
  } else {
    c.optimizer = AdamState::zeros_like(c.params);
    c.optimizer.step = to_size(ah[1]);
  }
  const auto tail = r.next("end marker");
  expect(tail, "end", 1);
  return c;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path) {
  write_file_atomic(path, serialize_checkpoint(checkpoint));
}

Checkpoint load_checkpoint(const std::string& path, const std::optional<ModelConfig>& expected) {
  Checkpoint c;
  try {
    c = parse_checkpoint(read_file(path));
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
  if (expected && !(c.config == *expected)) {
    throw DataError(path + ": config mismatch (checkpoint K=" +
                    std::to_string(c.config.kernel_count) + ", d=" +
                    std::to_string(c.config.dim) + "; expected K=" +
                    std::to_string(expected->kernel_count) + ", d=" +
                    std::to_string(expected->dim) + ")");
  }
  if (c.bank.size() != c.config.kernel_count) {
    throw DataError(path + ": config mismatch (kernel count)");
  }
  // Builds the model once so a missing or misshaped parameter fails here.
  (void)c.to_model();
  return c;
}

}  // namespace kgat
