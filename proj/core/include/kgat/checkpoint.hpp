#ifndef KGAT_CHECKPOINT_HPP_
#define KGAT_CHECKPOINT_HPP_

#include <cstdint>
#include <optional>
#include <string>

#include "kgat/kernels.hpp"
#include "kgat/model.hpp"
#include "kgat/optim.hpp"
#include "kgat/tensor.hpp"
#include "kgat/vocabulary.hpp"

namespace kgat {

inline constexpr int kCheckpointVersion = 1;

// Everything needed to rebuild a trained model and resume its optimizer.
struct Checkpoint {
  ModelConfig config;
  AblationMode mode;
  KernelBank bank;
  Vocabulary vocabulary;
  ParameterSet params;
  AdamState optimizer;
  std::uint64_t seed = 0;

  KgatModel to_model() const;
  static Checkpoint from_model(const KgatModel& model, AblationMode mode,
                               const AdamState& optimizer, std::uint64_t seed);
};

// Text format: a "KGATCKPT <version>" header line followed by config,
// kernel, vocabulary, parameter and moment records. Reals use 17
// significant digits, so load(save(x)) is exact.
std::string serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint parse_checkpoint(const std::string& text);

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
// Throws DataError on unknown version, truncation, or a missing parameter.
// With `expected`, a different model config fails with "config mismatch".
Checkpoint load_checkpoint(const std::string& path,
                           const std::optional<ModelConfig>& expected = std::nullopt);

}  // namespace kgat

#endif  // KGAT_CHECKPOINT_HPP_
