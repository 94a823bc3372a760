#ifndef KGAT_CONFIG_HPP_
#define KGAT_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>

namespace kgat {

// Experiment settings, read from a flat key=value file. Unknown keys are
// rejected so typos do not silently fall back to defaults.
//
//   dim            token state width d                       (32)
//   kernels        kernel count K                            (21)
//   evidence       evidence nodes per claim                  (5)
//   max_len        node sequence length cap                  (130)
//   batch_size     instances per micro-batch                 (4)
//   accumulate     micro-batches per optimizer step          (8)
//   lr             peak learning rate                        (5e-5)
//   warmup         warmup proportion of total steps          (0.1)
//   epochs         maximum epochs                            (2)
//   patience       stop after this many epochs without a dev LA
//                  improvement; 0 disables                    (0)
//   target_dev_la  stop once dev LA reaches this; 0 disables (0)
//   seed           initialization and shuffling seed         (1)
//   threads        evaluation worker threads                 (1)
//   ranker_dim, ranker_epochs, ranker_lr, ranker_margin      (32, 3, 1e-3, 1)
struct TrainConfig {
  std::size_t dim = 32;
  std::size_t kernels = 21;
  std::size_t evidence = 5;
  std::size_t max_len = 130;
  std::size_t batch_size = 4;
  std::size_t accumulate = 8;
  double lr = 5e-5;
  double warmup = 0.1;
  std::size_t epochs = 2;
  std::size_t patience = 0;
  double target_dev_la = 0.0;
  std::uint64_t seed = 1;
  std::size_t threads = 1;

  std::size_t ranker_dim = 32;
  std::size_t ranker_epochs = 3;
  double ranker_lr = 1e-3;
  double ranker_margin = 1.0;

  // Throws UsageError on out-of-range values.
  void validate() const;
  void set(const std::string& key, const std::string& value);
  std::map<std::string, std::string> to_map() const;
  std::string to_string() const;
};

TrainConfig parse_config(const std::string& text);
TrainConfig load_config(const std::string& path);

}  // namespace kgat

#endif  // KGAT_CONFIG_HPP_
