#include "kgat/training.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "kgat/errors.hpp"
#include "kgat/optim.hpp"
#include "kgat/random.hpp"

namespace kgat {

std::string TrainHistory::to_json() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["mode"] = mode;
  j["best_epoch"] = best_epoch;
  j["best_dev_la"] = best_dev_la;
  auto& ep = j["epochs"] = nlohmann::ordered_json::array();
  for (const auto& e : epochs) {
    ep.push_back({{"epoch", e.epoch},
                  {"shuffle_seed", e.shuffle_seed},
                  {"train_loss", e.train_loss},
                  {"dev_la", e.dev_la},
                  {"dev_fever", e.dev_fever}});
  }
  auto& st = j["steps"] = nlohmann::ordered_json::array();
  for (const auto& s : steps) st.push_back({{"step", s.step}, {"lr", s.lr}, {"loss", s.loss}});
  return j.dump(2);
}

double accumulate_gradients(KgatModel& model, std::span<const ClaimInstance> batch,
                            AblationMode mode, double scale) {
  double total = 0.0;
  for (const auto& instance : batch) total += model.forward_backward(instance, mode, scale).loss;
  return total;
}

namespace {

// Each epoch's shuffle comes from its own seed so a run can be replayed from
// the history alone.
std::uint64_t epoch_seed(std::uint64_t seed, std::size_t epoch) {
  Rng rng(seed ^ (0x9e3779b97f4a7c15ULL * (epoch + 1)));
  return static_cast<std::uint64_t>(rng.uniform() * 9007199254740992.0);
}

}  // namespace

TrainResult train(const std::vector<ClaimInstance>& train_set,
                  const std::vector<ClaimInstance>& dev_set, const Vocabulary& vocab,
                  const TrainConfig& config, AblationMode mode, std::uint64_t seed,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.empty()) throw DataError("empty training set");
  if (dev_set.empty()) throw DataError("empty dev set");

  ModelConfig mc;
  mc.dim = config.dim;
  mc.kernel_count = config.kernels;
  mc.evidence_per_claim = config.evidence;
  mc.max_len = config.max_len;
  mc.vocab_size = vocab.size();
  KgatModel model(mc, vocab, seed);
  AdamState adam = AdamState::zeros_like(model.params());

  const std::size_t group = config.batch_size * config.accumulate;
  const std::size_t steps_per_epoch = (train_set.size() + group - 1) / group;
  const std::size_t total_steps = steps_per_epoch * config.epochs;
  const double scale = 1.0 / static_cast<double>(group);

  TrainHistory history;
  history.seed = seed;
  history.mode = std::string(mode.name());

  EvaluateOptions eval_opts;
  eval_opts.threads = config.threads;
  eval_opts.keep_traces = false;

  ParameterSet best = model.params();
  AdamState best_adam = adam;
  history.best_dev_la = evaluate(model, dev_set, mode, eval_opts).summary.label_accuracy;
  history.best_epoch = 0;

  std::vector<std::size_t> order(train_set.size());
  std::size_t step = 0;
  std::size_t stale = 0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.shuffle_seed = epoch_seed(seed, epoch);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffler(rec.shuffle_seed);
    shuffler.shuffle(order);

    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += group) {
      const std::size_t end = std::min(order.size(), begin + group);
      model.params().zero_grad();
      double loss = 0.0;
      for (std::size_t i = begin; i < end; ++i) {
        loss += model.forward_backward(train_set[order[i]], mode, scale).loss;
      }
      if (!std::isfinite(loss)) throw NumericError("non-finite training loss at step " +
                                                   std::to_string(step + 1));
      ++step;
      const double lr = lr_schedule(step, total_steps, config.lr, config.warmup);
      adam_step(model.params(), adam, lr);
      history.steps.push_back({step, lr, loss / static_cast<double>(end - begin)});
      epoch_loss += loss;
    }
    rec.train_loss = epoch_loss / static_cast<double>(order.size());

    const auto dev = evaluate(model, dev_set, mode, eval_opts);
    rec.dev_la = dev.summary.label_accuracy;
    rec.dev_fever = dev.summary.fever;
    history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (rec.dev_la > history.best_dev_la) {
      history.best_dev_la = rec.dev_la;
      history.best_epoch = epoch;
      best = model.params();
      best_adam = adam;
      stale = 0;
    } else {
      ++stale;
    }
    if (config.target_dev_la > 0.0 && history.best_dev_la >= config.target_dev_la) break;
    if (config.patience > 0 && stale >= config.patience) break;
  }

  for (std::size_t i = 0; i < best.size(); ++i) model.params()[i].value = best[i].value;
  model.params().zero_grad();
  return {Checkpoint::from_model(model, mode, best_adam, seed), std::move(history)};
}

std::vector<Prediction> EvaluationResult::predictions() const {
  std::vector<Prediction> out;
  out.reserve(claims.size());
  for (const auto& c : claims) out.push_back({c.claim_id, c.predicted, c.top_evidence});
  return out;
}

namespace {

ClaimEvaluation evaluate_one(KgatModel& model, const ClaimInstance& instance, AblationMode mode,
                             AttentionTrace* trace_out) {
  ForwardResult r = model.forward(instance, mode);
  ClaimEvaluation e;
  e.claim_id = instance.claim_id;
  e.gold = instance.label;
  e.predicted = r.predicted();
  e.probs = r.probs;
  e.selection = r.trace.selection;
  e.multi_evidence = instance.is_multi_evidence();
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < r.trace.valid.size(); ++i) {
    if (r.trace.valid[i]) idx.push_back(i);
  }
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return e.selection[a] > e.selection[b];
  });
  for (std::size_t k = 0; k < idx.size() && k < kFeverEvidenceLimit; ++k) {
    e.top_evidence.push_back(instance.candidates[idx[k]].key());
  }
  if (trace_out) *trace_out = std::move(r.trace);
  return e;
}

}  // namespace

EvaluationResult evaluate(KgatModel& model, const std::vector<ClaimInstance>& dataset,
                          AblationMode mode, const EvaluateOptions& options) {
  if (dataset.empty()) throw DataError("empty evaluation set");
  EvaluationResult result;
  result.claims.resize(dataset.size());
  if (options.keep_traces) result.traces.resize(dataset.size());

  const std::size_t workers = std::max<std::size_t>(1, std::min(options.threads, dataset.size()));
  auto work = [&](std::size_t i) {
    result.claims[i] = evaluate_one(model, dataset[i], mode,
                                    options.keep_traces ? &result.traces[i] : nullptr);
  };
  if (workers == 1) {
    for (std::size_t i = 0; i < dataset.size(); ++i) work(i);
  } else {
    // Forward passes only read the parameters, so workers share the model.
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < dataset.size(); i = next++) {
          try {
            work(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  const auto preds = result.predictions();
  std::vector<GoldClaim> gold;
  gold.reserve(dataset.size());
  for (const auto& inst : dataset) gold.push_back(GoldClaim::from(inst));
  auto& s = result.summary;
  s.claims = dataset.size();
  s.label_accuracy = label_accuracy(preds, gold);
  s.fever = fever_score(preds, gold);
  const bool any_verifiable = std::any_of(gold.begin(), gold.end(), [](const GoldClaim& g) {
    for (const auto& set : g.golden_sets) {
      if (!set.empty()) return true;
    }
    return false;
  });
  if (any_verifiable) {
    s.evidence = evidence_prf(preds, gold);
    s.has_evidence_metrics = true;
  }
  return result;
}

GradcheckReport gradcheck_model(KgatModel& model, const ClaimInstance& instance,
                                AblationMode mode, const GradcheckOptions& options) {
  return gradcheck(
      model.params(), [&] { return model.forward(instance, mode).loss; },
      [&] {
        model.params().zero_grad();
        model.forward_backward(instance, mode);
      },
      options);
}

std::vector<ClaimInstance> multi_evidence_subset(const std::vector<ClaimInstance>& dataset) {
  std::vector<ClaimInstance> out;
  for (const auto& inst : dataset) {
    if (inst.is_multi_evidence()) out.push_back(inst);
  }
  return out;
}

}  // namespace kgat
