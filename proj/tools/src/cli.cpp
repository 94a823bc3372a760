#include "kgat_cli/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "kgat/analysis.hpp"
#include "kgat/checkpoint.hpp"
#include "kgat/config.hpp"
#include "kgat/dataset.hpp"
#include "kgat/errors.hpp"
#include "kgat/io_util.hpp"
#include "kgat/kernels.hpp"
#include "kgat/metrics.hpp"
#include "kgat/ranker.hpp"
#include "kgat/synthetic.hpp"
#include "kgat/training.hpp"

namespace kgat::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

void require_file(const std::string& path, const char* what) {
  if (!fs::is_regular_file(path)) throw DataError(std::string(what) + " not found: " + path);
}

std::string split_path(const std::string& dir, const char* name) {
  const std::string path = (fs::path(dir) / name).string();
  require_file(path, "dataset split");
  return path;
}

// Vocabulary shipped with a data directory, or built from its training split.
Vocabulary data_vocabulary(const std::string& dir, const std::vector<ClaimRecord>& train) {
  const fs::path vocab_path = fs::path(dir) / "vocab.txt";
  if (fs::is_regular_file(vocab_path)) return Vocabulary::load(vocab_path.string());
  Vocabulary v;
  for (const auto& r : train) {
    for (const auto& t : r.claim_tokens) v.add(t);
    for (const auto& c : r.candidates) {
      for (const auto& t : c.title_tokens) v.add(t);
      for (const auto& t : c.sentence_tokens) v.add(t);
    }
  }
  return v;
}

// A vocab.txt beside an evaluation file must agree with the checkpoint.
void check_vocabulary(const std::string& data_file, const Vocabulary& vocab) {
  const fs::path vocab_path = fs::path(data_file).parent_path() / "vocab.txt";
  if (fs::is_regular_file(vocab_path) && !(Vocabulary::load(vocab_path.string()) == vocab)) {
    throw DataError("config mismatch: " + vocab_path.string() +
                    " differs from the checkpoint vocabulary");
  }
}

TrainConfig resolve_config(const std::string& config_path, const std::vector<std::string>& sets) {
  TrainConfig config;
  if (!config_path.empty()) {
    require_file(config_path, "config");
    config = load_config(config_path);
  }
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return config;
}

Json prf_json(const EvidencePrf& prf) {
  return {{"precision", prf.precision}, {"recall", prf.recall}, {"f1", prf.f1}};
}

std::vector<GoldClaim> gold_of(const std::vector<ClaimInstance>& data) {
  std::vector<GoldClaim> gold;
  gold.reserve(data.size());
  for (const auto& inst : data) gold.push_back(GoldClaim::from(inst));
  return gold;
}

// ---------------------------------------------------------------- commands

struct GenSynthArgs {
  std::string out;
  SyntheticSpec spec;
};

int gen_synth(const GenSynthArgs& a, std::ostream& out) {
  const auto corpus = generate_synthetic(a.spec);
  write_corpus(corpus, a.out);
  out << "wrote " << corpus.train.size() << " train and " << corpus.dev.size()
      << " dev claims to " << a.out << " (vocab " << corpus.vocabulary.size() << ")\n";
  return kOk;
}

struct TrainArgs {
  std::string data;
  std::string config;
  std::string mode = "full";
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::vector<std::string> sets;
  bool quiet = false;
};

int train_cmd(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  const AblationMode mode = AblationMode::parse(a.mode);
  TrainConfig config = resolve_config(a.config, a.sets);
  if (a.seed) config.seed = *a.seed;
  if (a.threads) config.threads = *a.threads;
  config.validate();

  const auto train_records = read_records(split_path(a.data, "train.jsonl"));
  const auto dev_records = read_records(split_path(a.data, "dev.jsonl"));
  const Vocabulary vocab = data_vocabulary(a.data, train_records);
  const auto train_set = prepare(train_records, {config.evidence, true});
  const auto dev_set = prepare(dev_records, {config.evidence, false});

  auto progress = [&](const EpochRecord& e) {
    if (a.quiet) return;
    err << "epoch " << e.epoch << " loss " << fixed(e.train_loss) << " dev_la "
        << fixed(e.dev_la) << " dev_fever " << fixed(e.dev_fever) << '\n';
  };
  const TrainResult result = train(train_set, dev_set, vocab, config, mode, config.seed, progress);
  save_checkpoint(result.checkpoint, a.out);
  write_file_atomic(a.out + ".history.json", result.history.to_json() + "\n");
  out << "mode " << mode.name() << " seed " << config.seed << " best_epoch "
      << result.history.best_epoch << " best_dev_la " << fixed(result.history.best_dev_la)
      << '\n';
  return kOk;
}

struct EvalArgs {
  std::string data;
  std::string ckpt;
  std::string report;
  std::string mode;
  std::string predictions;
  bool golden = false;
  std::size_t threads = 1;
};

int eval_cmd(const EvalArgs& a, std::ostream& out) {
  require_file(a.data, "data file");
  require_file(a.ckpt, "checkpoint");
  const Checkpoint ckpt = load_checkpoint(a.ckpt);
  check_vocabulary(a.data, ckpt.vocabulary);
  const AblationMode mode = a.mode.empty() ? ckpt.mode : AblationMode::parse(a.mode);
  KgatModel model = ckpt.to_model();
  const auto data = load_dataset(a.data, {ckpt.config.evidence_per_claim, a.golden});

  EvaluateOptions opts;
  opts.threads = a.threads;
  opts.keep_traces = false;
  const EvaluationResult result = evaluate(model, data, mode, opts);
  const auto preds = result.predictions();
  const auto gold = gold_of(data);

  Json report;
  report["mode"] = std::string(mode.name());
  report["condition"] = a.golden ? "golden" : "retrieved";
  report["claims"] = result.summary.claims;
  report["label_accuracy"] = result.summary.label_accuracy;
  report[a.golden ? "gfever" : "fever"] =
      a.golden ? gfever_score(preds, gold) : result.summary.fever;
  if (result.summary.has_evidence_metrics) report["evidence@5"] = prf_json(result.summary.evidence);
  const auto multi = multi_evidence_subset(data);
  if (!multi.empty()) {
    report["multi_evidence"] = {{"claims", multi.size()},
                                {"label_accuracy", label_accuracy(preds, gold_of(multi))}};
  }
  write_file_atomic(a.report, report.dump(2) + "\n");

  if (!a.predictions.empty()) {
    std::string lines;
    for (const auto& c : result.claims) {
      Json j;
      j["claim_id"] = c.claim_id;
      j["label"] = std::string(label_name(c.predicted));
      j["probs"] = c.probs;
      j["selection"] = c.selection;
      Json ev = Json::array();
      for (const auto& k : c.top_evidence) ev.push_back({k.first, k.second});
      j["evidence"] = ev;
      lines += j.dump() + "\n";
    }
    write_file_atomic(a.predictions, lines);
  }
  out << "LA " << fixed(result.summary.label_accuracy) << (a.golden ? " GFEVER " : " FEVER ")
      << fixed(report[a.golden ? "gfever" : "fever"].get<double>()) << '\n';
  return kOk;
}

struct RankerTrainArgs {
  std::string data;
  std::string config;
  std::string out;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
};

// Share of claims whose golden sentences all land in the top-k ranked list.
double golden_in_top_k(const std::vector<ClaimRecord>& records, RankerModel& model,
                       std::size_t k) {
  std::size_t verifiable = 0, hits = 0;
  for (const auto& r : records) {
    std::vector<SentenceKey> golden;
    for (const auto& set : r.golden_sets) golden.insert(golden.end(), set.begin(), set.end());
    if (golden.empty()) continue;
    ++verifiable;
    const auto ranked = rank(r.claim_tokens, r.candidates, model, k);
    const bool all = std::all_of(golden.begin(), golden.end(), [&](const SentenceKey& g) {
      return std::any_of(ranked.begin(), ranked.end(),
                         [&](const ScoredCandidate& c) { return c.sentence.key() == g; });
    });
    hits += all ? 1 : 0;
  }
  return verifiable ? static_cast<double>(hits) / static_cast<double>(verifiable) : 0.0;
}

int train_ranker_cmd(const RankerTrainArgs& a, std::ostream& out, std::ostream& err) {
  TrainConfig config = resolve_config(a.config, a.sets);
  if (a.seed) config.seed = *a.seed;
  config.validate();
  const auto train_records = read_records(split_path(a.data, "train.jsonl"));
  const Vocabulary vocab = data_vocabulary(a.data, train_records);
  RankerModel model(config.ranker_dim, vocab, default_bank(config.kernels), config.seed);
  RankerTrainOptions opts;
  opts.epochs = config.ranker_epochs;
  opts.lr = config.ranker_lr;
  opts.margin = config.ranker_margin;
  opts.seed = config.seed;
  const auto history = train_ranker(model, train_records, opts);
  for (std::size_t e = 0; e < history.epoch_loss.size(); ++e) {
    err << "ranker epoch " << e + 1 << " hinge " << fixed(history.epoch_loss[e]) << '\n';
  }
  save_ranker(model, a.out);
  const fs::path dev_path = fs::path(a.data) / "dev.jsonl";
  if (fs::is_regular_file(dev_path)) {
    const auto dev = read_records(dev_path.string());
    out << "dev golden_in_top5 " << fixed(golden_in_top_k(dev, model, 5)) << '\n';
  }
  return kOk;
}

struct RankArgs {
  std::string data;
  std::string ckpt;
  std::string out;
  std::size_t k = 5;
};

int rank_cmd(const RankArgs& a, std::ostream& out) {
  require_file(a.data, "data file");
  require_file(a.ckpt, "ranker checkpoint");
  if (a.k == 0) throw UsageError("--k must be positive");
  RankerModel model = load_ranker(a.ckpt);
  auto records = read_records(a.data);
  std::string text;
  for (auto& r : records) {
    const auto ranked = rank(r.claim_tokens, r.candidates, model, a.k);
    r.candidates.clear();
    for (const auto& c : ranked) {
      EvidenceSentence s = c.sentence;
      s.retrieval_score = c.score;
      r.candidates.push_back(std::move(s));
    }
    text += serialize_record(r) + "\n";
  }
  write_file_atomic(a.out, text);
  out << "ranked " << records.size() << " claims (k=" << a.k << ") -> " << a.out << '\n';
  return kOk;
}

struct GradcheckArgs {
  std::uint64_t seed = 1;
  double eps = 1e-5;
  double tol = 1e-3;
  std::string mode = "all";
  std::size_t dim = 16;
};

int gradcheck_cmd(const GradcheckArgs& a, std::ostream& out) {
  std::vector<AblationMode> modes;
  if (a.mode == "all") {
    const auto all = AblationMode::all();
    modes.assign(all.begin(), all.end());
  } else {
    modes.push_back(AblationMode::parse(a.mode));
  }
  RandomInstanceSpec spec;
  Rng rng(a.seed);
  const ClaimInstance inst = random_instance(rng, spec);
  ModelConfig mc;
  mc.dim = a.dim;
  mc.vocab_size = random_instance_vocabulary(spec).size();
  GradcheckOptions opts{a.eps, a.tol};

  bool ok = true;
  char line[256];
  for (const AblationMode mode : modes) {
    KgatModel model(mc, random_instance_vocabulary(spec), a.seed);
    const GradcheckReport report = gradcheck_model(model, inst, mode, opts);
    out << "mode " << mode.name() << '\n';
    std::snprintf(line, sizeof(line), "  %-32s %8s %12s %14s %14s %s\n", "parameter", "checked",
                  "max_rel_err", "analytic", "numeric", "");
    out << line;
    for (const auto& e : report.entries) {
      std::snprintf(line, sizeof(line), "  %-32s %8zu %12.3e %14.6e %14.6e %s\n", e.name.c_str(),
                    e.checked, e.max_rel_error, e.analytic, e.numeric, e.passed ? "ok" : "FAIL");
      out << line;
    }
    ok = ok && report.passed();
  }
  out << (ok ? "gradcheck passed\n" : "gradcheck FAILED\n");
  return ok ? kOk : kNumeric;
}

struct AnalyzeArgs {
  std::string data;
  std::string ckpt;
  std::string report;
  std::string mode;
  std::string case_id;
  std::string edge;
  std::string table;
  std::string weights;
  std::size_t threads = 1;
};

// "q,p" with 1-based node numbers.
std::pair<std::size_t, std::size_t> parse_edge(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw UsageError("--edge expects q,p");
  try {
    const long q = std::stol(text.substr(0, comma));
    const long p = std::stol(text.substr(comma + 1));
    if (q < 1 || p < 1) throw UsageError("--edge nodes are numbered from 1");
    return {static_cast<std::size_t>(q - 1), static_cast<std::size_t>(p - 1)};
  } catch (const std::logic_error&) {
    throw UsageError("--edge expects q,p, got '" + text + "'");
  }
}

int analyze_cmd(const AnalyzeArgs& a, std::ostream& out) {
  require_file(a.data, "data file");
  require_file(a.ckpt, "checkpoint");
  if (!a.edge.empty() && a.case_id.empty()) throw UsageError("--edge requires --case");
  const Checkpoint ckpt = load_checkpoint(a.ckpt);
  check_vocabulary(a.data, ckpt.vocabulary);
  const AblationMode mode = a.mode.empty() ? ckpt.mode : AblationMode::parse(a.mode);
  KgatModel model = ckpt.to_model();
  const auto data = load_dataset(a.data, {ckpt.config.evidence_per_claim, false});
  EvaluateOptions opts;
  opts.threads = a.threads;
  const EvaluationResult result = evaluate(model, data, mode, opts);
  const auto gold = gold_of(data);

  const EntropyReport ent = entropy_report(result.traces);
  Json report;
  report["mode"] = std::string(mode.name());
  report["claims"] = result.summary.claims;
  report["label_accuracy"] = result.summary.label_accuracy;
  report["entropy"] = {{"node", ent.node_entropy},         {"node_uniform", ent.node_uniform},
                       {"sentence", ent.sentence_entropy}, {"sentence_uniform", ent.sentence_uniform},
                       {"edge", ent.edge_entropy},         {"edge_uniform", ent.edge_uniform}};
  Json recall;
  for (std::size_t k = 1; k <= ckpt.config.evidence_per_claim; ++k) {
    recall["@" + std::to_string(k)] = selection_recall_at_k(result.traces, gold, k);
  }
  report["selection_recall"] = recall;
  report["max_selection_histogram"] = max_selection_weight_histogram(result.traces);

  if (!a.weights.empty()) {
    std::string text;
    for (double w : sorted_token_weights(result.traces)) text += format_double(w) + "\n";
    write_file_atomic(a.weights, text);
  }

  if (!a.case_id.empty()) {
    const auto it = std::find_if(result.traces.begin(), result.traces.end(),
                                 [&](const AttentionTrace& t) { return t.claim_id == a.case_id; });
    if (it == result.traces.end()) throw DataError("unknown claim " + a.case_id);
    const auto [q, p] = a.edge.empty() ? std::pair<std::size_t, std::size_t>{1, 0}
                                       : parse_edge(a.edge);
    const CaseExport c = export_case_attention(*it, model.vocabulary(), q, p);
    Json tokens = Json::array();
    for (const auto& t : c.tokens) {
      tokens.push_back({{"position", t.position}, {"token", t.token}, {"weight", t.weight}});
    }
    report["case"] = {{"claim_id", c.claim_id}, {"from", c.from + 1}, {"to", c.to + 1},
                      {"tokens", tokens},       {"beta_to", c.beta_to}, {"selection", c.selection}};
    const std::string table = format_case_table(c);
    if (a.table.empty()) {
      out << table;
    } else {
      write_file_atomic(a.table, table);
    }
  }
  write_file_atomic(a.report, report.dump(2) + "\n");
  out << "node entropy " << fixed(ent.node_entropy) << " (uniform " << fixed(ent.node_uniform)
      << ") recall@1 " << fixed(recall["@1"].get<double>()) << '\n';
  return kOk;
}

struct KernelsArgs {
  std::size_t count = kDefaultKernelCount;
  std::string ckpt;
};

int kernels_cmd(const KernelsArgs& a, std::ostream& out) {
  if (!a.ckpt.empty()) {
    require_file(a.ckpt, "checkpoint");
    out << load_checkpoint(a.ckpt).bank.describe();
  } else {
    out << default_bank(a.count).describe();
  }
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kernel graph attention for claim verification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "kgat 0.1.0");

  GenSynthArgs gs;
  auto* c_gen = app.add_subcommand("gen-synth", "Generate a synthetic claim-verification corpus");
  c_gen->add_option("--out", gs.out, "Output directory")->required();
  c_gen->add_option("--seed", gs.spec.seed, "Generator seed");
  c_gen->add_option("--train", gs.spec.n_train, "Training claims");
  c_gen->add_option("--dev", gs.spec.n_dev, "Dev claims");
  c_gen->add_option("--multi-frac", gs.spec.multi_frac, "Share of multi-evidence claims")
      ->check(CLI::Range(0.0, 1.0));

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Train a model");
  c_train->add_option("--data", tr.data, "Directory with train.jsonl and dev.jsonl")->required();
  c_train->add_option("--config", tr.config, "key=value config file");
  c_train->add_option("--mode", tr.mode, "full, node, edge or gat");
  c_train->add_option("--out", tr.out, "Checkpoint path")->required();
  c_train->add_option("--seed", tr.seed, "Overrides the config seed");
  c_train->add_option("--threads", tr.threads, "Evaluation threads");
  c_train->add_option("--set", tr.sets, "Config override key=value (repeatable)");
  c_train->add_flag("--quiet", tr.quiet, "No per-epoch progress");

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  c_eval->add_option("--data", ev.data, "Dataset file")->required();
  c_eval->add_option("--ckpt", ev.ckpt, "Checkpoint")->required();
  c_eval->add_option("--report", ev.report, "Report path (JSON)")->required();
  c_eval->add_option("--mode", ev.mode, "Override the checkpoint's mode");
  c_eval->add_option("--predictions", ev.predictions, "Per-claim predictions (JSONL)");
  c_eval->add_flag("--golden-evidence", ev.golden, "Supply golden evidence as candidates");
  c_eval->add_option("--threads", ev.threads, "Worker threads")->check(CLI::PositiveNumber);

  RankerTrainArgs rt;
  auto* c_rt = app.add_subcommand("train-ranker", "Train the sentence ranker");
  c_rt->add_option("--data", rt.data, "Directory with train.jsonl")->required();
  c_rt->add_option("--out", rt.out, "Ranker checkpoint path")->required();
  c_rt->add_option("--config", rt.config, "key=value config file");
  c_rt->add_option("--set", rt.sets, "Config override key=value (repeatable)");
  c_rt->add_option("--seed", rt.seed, "Overrides the config seed");

  RankArgs rk;
  auto* c_rank = app.add_subcommand("rank", "Rank candidates with a trained ranker");
  c_rank->add_option("--data", rk.data, "Dataset file")->required();
  c_rank->add_option("--ckpt", rk.ckpt, "Ranker checkpoint")->required();
  c_rank->add_option("--k", rk.k, "Sentences kept per claim");
  c_rank->add_option("--out", rk.out, "Output dataset file")->required();

  GradcheckArgs gc;
  auto* c_gc = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  c_gc->add_option("--seed", gc.seed, "Instance and weight seed");
  c_gc->add_option("--eps", gc.eps, "Central difference step");
  c_gc->add_option("--tol", gc.tol, "Relative error tolerance");
  c_gc->add_option("--mode", gc.mode, "full, node, edge, gat or all");
  c_gc->add_option("--dim", gc.dim, "Token state width")->check(CLI::PositiveNumber);

  AnalyzeArgs an;
  auto* c_an = app.add_subcommand("analyze", "Attention analysis of a checkpoint");
  c_an->add_option("--data", an.data, "Dataset file")->required();
  c_an->add_option("--ckpt", an.ckpt, "Checkpoint")->required();
  c_an->add_option("--report", an.report, "Report path (JSON)")->required();
  c_an->add_option("--mode", an.mode, "Override the checkpoint's mode");
  c_an->add_option("--case", an.case_id, "Claim to export edge attention for");
  c_an->add_option("--edge", an.edge, "Edge q,p (1-based) for --case; default 2,1");
  c_an->add_option("--table", an.table, "Write the case table here instead of stdout");
  c_an->add_option("--weights", an.weights, "Write sorted token weights here");
  c_an->add_option("--threads", an.threads, "Worker threads")->check(CLI::PositiveNumber);

  KernelsArgs kb;
  auto* c_k = app.add_subcommand("kernels", "Print a kernel bank");
  c_k->add_option("--count", kb.count, "Kernel count K");
  c_k->add_option("--ckpt", kb.ckpt, "Print the bank stored in a checkpoint");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*c_gen) return gen_synth(gs, out);
    if (*c_train) return train_cmd(tr, out, err);
    if (*c_eval) return eval_cmd(ev, out);
    if (*c_rt) return train_ranker_cmd(rt, out, err);
    if (*c_rank) return rank_cmd(rk, out);
    if (*c_gc) return gradcheck_cmd(gc, out);
    if (*c_an) return analyze_cmd(an, out);
    if (*c_k) return kernels_cmd(kb, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}

}  // namespace kgat::cli
