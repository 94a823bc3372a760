#include "kgat/config.hpp"

#include <sstream>

#include "kgat/errors.hpp"
#include "kgat/io_util.hpp"

namespace kgat {
namespace {

std::size_t to_count(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long n = std::stoll(v, &pos);
    if (pos != v.size() || n < 0) throw UsageError("");
    return static_cast<std::size_t>(n);
  } catch (const std::exception&) {
    throw UsageError("config: " + key + " expects a non-negative integer, got '" + v + "'");
  }
}

double to_real(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw UsageError("");
    return d;
  } catch (const std::exception&) {
    throw UsageError("config: " + key + " expects a number, got '" + v + "'");
  }
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void TrainConfig::set(const std::string& key, const std::string& value) {
  if (key == "dim") dim = to_count(key, value);
  else if (key == "kernels") kernels = to_count(key, value);
  else if (key == "evidence") evidence = to_count(key, value);
  else if (key == "max_len") max_len = to_count(key, value);
  else if (key == "batch_size") batch_size = to_count(key, value);
  else if (key == "accumulate") accumulate = to_count(key, value);
  else if (key == "lr") lr = to_real(key, value);
  else if (key == "warmup") warmup = to_real(key, value);
  else if (key == "epochs") epochs = to_count(key, value);
  else if (key == "patience") patience = to_count(key, value);
  else if (key == "target_dev_la") target_dev_la = to_real(key, value);
  else if (key == "seed") seed = to_count(key, value);
  else if (key == "threads") threads = to_count(key, value);
  else if (key == "ranker_dim") ranker_dim = to_count(key, value);
  else if (key == "ranker_epochs") ranker_epochs = to_count(key, value);
  else if (key == "ranker_lr") ranker_lr = to_real(key, value);
  else if (key == "ranker_margin") ranker_margin = to_real(key, value);
  else throw UsageError("config: unknown key '" + key + "'");
}

void TrainConfig::validate() const {
  if (dim == 0) throw UsageError("config: dim must be positive");
  if (kernels < 3 || kernels % 2 == 0) throw UsageError("config: kernels must be odd and >= 3");
  if (evidence == 0) throw UsageError("config: evidence must be positive");
  if (max_len < 4) throw UsageError("config: max_len too small");
  if (batch_size == 0 || accumulate == 0) {
    throw UsageError("config: batch_size and accumulate must be positive");
  }
  if (!(lr > 0.0)) throw UsageError("config: lr must be positive");
  if (!(warmup > 0.0 && warmup < 1.0)) throw UsageError("config: warmup must lie in (0, 1)");
  if (target_dev_la < 0.0 || target_dev_la > 1.0) {
    throw UsageError("config: target_dev_la must lie in [0, 1]");
  }
  if (threads == 0) throw UsageError("config: threads must be positive");
  if (ranker_dim == 0 || !(ranker_lr > 0.0)) throw UsageError("config: bad ranker settings");
}

std::map<std::string, std::string> TrainConfig::to_map() const {
  return {{"dim", std::to_string(dim)},
          {"kernels", std::to_string(kernels)},
          {"evidence", std::to_string(evidence)},
          {"max_len", std::to_string(max_len)},
          {"batch_size", std::to_string(batch_size)},
          {"accumulate", std::to_string(accumulate)},
          {"lr", format_double(lr)},
          {"warmup", format_double(warmup)},
          {"epochs", std::to_string(epochs)},
          {"patience", std::to_string(patience)},
          {"target_dev_la", format_double(target_dev_la)},
          {"seed", std::to_string(seed)},
          {"threads", std::to_string(threads)},
          {"ranker_dim", std::to_string(ranker_dim)},
          {"ranker_epochs", std::to_string(ranker_epochs)},
          {"ranker_lr", format_double(ranker_lr)},
          {"ranker_margin", format_double(ranker_margin)}};
}

std::string TrainConfig::to_string() const {
  std::string out;
  for (const auto& [k, v] : to_map()) out += k + "=" + v + "\n";
  return out;
}

TrainConfig parse_config(const std::string& text) {
  TrainConfig c;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config line " + std::to_string(n) + ": expected key=value");
    }
    c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  c.validate();
  return c;
}

TrainConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const DataError&) {
    throw DataError("cannot open config " + path);
  }
  return parse_config(text);
}

}  // namespace kgat
