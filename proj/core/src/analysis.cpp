#include "kgat/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <unordered_map>

#include "kgat/errors.hpp"
#include "kgat/numerics.hpp"

namespace kgat {

double attention_entropy(std::span<const double> distribution) {
  return entropy(distribution);
}

EntropyReport entropy_report(std::span<const AttentionTrace> traces) {
  EntropyReport r;
  double node = 0.0, node_u = 0.0, sent = 0.0, sent_u = 0.0, edge = 0.0, edge_u = 0.0;
  for (const auto& t : traces) {
    const auto support = static_cast<std::size_t>(
        std::count_if(t.valid.begin(), t.valid.end(), [](std::uint8_t v) { return v != 0; }));
    if (support == 0) continue;
    ++r.claims;
    node += attention_entropy(t.selection);
    node_u += std::log(static_cast<double>(support));

    double s = 0.0;
    std::size_t sn = 0;
    for (const auto& b : t.beta) {
      if (b.empty()) continue;
      s += attention_entropy(b);
      ++sn;
    }
    sent += sn ? s / static_cast<double>(sn) : 0.0;
    sent_u += std::log(static_cast<double>(support));

    double e = 0.0, eu = 0.0;
    for (const auto& et : t.edges) {
      e += attention_entropy(et.alpha);
      // Support: real content positions of q.
      std::size_t n = 0;
      const auto& tokens = t.node_tokens[et.from];
      for (std::size_t i = 1; i < tokens.size(); ++i) {
        if (tokens[i] != Vocabulary::kPad) ++n;
      }
      eu += std::log(static_cast<double>(n));
    }
    if (!t.edges.empty()) {
      edge += e / static_cast<double>(t.edges.size());
      edge_u += eu / static_cast<double>(t.edges.size());
    }
  }
  if (r.claims > 0) {
    const double n = static_cast<double>(r.claims);
    r.node_entropy = node / n;
    r.node_uniform = node_u / n;
    r.sentence_entropy = sent / n;
    r.sentence_uniform = sent_u / n;
    r.edge_entropy = edge / n;
    r.edge_uniform = edge_u / n;
  }
  return r;
}

double selection_recall_at_k(std::span<const AttentionTrace> traces,
                             std::span<const GoldClaim> gold, std::size_t k) {
  if (k == 0) throw UsageError("selection_recall_at_k: k must be >= 1");
  std::unordered_map<std::string, const AttentionTrace*> by_id;
  for (const auto& t : traces) by_id.emplace(t.claim_id, &t);
  std::size_t covered = 0, total = 0;
  for (const auto& g : gold) {
    std::vector<SentenceKey> golden;
    for (const auto& set : g.golden_sets) {
      for (const auto& key : set) {
        if (std::find(golden.begin(), golden.end(), key) == golden.end()) golden.push_back(key);
      }
    }
    if (golden.empty()) continue;
    auto it = by_id.find(g.claim_id);
    if (it == by_id.end()) throw DataError("missing trace for claim " + g.claim_id);
    const AttentionTrace& t = *it->second;

    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < t.selection.size(); ++i) {
      if (t.valid[i]) order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return t.selection[a] > t.selection[b];
    });
    if (order.size() > k) order.resize(k);
    for (const auto& key : golden) {
      ++total;
      for (std::size_t i : order) {
        if (t.node_keys[i] == key) {
          ++covered;
          break;
        }
      }
    }
  }
  if (total == 0) throw DataError("no verifiable claims");
  return static_cast<double>(covered) / static_cast<double>(total);
}

std::array<std::size_t, 10> max_selection_weight_histogram(
    std::span<const AttentionTrace> traces) {
  std::array<std::size_t, 10> bins{};
  for (const auto& t : traces) {
    if (t.selection.empty()) continue;
    const double w = *std::max_element(t.selection.begin(), t.selection.end());
    // The slack keeps exact bin edges such as a uniform 1/5 from rounding down.
    auto b = static_cast<std::size_t>(std::floor(w * 10.0 + 1e-9));
    bins[std::min<std::size_t>(b, 9)]++;
  }
  return bins;
}

std::vector<double> sorted_token_weights(std::span<const AttentionTrace> traces) {
  std::vector<double> out;
  for (const auto& t : traces) {
    for (const auto& e : t.edges) {
      const auto& tokens = t.node_tokens[e.from];
      for (std::size_t i = 1; i < e.alpha.size(); ++i) {
        if (tokens[i] != Vocabulary::kPad) out.push_back(e.alpha[i]);
      }
    }
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

CaseExport export_case_attention(const AttentionTrace& trace, const Vocabulary& vocab,
                                 std::size_t from, std::size_t to) {
  const EdgeTrace* e = trace.edge(from, to);
  if (!e) {
    throw DataError("claim " + trace.claim_id + " has no edge " + std::to_string(from + 1) +
                    "->" + std::to_string(to + 1));
  }
  CaseExport c;
  c.claim_id = trace.claim_id;
  c.from = from;
  c.to = to;
  const auto& tokens = trace.node_tokens[from];
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    if (tokens[i] == Vocabulary::kPad) continue;
    c.tokens.push_back({i, vocab.token(tokens[i]), e->alpha[i]});
  }
  c.beta_to = trace.beta[to];
  c.selection = trace.selection;
  return c;
}

std::string format_case_table(const CaseExport& c) {
  std::size_t width = 5;
  for (const auto& t : c.tokens) width = std::max(width, t.token.size());
  std::string out = "# claim " + c.claim_id + "  edge " + std::to_string(c.from + 1) + "->" +
                    std::to_string(c.to + 1) + "\n";
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-4s  %-*s  %-8s\n", "pos", static_cast<int>(width), "token",
                "alpha");
  out += buf;
  for (const auto& t : c.tokens) {
    const int bar = static_cast<int>(std::lround(t.weight * 40.0));
    std::snprintf(buf, sizeof(buf), "%-4zu  %-*s  %.6f  ", t.position, static_cast<int>(width),
                  t.token.c_str(), t.weight);
    out += buf;
    out.append(static_cast<std::size_t>(std::max(bar, 0)), '#');
    out += '\n';
  }
  out += "# beta(*->" + std::to_string(c.to + 1) + "):";
  for (double b : c.beta_to) {
    std::snprintf(buf, sizeof(buf), " %.6f", b);
    out += buf;
  }
  out += "\n# selection:";
  for (double s : c.selection) {
    std::snprintf(buf, sizeof(buf), " %.6f", s);
    out += buf;
  }
  out += '\n';
  return out;
}

}  // namespace kgat
