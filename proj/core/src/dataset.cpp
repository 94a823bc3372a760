#include "kgat/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "kgat/errors.hpp"
#include "kgat/io_util.hpp"

namespace kgat {

using json = nlohmann::ordered_json;

std::string_view label_name(Label label) {
  switch (label) {
    case Label::kSupports:
      return "SUPPORTS";
    case Label::kRefutes:
      return "REFUTES";
    case Label::kNotEnoughInfo:
      return "NOT ENOUGH INFO";
  }
  return "?";
}

Label parse_label(std::string_view name) {
  if (name == "SUPPORTS") return Label::kSupports;
  if (name == "REFUTES") return Label::kRefutes;
  if (name == "NOT ENOUGH INFO") return Label::kNotEnoughInfo;
  throw DataError("unknown label '" + std::string(name) + "'");
}

double EvidenceSentence::sort_score() const {
  if (is_pad) return -std::numeric_limits<double>::infinity();
  return retrieval_score.value_or(-std::numeric_limits<double>::max());
}

EvidenceSentence EvidenceSentence::pad() {
  EvidenceSentence s;
  s.doc_id = "[PAD]";
  s.sent_idx = -1;
  s.sentence_tokens = {"[PAD]"};
  s.retrieval_score = -std::numeric_limits<double>::infinity();
  s.is_pad = true;
  return s;
}

std::size_t ClaimInstance::valid_count() const {
  return static_cast<std::size_t>(std::count_if(candidates.begin(), candidates.end(),
                                                [](const auto& c) { return !c.is_pad; }));
}

std::vector<SentenceKey> ClaimInstance::golden_union() const {
  std::vector<SentenceKey> out;
  for (const auto& set : golden_sets) {
    for (const auto& key : set) {
      if (std::find(out.begin(), out.end(), key) == out.end()) out.push_back(key);
    }
  }
  return out;
}

bool ClaimInstance::is_multi_evidence() const {
  return std::any_of(golden_sets.begin(), golden_sets.end(),
                     [](const auto& s) { return s.size() >= 2; });
}

void sort_candidates(std::vector<EvidenceSentence>& candidates) {
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const EvidenceSentence& a, const EvidenceSentence& b) {
                     const double sa = a.sort_score(), sb = b.sort_score();
                     if (sa != sb) return sa > sb;
                     return a.key() < b.key();
                   });
}

void validate(const ClaimRecord& record) {
  if (record.claim_id.empty()) throw DataError("empty claim_id");
  if (record.claim_tokens.empty()) throw DataError("claim " + record.claim_id + ": empty claim");
  const bool nei = record.label == Label::kNotEnoughInfo;
  if (nei && !record.golden_sets.empty()) {
    throw DataError("claim " + record.claim_id + ": NOT ENOUGH INFO with golden evidence");
  }
  if (!nei && record.golden_sets.empty()) {
    throw DataError("claim " + record.claim_id + ": verifiable claim without golden evidence");
  }
  for (const auto& set : record.golden_sets) {
    if (set.empty()) throw DataError("claim " + record.claim_id + ": empty golden set");
  }
  std::set<SentenceKey> seen;
  for (const auto& c : record.candidates) {
    if (c.sentence_tokens.empty()) {
      throw DataError("claim " + record.claim_id + ": empty sentence " + c.doc_id + ":" +
                      std::to_string(c.sent_idx));
    }
    if (c.sent_idx < 0) throw DataError("claim " + record.claim_id + ": negative sent_idx");
    if (!seen.insert(c.key()).second) {
      throw DataError("claim " + record.claim_id + ": duplicate candidate " + c.doc_id + ":" +
                      std::to_string(c.sent_idx));
    }
  }
}

ClaimInstance prepare(const ClaimRecord& record, const PrepareOptions& options) {
  ClaimInstance inst;
  inst.claim_id = record.claim_id;
  inst.claim_tokens = record.claim_tokens;
  inst.label = record.label;
  inst.golden_sets = record.golden_sets;

  std::vector<EvidenceSentence> sorted = record.candidates;
  sort_candidates(sorted);

  std::vector<EvidenceSentence> chosen;
  if (options.force_golden) {
    const auto golden = inst.golden_union();
    std::vector<EvidenceSentence> rest;
    for (auto& c : sorted) {
      const bool is_golden = std::find(golden.begin(), golden.end(), c.key()) != golden.end();
      (is_golden ? chosen : rest).push_back(std::move(c));
    }
    if (chosen.size() > options.evidence_per_claim) chosen.resize(options.evidence_per_claim);
    for (auto& c : rest) {
      if (chosen.size() >= options.evidence_per_claim) break;
      chosen.push_back(std::move(c));
    }
    sort_candidates(chosen);
  } else {
    chosen = std::move(sorted);
    if (chosen.size() > options.evidence_per_claim) chosen.resize(options.evidence_per_claim);
  }
  while (chosen.size() < options.evidence_per_claim) chosen.push_back(EvidenceSentence::pad());
  inst.candidates = std::move(chosen);
  return inst;
}

std::vector<ClaimInstance> prepare(const std::vector<ClaimRecord>& records,
                                   const PrepareOptions& options) {
  std::vector<ClaimInstance> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(prepare(r, options));
  return out;
}

namespace {

std::vector<std::string> tokens_field(const json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_string()) {
    throw DataError(std::string("missing or non-string field '") + field + "'");
  }
  return split_whitespace(j[field].get<std::string>());
}

SentenceKey parse_key(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_string() || !j[1].is_number_integer()) {
    throw DataError("golden entry must be [doc_id, sent_idx]");
  }
  return {j[0].get<std::string>(), j[1].get<int>()};
}

}  // namespace

ClaimRecord parse_record(std::string_view line, std::size_t line_number) {
  const std::string where = "line " + std::to_string(line_number) + ": ";
  try {
    const json j = json::parse(line);
    if (!j.is_object()) throw DataError("record is not an object");
    ClaimRecord r;
    if (!j.contains("claim_id") || !j["claim_id"].is_string()) {
      throw DataError("missing or non-string field 'claim_id'");
    }
    r.claim_id = j["claim_id"].get<std::string>();
    r.claim_tokens = tokens_field(j, "claim");
    if (!j.contains("label") || !j["label"].is_string()) throw DataError("missing field 'label'");
    r.label = parse_label(j["label"].get<std::string>());
    if (!j.contains("candidates") || !j["candidates"].is_array()) {
      throw DataError("missing array field 'candidates'");
    }
    for (const auto& c : j["candidates"]) {
      EvidenceSentence s;
      if (!c.contains("doc_id") || !c["doc_id"].is_string()) {
        throw DataError("candidate without doc_id");
      }
      s.doc_id = c["doc_id"].get<std::string>();
      if (!c.contains("sent_idx") || !c["sent_idx"].is_number_integer()) {
        throw DataError("candidate without integer sent_idx");
      }
      s.sent_idx = c["sent_idx"].get<int>();
      s.title_tokens = c.contains("title") ? tokens_field(c, "title") : std::vector<std::string>{};
      s.sentence_tokens = tokens_field(c, "text");
      if (c.contains("score") && !c["score"].is_null()) {
        if (!c["score"].is_number()) throw DataError("non-numeric candidate score");
        s.retrieval_score = c["score"].get<double>();
      }
      r.candidates.push_back(std::move(s));
    }
    if (j.contains("golden")) {
      if (!j["golden"].is_array()) throw DataError("'golden' must be an array");
      for (const auto& set : j["golden"]) {
        if (!set.is_array()) throw DataError("golden set must be an array");
        std::vector<SentenceKey> keys;
        for (const auto& k : set) keys.push_back(parse_key(k));
        r.golden_sets.push_back(std::move(keys));
      }
    }
    validate(r);
    return r;
  } catch (const json::exception& e) {
    throw DataError(where + "malformed record: " + e.what());
  } catch (const DataError& e) {
    throw DataError(where + e.what());
  }
}

std::string serialize_record(const ClaimRecord& record) {
  json j;
  j["claim_id"] = record.claim_id;
  j["claim"] = join(record.claim_tokens, " ");
  j["label"] = std::string(label_name(record.label));
  json cands = json::array();
  for (const auto& c : record.candidates) {
    if (c.is_pad) continue;
    json cj;
    cj["doc_id"] = c.doc_id;
    cj["sent_idx"] = c.sent_idx;
    cj["title"] = join(c.title_tokens, " ");
    cj["text"] = join(c.sentence_tokens, " ");
    if (c.retrieval_score && std::isfinite(*c.retrieval_score)) {
      cj["score"] = *c.retrieval_score;
    } else {
      cj["score"] = nullptr;
    }
    cands.push_back(std::move(cj));
  }
  j["candidates"] = std::move(cands);
  json golden = json::array();
  for (const auto& set : record.golden_sets) {
    json sj = json::array();
    for (const auto& [doc, idx] : set) sj.push_back(json::array({doc, idx}));
    golden.push_back(std::move(sj));
  }
  j["golden"] = std::move(golden);
  return j.dump();
}

std::vector<ClaimRecord> read_records(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<ClaimRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    out.push_back(parse_record(line, n));
  }
  return out;
}

void write_records(const std::string& path, const std::vector<ClaimRecord>& records) {
  std::string text;
  for (const auto& r : records) {
    text += serialize_record(r);
    text += '\n';
  }
  write_file_atomic(path, text);
}

std::vector<ClaimInstance> load_dataset(const std::string& path, const PrepareOptions& options) {
  return prepare(read_records(path), options);
}

}  // namespace kgat
