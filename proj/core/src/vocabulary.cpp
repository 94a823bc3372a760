#include "kgat/vocabulary.hpp"

#include <sstream>

#include "kgat/errors.hpp"
#include "kgat/io_util.hpp"

namespace kgat {

Vocabulary::Vocabulary() {
  for (const char* t : {"[CLS]", "[SEP]", "[PAD]", "[UNK]"}) add(t);
}

int Vocabulary::add(std::string_view token) {
  if (auto it = ids_.find(std::string(token)); it != ids_.end()) return it->second;
  const int id = static_cast<int>(tokens_.size());
  tokens_.emplace_back(token);
  ids_.emplace(tokens_.back(), id);
  return id;
}

int Vocabulary::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return ids_.count(std::string(token)) != 0;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw DataError("token id out of range: " + std::to_string(id));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocabulary::encode(const std::vector<std::string>& tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

void Vocabulary::save(const std::string& path) const {
  std::string text;
  for (const auto& t : tokens_) {
    text += t;
    text += '\n';
  }
  write_file_atomic(path, text);
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens) {
  static const char* kReserved[] = {"[CLS]", "[SEP]", "[PAD]", "[UNK]"};
  if (tokens.size() < 4) throw DataError("vocabulary is missing reserved tokens");
  for (int i = 0; i < 4; ++i) {
    if (tokens[static_cast<std::size_t>(i)] != kReserved[i]) {
      throw DataError("vocabulary reserved id " + std::to_string(i) + " must be " +
                      kReserved[i]);
    }
  }
  Vocabulary v;
  for (std::size_t i = 4; i < tokens.size(); ++i) {
    if (v.contains(tokens[i])) throw DataError("duplicate vocabulary token: " + tokens[i]);
    v.add(tokens[i]);
  }
  return v;
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    tokens.push_back(line);
  }
  return from_tokens(tokens);
}

}  // namespace kgat
