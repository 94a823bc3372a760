#ifndef KGAT_VOCABULARY_HPP_
#define KGAT_VOCABULARY_HPP_

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kgat {

// Token <-> id map with dense ids. Ids 0-3 are reserved.
class Vocabulary {
 public:
  static constexpr int kCls = 0;
  static constexpr int kSep = 1;
  static constexpr int kPad = 2;
  static constexpr int kUnk = 3;

  Vocabulary();

  // Returns the existing id or appends the token.
  int add(std::string_view token);
  // Unknown tokens map to kUnk.
  int id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(int id) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::vector<int> encode(const std::vector<std::string>& tokens) const;

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

  // One token per line, in id order, reserved tokens included.
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);
  static Vocabulary from_tokens(const std::vector<std::string>& tokens);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

}  // namespace kgat

#endif  // KGAT_VOCABULARY_HPP_
