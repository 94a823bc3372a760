#ifndef KGAT_SRC_TEXT_RECORDS_HPP_
#define KGAT_SRC_TEXT_RECORDS_HPP_

// Line-oriented "tag field field..." records shared by the checkpoint and
// ranker file formats.

#include <sstream>
#include <string>
#include <vector>

#include "kgat/errors.hpp"
#include "kgat/io_util.hpp"
#include "kgat/tensor.hpp"

namespace kgat {
namespace text_records {

inline void write_values(std::ostringstream& out, const Tensor& t) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) out << ' ';
    out << format_double(t[i]);
  }
  out << '\n';
}

inline void write_tensor(std::ostringstream& out, const std::string& tag, const std::string& name,
                  const Tensor& t) {
  out << tag << ' ' << name << ' ' << t.rank();
  for (std::size_t d : t.shape()) out << ' ' << d;
  out << '\n';
  write_values(out, t);
}

class LineReader {
 public:
  explicit LineReader(const std::string& text) : in_(text) {}

  std::vector<std::string> next(const char* what) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return split_whitespace(line);
    }
    throw DataError(std::string("truncated checkpoint: expected ") + what);
  }
  std::string raw(const char* what) {
    std::string line;
    if (!std::getline(in_, line)) {
      throw DataError(std::string("truncated checkpoint: expected ") + what);
    }
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }
  std::size_t line() const { return line_no_; }

 private:
  std::istringstream in_;
  std::size_t line_no_ = 0;
};

inline std::size_t to_size(const std::string& s) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size()) throw DataError("bad integer '" + s + "'");
    return static_cast<std::size_t>(v);
  } catch (const std::logic_error&) {
    throw DataError("bad integer '" + s + "'");
  }
}

inline void expect(const std::vector<std::string>& f, const char* tag, std::size_t min_fields) {
  if (f.empty() || f[0] != tag || f.size() < min_fields) {
    throw DataError(std::string("malformed checkpoint: expected '") + tag + "' record");
  }
}

inline Tensor read_tensor(LineReader& r, const char* tag, std::string* name) {
  const auto head = r.next(tag);
  expect(head, tag, 3);
  *name = head[1];
  const std::size_t rank = to_size(head[2]);
  if (head.size() != 3 + rank) throw DataError("malformed checkpoint: bad shape for " + *name);
  std::vector<std::size_t> shape;
  for (std::size_t i = 0; i < rank; ++i) shape.push_back(to_size(head[3 + i]));
  Tensor t(shape);
  const auto vals = r.next("tensor values");
  if (vals.size() != t.size()) {
    throw DataError("truncated checkpoint: " + *name + " has " + std::to_string(vals.size()) +
                    " of " + std::to_string(t.size()) + " values");
  }
  for (std::size_t i = 0; i < vals.size(); ++i) t[i] = parse_double(vals[i]);
  return t;
}

}  // namespace text_records
}  // namespace kgat

#endif  // KGAT_SRC_TEXT_RECORDS_HPP_
