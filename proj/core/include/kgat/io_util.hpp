#ifndef KGAT_IO_UTIL_HPP_
#define KGAT_IO_UTIL_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace kgat {

// Writes to "<path>.tmp" and renames over path.
void write_file_atomic(const std::string& path, std::string_view contents);
std::string read_file(const std::string& path);

// Shortest-round-trip-safe rendering with 17 significant digits.
std::string format_double(double v);
double parse_double(std::string_view text);

std::vector<std::string> split_whitespace(std::string_view text);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace kgat

#endif  // KGAT_IO_UTIL_HPP_
