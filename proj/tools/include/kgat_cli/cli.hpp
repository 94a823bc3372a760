#ifndef KGAT_CLI_CLI_HPP_
#define KGAT_CLI_CLI_HPP_

#include <iosfwd>

namespace kgat::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

// Runs one `kgat` invocation. Results go to `out`, progress and the
// one-line error cause to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kgat::cli

#endif  // KGAT_CLI_CLI_HPP_
