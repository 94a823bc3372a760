#ifndef KGAT_ERRORS_HPP_
#define KGAT_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace kgat {

// Base for every error raised by the library. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input files, schema violations, mismatched checkpoints.
class DataError : public Error {
 public:
  using Error::Error;
};

// Non-finite values, failed gradient checks, empty softmax support.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Invalid arguments or configuration values.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace kgat

#endif  // KGAT_ERRORS_HPP_
