#ifndef DRIFTLOC_ERRORS_HPP
#define DRIFTLOC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace driftloc {

/// Malformed input data: bad CSV rows, inconsistent dimensions, invalid labels.
struct SchemaError : std::runtime_error {
  explicit SchemaError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid run configuration: unknown method, bad config file, bad grid token.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure: non-finite values where finite ones are required.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace driftloc

#endif
