#ifndef RSCHED_ERRORS_HPP
#define RSCHED_ERRORS_HPP

#include <stdexcept>

namespace rsched {

/// Invalid configuration (bad field value or incompatible method/set combo).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss or gradient.
struct TrainingDiverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace rsched

#endif
