#ifndef EBGAN_ERRORS_HPP
#define EBGAN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ebgan {

// Error taxonomy. The CLI maps each category to a distinct exit code.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A loss term was requested that the active model variant does not define.
struct VariantViolation : std::logic_error {
  using std::logic_error::logic_error;
};

// Raised when training must stop (e.g. a loss went non-finite).
struct TrainingAbort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ebgan

#endif
