#pragma once

#include <stdexcept>
#include <string>

namespace aesam {

/// Invalid configuration, shape mismatch or out-of-range hyperparameter.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// NaN/Inf encountered in a forward or backward pass.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// API misuse, e.g. running backward twice on the same record.
class UsageError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// Too few samples for a statistical diagnostic.
class InsufficientDataError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A theorem hypothesis does not hold, so the check is not meaningful.
class PreconditionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

} // namespace aesam
