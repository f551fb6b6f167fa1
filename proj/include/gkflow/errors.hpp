#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gkflow {

// Positivity guard threshold used by every quotient/log and by the metric
// cone checks. A field counts as violating the cone when its minimum falls
// at or below this value.
inline constexpr double kDefaultEpsPos = 1e-8;

// Malformed configuration, bad CLI arguments, or an operation invoked on
// data it does not support (wrong grid mode, missing field, ...).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A field contained NaN or Inf samples where finite data was required.
struct NonFiniteField : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A metric factor (or another positivity-constrained field) dropped to or
// below the positivity threshold. Carries the offending minimum and its
// flat grid index so a failed run can be localized.
struct ConeViolation : std::runtime_error {
  ConeViolation(const std::string& what, double min_value_, std::size_t flat_index_)
      : std::runtime_error(what), min_value(min_value_), flat_index(flat_index_) {}
  double min_value = 0.0;
  std::size_t flat_index = 0;
};

// The time-dependent background was evaluated at or beyond the time where
// one of its factors stops being positive.
struct BackgroundExpired : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A time-differenced check was asked to run on fewer than three stored
// snapshots.
struct InsufficientSnapshots : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gkflow
