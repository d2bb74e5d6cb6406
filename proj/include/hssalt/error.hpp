#pragma once

#include <stdexcept>
#include <string>

namespace hssalt {

/// Invalid caller-supplied argument (bad q level, r > n, unsorted times, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A distribution quantity could not be represented (overflow, NaN).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The sample cannot support the requested estimate (e.g. no stage-2 failures).
class DegenerateDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The shape-parameter score equation had no sign change inside the expanded bracket.
class AlphaSolveFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A mixture component captured no observed failure mass.
class ComponentCollapse : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The observed-data log-likelihood decreased by more than the allowed slack.
class MonotonicityViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every EM start failed.
class FitFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Broken internal invariant; indicates corrupt inputs or a bug.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace hssalt
