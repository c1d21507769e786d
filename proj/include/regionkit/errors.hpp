// Copyright (C) 2026 RegionKit Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <stdexcept>
#include <string>

namespace regionkit {

/// Malformed values fed into an operation: non-finite coordinates,
/// mismatched shapes, unparsable records. Maps to CLI exit code 2.
class InvalidInputError : public std::runtime_error {
 public:
  explicit InvalidInputError(const std::string& what)
      : std::runtime_error(what) {}
};

/// A configuration that violates its own invariants (k > K, empty scale
/// list, all-zero ratio table, ...). Maps to CLI exit code 2.
class InvalidConfigError : public InvalidInputError {
 public:
  explicit InvalidConfigError(const std::string& what)
      : InvalidInputError(what) {}
};

/// A box with zero/negative extent where a strictly positive one is
/// required (log-space encodings, scale bucketing).
class DegenerateBoxError : public InvalidInputError {
 public:
  explicit DegenerateBoxError(const std::string& what)
      : InvalidInputError(what) {}
};

/// Arithmetic left the representable range (exp overflow on decode).
class NumericRangeError : public InvalidInputError {
 public:
  explicit NumericRangeError(const std::string& what)
      : InvalidInputError(what) {}
};

/// An operation that needs at least one element got none. Maps to CLI
/// exit code 3.
class EmptyResultError : public std::runtime_error {
 public:
  explicit EmptyResultError(const std::string& what)
      : std::runtime_error(what) {}
};

/// No labelable region survived for a minibatch; the caller skips the
/// image.
class EmptyMinibatchError : public EmptyResultError {
 public:
  explicit EmptyMinibatchError(const std::string& what)
      : EmptyResultError(what) {}
};

}  // namespace regionkit
