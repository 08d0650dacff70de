// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace faceanim {

/// Base class for all library errors. Every throw site uses one of the
/// subclasses below so callers can map failures to exit codes.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed or corrupt file contents (bad magic, truncation, NaN payload).
class FormatError : public Error {
public:
  using Error::Error;
};

/// Incompatible array shapes between values that must agree.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// A precondition on an input value was violated.
class InputError : public Error {
public:
  using Error::Error;
};

/// Structured data failed validation (overlapping alignment entries, ...).
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Missing key in a keyed store (embedding file, manifest).
class LookupError : public Error {
public:
  using Error::Error;
};

/// Bad run configuration (empty region, unknown config key, ...).
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Failed read or write on the filesystem.
class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace faceanim
