#pragma once

#include <stdexcept>
#include <string>

namespace unlock {

// Base type for everything thrown by this library. Catching unlock::Error at
// the tool boundary is enough to turn any library failure into a clean exit.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Two operands disagree on height/width (or channel/class count).
struct DimensionMismatch : Error {
  using Error::Error;
};

// A run sequence does not add up to height * width.
struct SumMismatch : Error {
  using Error::Error;
};

// Thresholds computed for one branch were handed to an operation on another.
struct BranchMismatch : Error {
  using Error::Error;
};

// A configuration value is outside its documented domain. Maps to exit code 2
// at the CLI.
struct ConfigError : Error {
  using Error::Error;
};

// A manifest or data file is malformed. The message always names the file and
// the offending field. Maps to exit code 1 at the CLI.
struct ManifestError : Error {
  using Error::Error;
};

// Filesystem / codec failure (unreadable file, bad magic, short read).
struct IoError : Error {
  using Error::Error;
};

}  // namespace unlock
