#pragma once

#include <stdexcept>
#include <string>

namespace softlex {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad user-supplied configuration (flags, dims, empty inputs).
struct ConfigError : Error {
  using Error::Error;
};

// Malformed input data; message carries "path:line" where applicable.
struct DataError : Error {
  using Error::Error;
};

// Internal consistency violated (inconsistent word sets, unknown ids, ...).
struct IntegrityError : Error {
  using Error::Error;
};

}  // namespace softlex
