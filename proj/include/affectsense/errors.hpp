#pragma once

#include <stdexcept>
#include <string>

namespace affectsense {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Bad or missing configuration; the CLI maps this to exit code 1.
class ConfigError : public Error {
  public:
    using Error::Error;
};

} // namespace affectsense
