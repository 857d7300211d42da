#pragma once

#include <stdexcept>
#include <string>

namespace tavr {

// Base for every error raised by the library. CLI maps it to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two volumes/masks/fields that must share a grid do not.
class GridMismatch : public Error {
 public:
  using Error::Error;
};

// A case that lacks anatomy required for enrichment. CLI maps it to exit code 2.
class CaseExcluded : public Error {
 public:
  using Error::Error;
};

}  // namespace tavr
