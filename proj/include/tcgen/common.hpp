#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tcgen {

/// Bad user input: out-of-range values, mismatched shapes, missing files.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed on-disk data: bad manifests, truncated blobs, broken CSV rows.
class FormatError : public InputError {
 public:
  using InputError::InputError;
};

/// Numerical failure: singular systems, non-convergent iterations, degenerate fits.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tcgen
