#pragma once

#include <stdexcept>
#include <string>

namespace lio {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed sensor input: bad dt, IMU gaps, window not covered by samples.
struct InputError : Error {
  using Error::Error;
};

// Query outside the valid domain (chain span, anchor indices).
struct RangeError : Error {
  using Error::Error;
};

// Too few valid correspondences to run an update.
struct StarvationError : Error {
  using Error::Error;
};

// Covariance failed the condition check even after regularization.
struct SingularCovarianceError : Error {
  using Error::Error;
};

// Dataset / config file parsing failure.
struct FormatError : Error {
  using Error::Error;
};

}  // namespace lio
