#ifndef OPBO_ERRORS_HPP
#define OPBO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace opbo {

/// Base class for every error raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

/// A coordinate left the objective's box; carries the offending index.
struct OutOfBounds : Error {
  OutOfBounds(const std::string& what, int coordinate_index)
      : Error(what), coordinate(coordinate_index) {}
  int coordinate;
};

struct UnknownFunction : Error {
  using Error::Error;
};

struct EmptyDims : Error {
  using Error::Error;
};

struct InvalidSize : Error {
  using Error::Error;
};

struct GridTooLarge : Error {
  using Error::Error;
};

struct InvalidSideLength : Error {
  using Error::Error;
};

/// Training produced a NaN/Inf loss or parameter; carries the epoch and
/// learning rate that were active when divergence was detected.
struct NonFiniteLoss : Error {
  NonFiniteLoss(const std::string& what, int epoch_index, double lr)
      : Error(what), epoch(epoch_index), learning_rate(lr) {}
  int epoch;
  double learning_rate;
};

struct SingularKernel : Error {
  using Error::Error;
};

struct TooManyPoints : Error {
  using Error::Error;
};

struct SampleCovarianceSingular : Error {
  using Error::Error;
};

struct IncompatibleSurrogateAcquisition : Error {
  using Error::Error;
};

struct InvalidG : Error {
  using Error::Error;
};

struct LengthMismatch : Error {
  using Error::Error;
};

struct TooShort : Error {
  using Error::Error;
};

struct ZeroVariance : Error {
  using Error::Error;
};

struct TooFewPoints : Error {
  using Error::Error;
};

struct MissingCell : Error {
  using Error::Error;
};

/// Config file failed validation; message carries the JSON field path.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace opbo

#endif  // OPBO_ERRORS_HPP
