#pragma once

#include <stdexcept>

namespace lanebench {

// Vehicle or query point ran past the usable road extent.
class EndOfRoadError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Rejection sampling hit the attempt budget without producing a valid scenario.
class SamplingExhaustedError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A restriction tried to widen a range or add a choice absent from the parent model.
class RestrictionError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Training loss became non-finite.
class TrainingDivergedError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or out-of-contract configuration / input values.
class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem or file-format failure while reading or writing artifacts.
class IoError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace lanebench
