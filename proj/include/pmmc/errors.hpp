#pragma once

#include <stdexcept>
#include <string>

namespace pmmc {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// 1 - dt * f'(x) vanished in the implicit Euler update.
struct DegenerateDenominator : Error {
  using Error::Error;
};

/// A path's length or spacing disagrees with its level's mesh.
struct MeshMismatch : Error {
  using Error::Error;
};

/// A bridge path does not carry the pinned end values.
struct BoundaryViolation : Error {
  using Error::Error;
};

struct LengthMismatch : Error {
  using Error::Error;
};

struct DivisibilityError : Error {
  using Error::Error;
};

/// The marginal oracle cannot evaluate the requested point.
struct OracleUnavailable : Error {
  using Error::Error;
};

/// Every importance weight of a swap proposal underflowed to zero.
struct DegenerateWeights : Error {
  using Error::Error;
};

struct InsufficientLength : Error {
  using Error::Error;
};

struct InsufficientVariance : Error {
  using Error::Error;
};

/// Configuration failure. `field` names the offending key; `line` is 0 when unknown.
struct ConfigError : Error {
  ConfigError(std::string field_name, const std::string& message, int line_number = 0)
      : Error(format(field_name, message, line_number)),
        field(std::move(field_name)),
        line(line_number) {}

  std::string field;
  int line;

 private:
  static std::string format(const std::string& field, const std::string& message, int line) {
    std::string out = "config";
    if (line > 0) out += " line " + std::to_string(line);
    if (!field.empty()) out += " [" + field + "]";
    return out + ": " + message;
  }
};

}  // namespace pmmc
