#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace voxmill {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument value (out-of-range parameter, empty list, ...).
class ParamError : public Error {
 public:
  using Error::Error;
};

/// Operands live on incompatible grids (dims, spacing, origin).
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Requested operation is not supported for this configuration
/// (e.g. rotation on an anisotropic grid).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Field file header cannot be parsed.
class HeaderError : public IoError {
 public:
  using IoError::IoError;
};

/// Field grid disagrees with what the caller required.
class DimensionError : public IoError {
 public:
  using IoError::IoError;
};

/// Payload ends before dims are satisfied.
class TruncationError : public IoError {
 public:
  using IoError::IoError;
};

enum class ConfigErrorKind { parse, schema, unresolved_reference, invariant };

/// Config parse/validation failure; `key()` names the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(ConfigErrorKind kind, std::string key, const std::string& what)
      : Error(key.empty() ? what : key + ": " + what), kind_(kind), key_(std::move(key)) {}
  ConfigErrorKind kind() const { return kind_; }
  const std::string& key() const { return key_; }

 private:
  ConfigErrorKind kind_;
  std::string key_;
};

/// Iterative solver failed; carries the residual history for diagnosis.
class SolverError : public Error {
 public:
  explicit SolverError(const std::string& what, std::vector<double> residual_history = {})
      : Error(what), residual_history_(std::move(residual_history)) {}
  const std::vector<double>& residual_history() const { return residual_history_; }

 private:
  std::vector<double> residual_history_;
};

}  // namespace voxmill
