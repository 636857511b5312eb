#ifndef BDGZ_ERROR_HPP
#define BDGZ_ERROR_HPP

#include <cstdio>
#include <stdexcept>
#include <string>

namespace bdgz {

// Process exit codes used by the command-line tool.
enum class ExitCode : int {
  success = 0,
  configuration = 2,
  convergence = 3,
  structure = 4,
  numerical = 5,
  truncation_warning = 6,
};

// Short scientific rendering for diagnostics.
inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

class Error : public std::runtime_error {
 public:
  Error(const std::string& what, ExitCode code) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what, ExitCode::configuration) {}
};

// Arrays defined on different grids, or matrices of incompatible shape.
class DimensionError : public ConfigError {
 public:
  explicit DimensionError(const std::string& what) : ConfigError(what) {}
};

// Argument outside the mathematical domain of an operation.
class DomainError : public ConfigError {
 public:
  explicit DomainError(const std::string& what) : ConfigError(what) {}
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_residual, long iterations)
      : Error(what, ExitCode::convergence), last_residual_(last_residual), iterations_(iterations) {}
  double last_residual() const noexcept { return last_residual_; }
  long iterations() const noexcept { return iterations_; }

 private:
  double last_residual_;
  long iterations_;
};

// Unexpected spectral structure: missing zero mode, degenerate zero cluster, ...
class StructureError : public Error {
 public:
  explicit StructureError(const std::string& what) : Error(what, ExitCode::structure) {}
};

class ZeroModeMissing : public StructureError {
 public:
  explicit ZeroModeMissing(const std::string& what) : StructureError(what) {}
};

class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double deviation = 0.0)
      : Error(what, ExitCode::numerical), deviation_(deviation) {}
  double deviation() const noexcept { return deviation_; }

 private:
  double deviation_;
};

}  // namespace bdgz

#endif  // BDGZ_ERROR_HPP
