#pragma once

#include <optional>
#include <exception>
#include <string>

namespace fdrkit {

enum class ErrorKind {
  dimension,
  contract,
  parameter,
  insufficient_data,
  rank,
  singularity,
  slicing,
  io,
  parse,
  validation,
};

const char* to_string(ErrorKind kind);

// Single exception type for the library. `stage` is filled in by pipeline
// drivers (fave, fsir, ...) so that callers can tell where a failure happened;
// `value` carries a numeric payload such as the offending eigenvalue t_D.
class Error : public std::exception {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::optional<double> value = std::nullopt);

  const char* what() const noexcept override { return message_.c_str(); }
  ErrorKind kind() const noexcept { return kind_; }
  const std::string& stage() const noexcept { return stage_; }
  std::optional<double> value() const noexcept { return value_; }

  /// Copy of this error tagged with a pipeline stage.
  Error with_stage(std::string stage) const;

  /// Numerical failures (rank, singularity, slicing) as opposed to bad input.
  bool is_numerical() const noexcept;

 private:
  ErrorKind kind_;
  std::string detail_;
  std::string stage_;
  std::string message_;
  std::optional<double> value_;
};

}  // namespace fdrkit
