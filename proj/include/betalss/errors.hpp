#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace betalss {

/// Failure categories surfaced by the library. The CLI maps these onto exit codes.
enum class Errc {
  DegenerateRegime,
  NonPositive,
  BadMoment,
  IntervalCollapse,
  NearSingularPencil,
  QuadratureFailure,
  BranchAmbiguity,
  SingularPoint,
  NoConvergence,
  NotInUpperHalfPlane,
  SingularContour,
  ImaginaryResidue,
  ContourCollision,
  DegenerateEigenvalue,
  AtomDivergence,
  VarianceNonpositive,
  DimensionMismatch,
  InvalidArgument,
  IoError,
};

std::string_view to_string(Errc code) noexcept;

/// True for validation and input errors, false for numeric failures.
bool is_usage_error(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace betalss
