#include "betalss/errors.hpp"

namespace betalss {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::DegenerateRegime: return "DegenerateRegime";
    case Errc::NonPositive: return "NonPositive";
    case Errc::BadMoment: return "BadMoment";
    case Errc::IntervalCollapse: return "IntervalCollapse";
    case Errc::NearSingularPencil: return "NearSingularPencil";
    case Errc::QuadratureFailure: return "QuadratureFailure";
    case Errc::BranchAmbiguity: return "BranchAmbiguity";
    case Errc::SingularPoint: return "SingularPoint";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::NotInUpperHalfPlane: return "NotInUpperHalfPlane";
    case Errc::SingularContour: return "SingularContour";
    case Errc::ImaginaryResidue: return "ImaginaryResidue";
    case Errc::ContourCollision: return "ContourCollision";
    case Errc::DegenerateEigenvalue: return "DegenerateEigenvalue";
    case Errc::AtomDivergence: return "AtomDivergence";
    case Errc::VarianceNonpositive: return "VarianceNonpositive";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_usage_error(Errc code) noexcept {
  switch (code) {
    case Errc::DegenerateRegime:
    case Errc::NonPositive:
    case Errc::BadMoment:
    case Errc::DimensionMismatch:
    case Errc::InvalidArgument:
    case Errc::IoError:
      return true;
    default:
      return false;
  }
}

}  // namespace betalss
