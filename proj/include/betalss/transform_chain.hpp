#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "betalss/lsd.hpp"
#include "betalss/params.hpp"

namespace betalss {

/// Values of the transform chain at one point z:
///   s_dot   = alpha (alpha+z)^{-2} s(z/(alpha+z)) - (alpha+z)^{-1}
///   s_ddot  = -(1-y)/z + y s_dot
///   s_dddot = Y s_mp^Y(-s_ddot) + (1-Y)/s_ddot
/// and the derivative of s_dddot in closed form.
struct TransformState {
  cplx z;
  cplx s;
  cplx s_dot;
  cplx s_ddot;
  cplx s_dddot;
  cplx s_dddot_prime;
};

/// Throws InvalidArgument for real z or z = -alpha, SingularPoint when s_ddot or
/// (1-Y)m^2 + 2m + 1 - y vanishes (|.| < 1e-14).
TransformState transform_state(const SpectralParams& params, cplx z);

/// Derivatives of the chain computed by the chain rule from s'(w) and s_mp'(u).
struct ChainDerivatives {
  cplx s_dot_prime;
  cplx s_ddot_prime;
  cplx s_dddot_prime;
};

ChainDerivatives chain_derivatives(const SpectralParams& params, const TransformState& state);

inline constexpr std::size_t kIdentityCount = 6;
using IdentityResiduals = std::array<double, kIdentityCount>;

/// Residuals of the six transform identities at z, in order:
///   (i)   z = -m(m+1-y)/((1-Y)m+1)
///   (ii)  s_ddot = ((1-Y)m+1)/(m(m+1))
///   (iii) closed-form m' against the chain rule
///   (iv)  int (s_ddot+t)^{-1} dF_mp^Y = m/((1-Y)m+1)
///   (v)   int t(s_ddot+t)^{-2} dF_mp^Y = m^2/((1-Y)m^2+2m+1)
///   (vi)  both closed forms of s_ddot' against the chain rule (worst of the two), divided by
///         max(1, |s_ddot'|) since s_ddot' grows like 1/z^2 near the origin
/// where m = s_dddot. The integrals use edge-substituted quadrature at 1e-11.
IdentityResiduals lemma51_residuals(const SpectralParams& params, cplx z);

/// Same residuals for a caller-supplied state; lets tests probe sensitivity to a perturbed chain.
IdentityResiduals lemma51_residuals(const SpectralParams& params, const TransformState& state);

/// Finite discrete probability law: atoms at `locations` with `weights` summing to 1.
struct DiscreteLaw {
  std::vector<double> locations;
  std::vector<double> weights;
};

/// Throws InvalidArgument unless sizes match, weights are positive and sum to 1 within 1e-12.
void validate_law(const DiscreteLaw& law);

DiscreteLaw point_mass(double location);

/// Marchenko-Pastur law with the given ratio as `atoms` equal-mass cells of its continuous
/// part, each represented by the cell's conditional mean; the atom at 0 (ratio > 1) is kept
/// as an extra point. Deterministic.
DiscreteLaw discretize_mp(double ratio, std::size_t atoms);

struct FixedPointOptions {
  double damping = 0.5;
  double fallback_damping = 0.1;
  int max_iterations = 10000;
  double tolerance = 1e-10;
  /// Defaults to i.
  std::optional<cplx> initial;
};

struct FixedPointResult {
  cplx value;
  double residual = 0.0;
  int iterations = 0;
  bool used_fallback = false;
};

/// Right-hand side of the self-consistent equation for the Stieltjes transform of the
/// Beta-type law driven by `law`:
///   s = int (w + alpha t)/((1-z) w - alpha z t) dF(t),  w = 1 - y(1-z)(z s + 1).
cplx fixed_point_rhs(const DiscreteLaw& law, double y, double alpha, cplx z, cplx s);

/// Damped iteration of the self-consistent equation at z in C+.
/// Throws NoConvergence after max_iterations and NotInUpperHalfPlane if Im s <= 0.
FixedPointResult fixed_point_solve(const DiscreteLaw& law, double y, double alpha, cplx z,
                                   const FixedPointOptions& options = {});

}  // namespace betalss
