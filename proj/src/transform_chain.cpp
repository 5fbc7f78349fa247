#include "betalss/transform_chain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "betalss/errors.hpp"
#include "betalss/quadrature.hpp"

namespace betalss {

namespace {

constexpr double kSingularFloor = 1e-14;

cplx closed_form_prime(double y, double Y, cplx m) {
  const cplx d = (1.0 - Y) * m * m + 2.0 * m + 1.0 - y;
  if (std::abs(d) < kSingularFloor) {
    throw Error(Errc::SingularPoint, "(1-Y)m^2 + 2m + 1 - y vanishes");
  }
  const cplx lead = (1.0 - Y) * m + 1.0;
  return -lead * lead / d;
}

}  // namespace

TransformState transform_state(const SpectralParams& params, cplx z) {
  const SpectralParams p = validate_params(params);
  if (z.imag() == 0.0) throw Error(Errc::InvalidArgument, "transform chain needs z off the real axis");
  const cplx az = p.alpha + z;
  TransformState st;
  st.z = z;
  st.s = stieltjes_s(p, z / az);
  st.s_dot = p.alpha / (az * az) * st.s - 1.0 / az;
  st.s_ddot = -(1.0 - p.y) / z + p.y * st.s_dot;
  if (std::abs(st.s_ddot) < kSingularFloor) throw Error(Errc::SingularPoint, "s_ddot vanishes");
  st.s_dddot = p.Y * mp_stieltjes(p.Y, -st.s_ddot) + (1.0 - p.Y) / st.s_ddot;
  st.s_dddot_prime = closed_form_prime(p.y, p.Y, st.s_dddot);
  return st;
}

ChainDerivatives chain_derivatives(const SpectralParams& params, const TransformState& st) {
  const double alpha = params.alpha;
  const cplx az = alpha + st.z;
  const cplx w = st.z / az;
  const cplx dw = alpha / (az * az);
  ChainDerivatives d;
  d.s_dot_prime = -2.0 * alpha / (az * az * az) * st.s +
                  alpha / (az * az) * stieltjes_s_derivative(params, w) * dw + 1.0 / (az * az);
  d.s_ddot_prime = (1.0 - params.y) / (st.z * st.z) + params.y * d.s_dot_prime;
  const cplx outer = -params.Y * mp_stieltjes_derivative(params.Y, -st.s_ddot) -
                     (1.0 - params.Y) / (st.s_ddot * st.s_ddot);
  d.s_dddot_prime = outer * d.s_ddot_prime;
  return d;
}

IdentityResiduals lemma51_residuals(const SpectralParams& params, cplx z) {
  return lemma51_residuals(params, transform_state(params, z));
}

IdentityResiduals lemma51_residuals(const SpectralParams& params, const TransformState& st) {
  const SpectralParams p = validate_params(params);
  const double y = p.y;
  const double Y = p.Y;
  const cplx m = st.s_dddot;
  const cplx sdd = st.s_ddot;
  const cplx lead = (1.0 - Y) * m + 1.0;
  IdentityResiduals r{};

  r[0] = std::abs(st.z + m * (m + 1.0 - y) / lead);
  r[1] = std::abs(sdd - lead / (m * (m + 1.0)));

  const ChainDerivatives chain = chain_derivatives(p, st);
  const cplx m_prime = closed_form_prime(y, Y, m);
  r[2] = std::abs(m_prime - chain.s_dddot_prime);

  const MpSupport sup = mp_support(Y);
  const double atom = mp_atom(Y);
  quad::Tolerance tol;
  tol.absolute = 1e-11;
  auto first = [&](double t) { return mp_density(Y, t) / (sdd + t); };
  auto second = [&](double t) { return mp_density(Y, t) * t / ((sdd + t) * (sdd + t)); };
  const cplx int_first =
      quad::integrate_sqrt_edges(first, sup.a, sup.b, sup.a, sup.b, tol) + atom / sdd;
  const cplx int_second = quad::integrate_sqrt_edges(second, sup.a, sup.b, sup.a, sup.b, tol);
  r[3] = std::abs(int_first - m / lead);
  r[4] = std::abs(int_second - m * m / ((1.0 - Y) * m * m + 2.0 * m + 1.0));

  const cplx mp1 = m + 1.0;
  const cplx form_a = -((1.0 - Y) * m * m + 2.0 * m + 1.0) / (m * m * mp1 * mp1) * m_prime;
  const cplx form_b = -(1.0 - Y * m * m / (mp1 * mp1)) / (m * m) * m_prime;
  const double scale = std::max(1.0, std::abs(chain.s_ddot_prime));
  r[5] = std::max(std::abs(form_a - chain.s_ddot_prime), std::abs(form_b - chain.s_ddot_prime)) / scale;
  return r;
}

void validate_law(const DiscreteLaw& law) {
  if (law.locations.empty() || law.locations.size() != law.weights.size()) {
    throw Error(Errc::InvalidArgument, "discrete law needs matching, non-empty atom lists");
  }
  for (std::size_t i = 0; i < law.weights.size(); ++i) {
    if (!(law.weights[i] > 0.0) || !std::isfinite(law.locations[i])) {
      throw Error(Errc::InvalidArgument, "discrete law needs positive weights at finite points");
    }
  }
  const double total = std::accumulate(law.weights.begin(), law.weights.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(Errc::InvalidArgument, "discrete law weights must sum to 1");
  }
}

DiscreteLaw point_mass(double location) { return {{location}, {1.0}}; }

DiscreteLaw discretize_mp(double ratio, std::size_t atoms) {
  if (atoms == 0) throw Error(Errc::InvalidArgument, "need at least one atom");
  const MpSupport sup = mp_support(ratio);
  const double zero_mass = mp_atom(ratio);
  const double bulk = 1.0 - zero_mass;
  const double half = 0.5 * (sup.b - sup.a);
  // x = a + half (1 - cos th) maps [0, pi] onto [a, b]; the density times dx becomes
  // half^2 sin^2(th) / (2 pi x ratio) dth, which is smooth at both ends.
  auto mass_density = [&](double th) {
    const double x = sup.a + half * (1.0 - std::cos(th));
    const double s = std::sin(th);
    return half * half * s * s / (2.0 * std::numbers::pi * x * ratio);
  };
  // x cancels in x dF, so first moments are elementary.
  auto moment_antiderivative = [&](double th) {
    return half * half / (2.0 * std::numbers::pi * ratio) * (0.5 * th - 0.25 * std::sin(2.0 * th));
  };
  const auto& rule = quad::gauss_legendre16();
  auto cell_mass = [&](double lo, double hi) {
    const double c = 0.5 * (lo + hi);
    const double h = 0.5 * (hi - lo);
    double sum = 0.0;
    for (int k = 0; k < quad::kGaussOrder; ++k) {
      sum += rule.weights[k] * mass_density(c + h * rule.nodes[k]);
    }
    return sum * h;
  };

  DiscreteLaw law;
  if (zero_mass > 0.0) {
    law.locations.push_back(0.0);
    law.weights.push_back(zero_mass);
  }
  const double target = bulk / static_cast<double>(atoms);
  double lo = 0.0;
  for (std::size_t j = 0; j < atoms; ++j) {
    double hi = std::numbers::pi;
    if (j + 1 < atoms) {
      // Newton on the cell mass, safeguarded by bisection on [lo, pi].
      double left = lo;
      double right = std::numbers::pi;
      hi = std::min(right, lo + (right - lo) / static_cast<double>(atoms - j));
      for (int it = 0; it < 100; ++it) {
        const double g = cell_mass(lo, hi) - target;
        if (g > 0.0) {
          right = hi;
        } else {
          left = hi;
        }
        if (std::abs(g) <= 1e-16 * std::max(1.0, bulk) || right - left < 1e-15) break;
        double next = hi - g / mass_density(hi);
        if (!(next > left && next < right)) next = 0.5 * (left + right);
        hi = next;
      }
    }
    const double mass = j + 1 < atoms ? target : bulk - target * static_cast<double>(atoms - 1);
    const double moment = moment_antiderivative(hi) - moment_antiderivative(lo);
    law.locations.push_back(moment / cell_mass(lo, hi));
    law.weights.push_back(mass);
    lo = hi;
  }
  // Renormalize the last weight so the total is exactly representable as 1.
  const double total = std::accumulate(law.weights.begin(), law.weights.end() - 1, 0.0);
  law.weights.back() = 1.0 - total;
  return law;
}

cplx fixed_point_rhs(const DiscreteLaw& law, double y, double alpha, cplx z, cplx s) {
  const cplx w = 1.0 - y * (1.0 - z) * (z * s + 1.0);
  cplx sum = 0.0;
  for (std::size_t k = 0; k < law.locations.size(); ++k) {
    const double t = law.locations[k];
    sum += law.weights[k] * (w + alpha * t) / ((1.0 - z) * w - alpha * z * t);
  }
  return sum;
}

FixedPointResult fixed_point_solve(const DiscreteLaw& law, double y, double alpha, cplx z,
                                   const FixedPointOptions& options) {
  validate_law(law);
  if (!(y > 0.0) || !(alpha > 0.0)) throw Error(Errc::NonPositive, "y and alpha must be positive");
  if (!(z.imag() > 0.0)) throw Error(Errc::InvalidArgument, "fixed-point solve needs Im z > 0");
  FixedPointResult out;
  cplx s = options.initial.value_or(cplx(0.0, 1.0));
  double omega = options.damping;
  double previous = HUGE_VAL;
  int rising = 0;
  for (int it = 1; it <= options.max_iterations; ++it) {
    const cplx rhs = fixed_point_rhs(law, y, alpha, z, s);
    const double residual = std::abs(rhs - s);
    if (!std::isfinite(residual)) break;
    if (residual <= options.tolerance) {
      out.value = rhs;
      out.residual = std::abs(fixed_point_rhs(law, y, alpha, z, rhs) - rhs);
      out.iterations = it;
      if (!(out.value.imag() > 0.0)) {
        throw Error(Errc::NotInUpperHalfPlane, "fixed point has Im s <= 0");
      }
      return out;
    }
    rising = residual > previous ? rising + 1 : 0;
    if (rising >= 3 && !out.used_fallback) {
      omega = options.fallback_damping;
      out.used_fallback = true;
      rising = 0;
    }
    previous = residual;
    s = (1.0 - omega) * s + omega * rhs;
  }
  throw Error(Errc::NoConvergence, "fixed-point iteration did not converge in " +
                                       std::to_string(options.max_iterations) + " steps");
}

}  // namespace betalss
