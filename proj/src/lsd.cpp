#include "betalss/lsd.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "betalss/errors.hpp"
#include "betalss/quadrature.hpp"

namespace betalss {

namespace {

constexpr double kPi = std::numbers::pi;

// Closed form s(w) = (A + R)/C - 1/w with R the analytic square root of the edge quadratic.
// Using A^2 - R^2 = 4(1-w)(y(1-w) + alpha w Y) the same value is 2/(w(A - R)) - 1/w; the
// evaluator picks whichever form avoids cancellation.
struct BetaForm {
  double y, Y, alpha;
  double t_l, t_r, sqrt_disc;
  double sigma = 1.0;

  explicit BetaForm(const SpectralParams& p) : y(p.y), Y(p.Y), alpha(p.alpha) {
    const SupportEdges e = support_edges(p);
    t_l = e.t_l;
    t_r = e.t_r;
    sqrt_disc = std::sqrt(edge_discriminant(p));
    // Just above the support R is imaginary while A and C are real, so the sign of Im s
    // there identifies the branch unambiguously.
    const cplx ref(0.5 * (t_l + t_r), 1e-3 * (t_r - t_l));
    sigma = 1.0;
    if (!(value(ref).imag() > 0.0)) {
      sigma = -1.0;
      if (!(value(ref).imag() > 0.0)) {
        throw Error(Errc::BranchAmbiguity, "no square-root branch with Im s > 0");
      }
    }
  }

  cplx A(cplx w) const { return (1.0 + y) * (1.0 - w) - alpha * w * (1.0 - Y); }
  double dA() const { return -(1.0 + y) - alpha * (1.0 - Y); }
  cplx R(cplx w) const { return sigma * sqrt_disc * std::sqrt(w - t_l) * std::sqrt(w - t_r); }

  cplx value(cplx w) const {
    const cplx a = A(w);
    const cplx r = R(w);
    const cplx plus = a + r;
    const cplx minus = a - r;
    if (std::abs(plus) >= std::abs(minus)) {
      const cplx q = y * (1.0 - w) + alpha * w * Y;
      return plus / (2.0 * w * (1.0 - w) * q) - 1.0 / w;
    }
    return 2.0 / (w * minus) - 1.0 / w;
  }

  cplx derivative(cplx w) const {
    const cplx a = A(w);
    const cplx r = R(w);
    const cplx dr = 0.5 * r * (1.0 / (w - t_l) + 1.0 / (w - t_r));
    const cplx plus = a + r;
    const cplx minus = a - r;
    if (std::abs(plus) >= std::abs(minus)) {
      const cplx q = y * (1.0 - w) + alpha * w * Y;
      const double dq = -y + alpha * Y;
      const cplx c = 2.0 * w * (1.0 - w) * q;
      const cplx dc = 2.0 * ((1.0 - w) * q - w * q + w * (1.0 - w) * dq);
      return (dA() + dr) / c - plus * dc / (c * c) + 1.0 / (w * w);
    }
    const cplx den = w * minus;
    return -2.0 * (minus + w * (dA() - dr)) / (den * den) + 1.0 / (w * w);
  }
};

void require_off_support(const SpectralParams& p, cplx z) {
  if (z == cplx(0.0, 0.0) || z == cplx(1.0, 0.0)) {
    throw Error(Errc::InvalidArgument, "Stieltjes transform has poles at 0 and 1");
  }
  if (z.imag() == 0.0) {
    const SupportEdges e = support_edges(p);
    if (z.real() >= e.t_l && z.real() <= e.t_r) {
      throw Error(Errc::InvalidArgument, "real argument lies on the support");
    }
  }
}

// s_mp(u) = (1 - Y - u + R)/(2 Y u) = 2/(1 - Y - u - R), R = sqrt(u-a) sqrt(u-b).
struct MpForm {
  double ratio, a, b;

  explicit MpForm(double r) : ratio(r) {
    const MpSupport s = mp_support(r);
    a = s.a;
    b = s.b;
  }

  cplx R(cplx u) const { return std::sqrt(u - a) * std::sqrt(u - b); }

  cplx value(cplx u) const {
    const cplx r = R(u);
    const cplx plus = 1.0 - ratio - u + r;
    const cplx minus = 1.0 - ratio - u - r;
    if (std::abs(plus) >= std::abs(minus)) return plus / (2.0 * ratio * u);
    return 2.0 / minus;
  }

  cplx derivative(cplx u) const {
    const cplx r = R(u);
    const cplx dr = 0.5 * r * (1.0 / (u - a) + 1.0 / (u - b));
    const cplx plus = 1.0 - ratio - u + r;
    const cplx minus = 1.0 - ratio - u - r;
    if (std::abs(plus) >= std::abs(minus)) {
      return (-1.0 + dr) / (2.0 * ratio * u) - plus / (2.0 * ratio * u * u);
    }
    return 2.0 * (1.0 + dr) / (minus * minus);
  }
};

}  // namespace

double edge_discriminant(const SpectralParams& params) {
  const double k = params.alpha * (1.0 - params.Y) - 1.0 + params.y;
  return k * k + 4.0 * params.alpha;
}

SupportEdges support_edges(const SpectralParams& params) {
  const SpectralParams p = validate_params(params);
  const double k = p.alpha * (1.0 - p.Y) - 1.0 + p.y;
  const double disc = k * k + 4.0 * p.alpha;
  const double centre = 2.0 * p.alpha - (1.0 - p.y) * k;
  const double spread = 2.0 * p.alpha * std::sqrt(p.y - p.y * p.Y + p.Y);
  return {(centre - spread) / disc, (centre + spread) / disc};
}

double lsd_density(const SpectralParams& params, double t) {
  return LsdModel(params).density(t);
}

Atoms lsd_atoms(const SpectralParams& params) {
  const SpectralParams p = validate_params(params);
  return {std::max(0.0, 1.0 - 1.0 / p.y), std::max(0.0, 1.0 - 1.0 / p.Y)};
}

double lsd_cdf(const SpectralParams& params, double x) { return LsdModel(params).cdf(x); }

cplx stieltjes_s(const SpectralParams& params, cplx z) {
  require_off_support(params, z);
  const BetaForm form(params);
  // The closed form is evaluated in C+ and reflected, so s(conj z) = conj s(z) exactly.
  const bool lower = z.imag() < 0.0;
  const cplx s = form.value(lower ? std::conj(z) : z);
  if (z.imag() != 0.0 && s.imag() < -1e-12 * std::max(1.0, std::abs(s))) {
    throw Error(Errc::BranchAmbiguity, "Stieltjes transform left the upper half plane");
  }
  return lower ? std::conj(s) : s;
}

cplx stieltjes_s_derivative(const SpectralParams& params, cplx z) {
  require_off_support(params, z);
  const BetaForm form(params);
  const bool lower = z.imag() < 0.0;
  const cplx d = form.derivative(lower ? std::conj(z) : z);
  return lower ? std::conj(d) : d;
}

double density_from_stieltjes(const SpectralParams& params, double x, double eps) {
  if (!(eps > 0.0)) throw Error(Errc::InvalidArgument, "eps must be positive");
  return std::max(0.0, stieltjes_s(params, cplx(x, eps)).imag() / kPi);
}

MpSupport mp_support(double ratio) {
  if (!(ratio > 0.0) || !std::isfinite(ratio)) {
    throw Error(Errc::NonPositive, "Marchenko-Pastur ratio must be positive");
  }
  const double r = std::sqrt(ratio);
  return {(1.0 - r) * (1.0 - r), (1.0 + r) * (1.0 + r)};
}

double mp_atom(double ratio) {
  mp_support(ratio);
  return std::max(0.0, 1.0 - 1.0 / ratio);
}

double mp_density(double ratio, double x) {
  const MpSupport s = mp_support(ratio);
  if (!(x > s.a && x < s.b)) return 0.0;
  return std::sqrt((s.b - x) * (x - s.a)) / (2.0 * kPi * x * ratio);
}

cplx mp_stieltjes(double ratio, cplx z) {
  const MpForm form(ratio);
  if (z == cplx(0.0, 0.0)) throw Error(Errc::InvalidArgument, "z = 0 is a pole");
  if (z.imag() == 0.0 && z.real() >= form.a && z.real() <= form.b) {
    throw Error(Errc::InvalidArgument, "real argument lies on the Marchenko-Pastur support");
  }
  const bool lower = z.imag() < 0.0;
  const cplx s = form.value(lower ? std::conj(z) : z);
  return lower ? std::conj(s) : s;
}

cplx mp_stieltjes_derivative(double ratio, cplx z) {
  const MpForm form(ratio);
  const bool lower = z.imag() < 0.0;
  const cplx d = form.derivative(lower ? std::conj(z) : z);
  return lower ? std::conj(d) : d;
}

// F-matrix law, written in the variable x of S T^{-1}:
//   s(x) = (1 - y - x(1 + Y) + sqrt(Q(x))) / (2x(y + xY)),
//   Q(x) = ((1-y) + x(1-Y))^2 - 4x = (1-Y)^2 (x - r1)(x - r2).
namespace {

struct FForm {
  double y, Y, r1, r2, lead;
  double sigma = 1.0;

  explicit FForm(const SpectralParams& p) : y(p.y), Y(p.Y) {
    if (p.Y == 1.0) throw Error(Errc::InvalidArgument, "F-matrix closed form requires Y != 1");
    const double oy = 1.0 - y;
    const double oY = 1.0 - Y;
    lead = std::abs(oY);
    const double centre = 4.0 - 2.0 * oy * oY;
    const double spread = 4.0 * std::sqrt(y + Y - y * Y);
    r1 = (centre - spread) / (2.0 * oY * oY);
    r2 = (centre + spread) / (2.0 * oY * oY);
    const cplx ref(0.5 * (r1 + r2), 1e-3 * (r2 - r1));
    if (!(value(ref).imag() > 0.0)) {
      sigma = -1.0;
      if (!(value(ref).imag() > 0.0)) {
        throw Error(Errc::BranchAmbiguity, "F-matrix branch selection failed");
      }
    }
  }

  cplx value(cplx x) const {
    const cplx root = sigma * lead * std::sqrt(x - r1) * std::sqrt(x - r2);
    return (1.0 - y - x * (1.0 + Y) + root) / (2.0 * x * (y + x * Y));
  }
};

}  // namespace

cplx fmatrix_stieltjes(const SpectralParams& params, cplx z) {
  const FForm form(validate_params(params));
  const bool lower = z.imag() < 0.0;
  const cplx s = form.value(lower ? std::conj(z) : z);
  return lower ? std::conj(s) : s;
}

double fmatrix_density(const SpectralParams& params, double x) {
  if (!(x > 0.0)) return 0.0;
  const FForm form(validate_params(params));
  if (!(x > form.r1 && x < form.r2)) return 0.0;
  return form.value(cplx(x, 0.0)).imag() / kPi;
}

double f_matrix_pushforward_check(const SpectralParams& params, std::span<const double> grid) {
  const SpectralParams p = validate_params(params);
  if (!(p.Y < 1.0)) throw Error(Errc::InvalidArgument, "pushforward check requires Y < 1");
  const LsdModel model(p);
  double worst = 0.0;
  for (const double t : grid) {
    const double lhs = model.density(t);
    double rhs = 0.0;
    if (t > 0.0 && t < 1.0) {
      const double x = p.alpha * t / (1.0 - t);
      rhs = fmatrix_density(p, x) * p.alpha / ((1.0 - t) * (1.0 - t));
    }
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

bool support_inside_analyticity_interval(const SpectralParams& params) {
  const SupportEdges e = support_edges(params);
  const AnalyticityInterval iv = analyticity_interval(params);
  return iv.c_l < e.t_l && e.t_r < iv.c_r;
}

// ---------------------------------------------------------------------------

LsdModel::LsdModel(const SpectralParams& params)
    : params_(validate_params(params)),
      edges_(support_edges(params_)),
      atoms_(lsd_atoms(params_)),
      disc_(edge_discriminant(params_)) {}

double LsdModel::density(double t) const {
  if (!(t > edges_.t_l && t < edges_.t_r)) return 0.0;
  const double y = params_.y;
  const double num = std::sqrt(disc_ * (edges_.t_r - t) * (t - edges_.t_l));
  const double den =
      2.0 * kPi * t * (1.0 - t) * (y * (1.0 - t) + params_.alpha * t * params_.Y);
  return num / den;
}

double LsdModel::bulk_mass() const {
  auto f = [this](double t) { return density(t); };
  return quad::integrate_sqrt_edges(f, edges_.t_l, edges_.t_r, edges_.t_l, edges_.t_r);
}

double LsdModel::cdf(double x) const {
  if (x < 0.0) return 0.0;
  double total = atoms_.at_zero;
  if (x > edges_.t_l) {
    auto f = [this](double t) { return density(t); };
    total += quad::integrate_sqrt_edges(f, edges_.t_l, edges_.t_r, edges_.t_l,
                                        std::min(x, edges_.t_r));
  }
  if (x >= 1.0) total += atoms_.at_one;
  return std::clamp(total, 0.0, 1.0);
}

cplx LsdModel::stieltjes(cplx z) const { return stieltjes_s(params_, z); }

}  // namespace betalss
