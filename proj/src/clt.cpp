#include "betalss/clt.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "betalss/errors.hpp"
#include "betalss/quadrature.hpp"
#include "betalss/transform_chain.hpp"

namespace betalss {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kImagLimit = 1e-6;

double point_segment_distance(cplx p, cplx a, cplx b) {
  const cplx ab = b - a;
  const double len2 = std::norm(ab);
  if (len2 == 0.0) return std::abs(p - a);
  const double t = std::clamp(((p - a) * std::conj(ab)).real() / len2, 0.0, 1.0);
  return std::abs(p - (a + t * ab));
}

// Distance from the segment [p0, p1] to the points and real intervals where the integrands
// are singular. The contour never crosses these, so segment-to-segment distance reduces to
// endpoint distances.
struct SingularSet {
  std::vector<cplx> points;
  std::vector<std::pair<double, double>> intervals;

  double distance(cplx p0, cplx p1) const {
    double d = HUGE_VAL;
    for (const cplx q : points) d = std::min(d, point_segment_distance(q, p0, p1));
    for (const auto& [lo, hi] : intervals) {
      const cplx a(lo, 0.0);
      const cplx b(hi, 0.0);
      d = std::min({d, point_segment_distance(a, p0, p1), point_segment_distance(b, p0, p1),
                    point_segment_distance(p0, a, b), point_segment_distance(p1, a, b)});
    }
    return d;
  }
};

// A panel is split until its length is at most `ratio` times its distance to the singular set
// and at most `ratio` times `cap`.
void add_panels(cplx p0, cplx p1, const SingularSet& singular, double ratio, double cap, int depth,
                Contour& c) {
  const double length = std::abs(p1 - p0);
  if (depth < 40 && length > ratio * std::min(cap, singular.distance(p0, p1))) {
    const cplx mid = 0.5 * (p0 + p1);
    add_panels(p0, mid, singular, ratio, cap, depth + 1, c);
    add_panels(mid, p1, singular, ratio, cap, depth + 1, c);
    return;
  }
  const auto& rule = quad::gauss_legendre16();
  const cplx centre = 0.5 * (p0 + p1);
  const cplx half = 0.5 * (p1 - p0);
  for (int k = 0; k < quad::kGaussOrder; ++k) {
    c.nodes.push_back(centre + half * rule.nodes[k]);
    c.weights.push_back(half * rule.weights[k]);
  }
}

SingularSet singular_set(const SpectralParams& p) {
  const SupportEdges e = support_edges(p);
  SingularSet s;
  s.points = {cplx(0.0, 0.0), cplx(-p.alpha, 0.0)};
  s.intervals.emplace_back(p.alpha * e.t_l / (1.0 - e.t_l), p.alpha * e.t_r / (1.0 - e.t_r));
  return s;
}

// Left end the contour must stay to the right of: z = 0 when the interval is bounded away
// from it, otherwise z = -alpha (the interval then starts at 0 and the chain is regular there).
double left_barrier(double a, double alpha) { return a > 0.0 ? 0.0 : -alpha; }

std::pair<double, double> default_margins(double a, double b, double alpha) {
  const double dv = std::min(0.25 * (b - a), std::max(0.5, (b - a) / 64.0));
  const double dh = std::min({0.25 * (b - a), 0.5, 0.25 * (a - left_barrier(a, alpha))});
  return {dh, dv};
}

double checked_real(cplx v, const char* what) {
  const double limit = kImagLimit * std::max(1.0, std::abs(v.real()));
  if (!(std::abs(v.imag()) <= limit)) {
    throw Error(Errc::ImaginaryResidue, std::string(what) + " has imaginary part " +
                                            std::to_string(v.imag()));
  }
  return v.real();
}

}  // namespace

// ---------------------------------------------------------------------------

TestFunction TestFunction::identity() { return TestFunction{}; }

TestFunction TestFunction::log() {
  TestFunction f;
  f.kind_ = FunctionKind::Log;
  return f;
}

TestFunction TestFunction::inv_diff(double alpha) {
  if (!(alpha > 0.0)) throw Error(Errc::NonPositive, "alpha must be positive");
  TestFunction f;
  f.kind_ = FunctionKind::InvDiff;
  f.a_ = alpha;
  return f;
}

TestFunction TestFunction::log_linear(double n, double N) {
  if (!(n > 0.0) || !(N > 0.0)) throw Error(Errc::NonPositive, "n and N must be positive");
  TestFunction f;
  f.kind_ = FunctionKind::LogLinear;
  f.a_ = n;
  f.b_ = N;
  return f;
}

TestFunction TestFunction::quad_l5(double c_n, double c_N) {
  if (!(c_n > 0.0) || !(c_N > 0.0)) throw Error(Errc::NonPositive, "c_n and c_N must be positive");
  TestFunction f;
  f.kind_ = FunctionKind::QuadL5;
  f.a_ = c_n;
  f.b_ = c_N;
  return f;
}

TestFunction TestFunction::polynomial(std::vector<double> coeffs) {
  if (coeffs.empty()) throw Error(Errc::InvalidArgument, "polynomial needs coefficients");
  TestFunction f;
  f.kind_ = FunctionKind::Polynomial;
  f.coeffs_ = std::move(coeffs);
  return f;
}

std::string TestFunction::name() const {
  switch (kind_) {
    case FunctionKind::Identity: return "identity";
    case FunctionKind::Log: return "log";
    case FunctionKind::InvDiff: return "inv-diff";
    case FunctionKind::LogLinear: return "log-linear";
    case FunctionKind::QuadL5: return "quad-l5";
    case FunctionKind::Polynomial: return "polynomial";
  }
  return "unknown";
}

cplx TestFunction::operator()(cplx x) const {
  switch (kind_) {
    case FunctionKind::Identity:
      return x;
    case FunctionKind::Log:
      return std::log(x);
    case FunctionKind::InvDiff:
      return (1.0 - x) / (a_ * x);
    case FunctionKind::LogLinear: {
      const double c_n = a_ / (a_ + b_);
      const double c_N = b_ / (a_ + b_);
      return a_ * std::log(x / c_n) + b_ * std::log((1.0 - x) / c_N);
    }
    case FunctionKind::QuadL5: {
      const cplx u = x / a_ - 1.0;
      const cplx v = (1.0 - x) / b_ - 1.0;
      return a_ * u * u + b_ * v * v;
    }
    case FunctionKind::Polynomial: {
      cplx acc = 0.0;
      for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
      return acc;
    }
  }
  return 0.0;
}

double TestFunction::operator()(double x) const {
  switch (kind_) {
    case FunctionKind::Identity:
      return x;
    case FunctionKind::Log:
      return std::log(x);
    case FunctionKind::InvDiff:
      return (1.0 - x) / (a_ * x);
    case FunctionKind::LogLinear: {
      const double c_n = a_ / (a_ + b_);
      const double c_N = b_ / (a_ + b_);
      return a_ * std::log(x / c_n) + b_ * std::log((1.0 - x) / c_N);
    }
    case FunctionKind::QuadL5: {
      const double u = x / a_ - 1.0;
      const double v = (1.0 - x) / b_ - 1.0;
      return a_ * u * u + b_ * v * v;
    }
    case FunctionKind::Polynomial: {
      double acc = 0.0;
      for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
      return acc;
    }
  }
  return 0.0;
}

bool TestFunction::singular_at_zero() const {
  return kind_ == FunctionKind::Log || kind_ == FunctionKind::InvDiff ||
         kind_ == FunctionKind::LogLinear;
}

bool TestFunction::singular_at_one() const { return kind_ == FunctionKind::LogLinear; }

// ---------------------------------------------------------------------------

std::pair<double, double> contour_base_interval(const SpectralParams& params) {
  const SpectralParams p = validate_params(params);
  const AnalyticityInterval iv = analyticity_interval(p);
  return {p.alpha * iv.c_l / (1.0 - iv.c_l), p.alpha * iv.c_r / (1.0 - iv.c_r)};
}

Contour build_contour(const SpectralParams& params, double delta_h, double delta_v,
                      int nodes_per_side) {
  const SpectralParams p = validate_params(params);
  if (nodes_per_side < 64) {
    throw Error(Errc::InvalidArgument, "nodes_per_side must be at least 64");
  }
  if (!(delta_h > 0.0) || !(delta_v > 0.0)) {
    throw Error(Errc::SingularContour, "contour margins must be positive");
  }
  const auto [a, b] = contour_base_interval(p);
  Contour c;
  c.a = a;
  c.b = b;
  c.delta_h = delta_h;
  c.delta_v = delta_v;
  c.nodes_per_side = nodes_per_side;
  if (!(c.left() > left_barrier(a, p.alpha))) {
    throw Error(Errc::SingularContour, a > 0.0 ? "contour must not enclose z = 0"
                                               : "contour must not enclose z = -alpha");
  }
  if (!std::isfinite(c.right())) {
    throw Error(Errc::SingularContour, "contour base interval is unbounded");
  }
  const SingularSet singular = singular_set(p);
  const cplx corners[4] = {cplx(c.left(), -delta_v), cplx(c.right(), -delta_v),
                           cplx(c.right(), delta_v), cplx(c.left(), delta_v)};
  const int panels = std::max(1, nodes_per_side / quad::kGaussOrder);
  const double ratio = 64.0 / static_cast<double>(nodes_per_side);
  const double cap = std::max(2.0 * delta_v, (b - a) / 32.0);
  for (int side = 0; side < 4; ++side) {
    const cplx p0 = corners[side];
    const cplx p1 = corners[(side + 1) % 4];
    for (int j = 0; j < panels; ++j) {
      const cplx q0 = p0 + (p1 - p0) * (static_cast<double>(j) / panels);
      const cplx q1 = p0 + (p1 - p0) * (static_cast<double>(j + 1) / panels);
      add_panels(q0, q1, singular, ratio, cap, 0, c);
    }
  }
  for (const cplx z : c.nodes) {
    try {
      transform_state(p, z);
    } catch (const Error& e) {
      if (e.code() == Errc::SingularPoint || e.code() == Errc::InvalidArgument) {
        throw Error(Errc::SingularContour, std::string("node is singular: ") + e.what());
      }
      throw;
    }
  }
  return c;
}

Contour build_contour(const SpectralParams& params, const ContourConfig& config) {
  const auto [a, b] = contour_base_interval(params);
  const auto [dh, dv] = default_margins(a, b, params.alpha);
  return build_contour(params, config.delta_h.value_or(dh), config.delta_v.value_or(dv),
                       config.nodes_per_side);
}

ContourPair build_contour_pair(const SpectralParams& params, const ContourConfig& config) {
  const auto [a, b] = contour_base_interval(params);
  const auto [dh0, dv0] = default_margins(a, b, params.alpha);
  const double dh = config.delta_h.value_or(dh0);
  const double dv = config.delta_v.value_or(dv0);
  ContourPair pair{build_contour(params, dh, dv, config.nodes_per_side),
                   build_contour(params, 2.0 * dh, 2.0 * dv, config.nodes_per_side)};
  check_nested(pair);
  return pair;
}

void check_nested(const ContourPair& pair) {
  const Contour& in = pair.inner;
  const Contour& out = pair.outer;
  if (!(out.left() < in.left() && out.right() > in.right() && out.delta_v > in.delta_v)) {
    throw Error(Errc::ContourCollision, "outer contour must strictly enclose the inner one");
  }
}

ContourSamples sample_contour(const SpectralParams& params, const Contour& contour) {
  ContourSamples s;
  s.contour = contour;
  const std::size_t n = contour.nodes.size();
  s.m.resize(n);
  s.m_prime.resize(n);
  s.argument.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const cplx z = contour.nodes[k];
    const TransformState st = transform_state(params, z);
    s.m[k] = st.s_dddot;
    s.m_prime[k] = st.s_dddot_prime;
    s.argument[k] = z / (params.alpha + z);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Mean: with m = s_dddot and h = 1 - Y m^2/(1+m)^2,
//   tau/(4 pi i)        oint f(w) [g1(m) + h'(m)/h(m)] m' dz
//   (m4_x-tau-2)/(2 pi i)  oint f(w) y/(m+1)^3 m' dz
//   (m4_xx-tau-2)/(4 pi i) oint f(w) h'(m) m' dz
// with g1 = (2(1-Y)m+2)/((1-Y)m^2+2m+1-y) - (2(1-Y)m+2)/((1-Y)m^2+2m+1) and w = z/(alpha+z).

CltValue clt_mean_value(const TestFunction& f, const SpectralParams& params,
                        const ContourSamples& samples) {
  const SpectralParams p = validate_params(params);
  const double y = p.y;
  const double Y = p.Y;
  const double tau = p.tau;
  const double beta_x = p.m4_x - tau - 2.0;
  const double beta_xx = p.m4_xx - tau - 2.0;
  const cplx i(0.0, 1.0);
  cplx sum_log = 0.0, sum_x = 0.0, sum_xx = 0.0;
  const auto& w = samples.contour.weights;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const cplx m = samples.m[k];
    const cplx mp1 = m + 1.0;
    const cplx lin = 2.0 * (1.0 - Y) * m + 2.0;
    const cplx quad0 = (1.0 - Y) * m * m + 2.0 * m + 1.0;
    const cplx g1 = lin / (quad0 - y) - lin / quad0;
    const cplx h = 1.0 - Y * m * m / (mp1 * mp1);
    const cplx dh = -2.0 * Y * m / (mp1 * mp1 * mp1);
    const cplx base = f(samples.argument[k]) * samples.m_prime[k] * w[k];
    sum_log += base * (g1 + dh / h);
    sum_x += base * (y / (mp1 * mp1 * mp1));
    sum_xx += base * dh;
  }
  const cplx total = tau / (4.0 * kPi * i) * sum_log + beta_x / (2.0 * kPi * i) * sum_x +
                     beta_xx / (4.0 * kPi * i) * sum_xx;
  return {checked_real(total, "mean"), std::abs(total.imag())};
}

double clt_mean(const TestFunction& f, const SpectralParams& params, const Contour& contour) {
  return clt_mean_value(f, params, sample_contour(params, contour)).value;
}

// ---------------------------------------------------------------------------
// Covariance:
//   -(tau+1)/(4 pi^2) oint oint f(w1) g(w2) [m1' m2'/(m1-m2)^2 - 1/(z1-z2)^2] dz1 dz2
//   -(y beta_x + Y beta_xx)/(4 pi^2) oint f m'/(m+1)^2 dz  oint g m'/(m+1)^2 dz
// The subtracted 1/(z1-z2)^2 integrates to zero. Since z = -m(m+1-y)/((1-Y)m+1) on the
// contour, the bracket equals the regular kernel
//   (y+Y-yY) m1' m2' / (m1 + m2 + (1-Y) m1 m2 + 1 - y)^2,
// which is evaluated instead of the difference of two nearly equal poles.

namespace {

struct CovarianceSums {
  std::vector<std::vector<cplx>> kernel_outer;  // [function][inner node] sum over outer nodes
  std::vector<std::vector<cplx>> f_inner;       // [function][inner node] f(w) dz
  std::vector<cplx> single;                     // [function] oint f m'/(m+1)^2 dz, inner
};

CovarianceSums covariance_sums(const std::vector<const TestFunction*>& fs, const SpectralParams& p,
                               const ContourSamples& inner, const ContourSamples& outer) {
  const std::size_t n1 = inner.m.size();
  const std::size_t n2 = outer.m.size();
  const std::size_t k = fs.size();
  std::vector<std::vector<cplx>> g_outer(k, std::vector<cplx>(n2));
  CovarianceSums out;
  out.f_inner.assign(k, std::vector<cplx>(n1));
  out.kernel_outer.assign(k, std::vector<cplx>(n1, 0.0));
  out.single.assign(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t b = 0; b < n2; ++b) {
      g_outer[j][b] = (*fs[j])(outer.argument[b]) * outer.contour.weights[b];
    }
    for (std::size_t a = 0; a < n1; ++a) {
      const cplx fw = (*fs[j])(inner.argument[a]) * inner.contour.weights[a];
      out.f_inner[j][a] = fw;
      const cplx mp1 = inner.m[a] + 1.0;
      out.single[j] += fw * inner.m_prime[a] / (mp1 * mp1);
    }
  }
  const double c = 1.0 - p.Y;
  const double k0 = 1.0 - p.y;
  const double h2 = p.y + p.Y - p.y * p.Y;
  std::vector<cplx> row(n2);
  for (std::size_t a = 0; a < n1; ++a) {
    const cplx m1 = inner.m[a];
    const cplx d1 = h2 * inner.m_prime[a];
    for (std::size_t b = 0; b < n2; ++b) {
      const cplx m2 = outer.m[b];
      const cplx den = m1 + m2 + c * m1 * m2 + k0;
      row[b] = d1 * outer.m_prime[b] / (den * den);
    }
    for (std::size_t j = 0; j < k; ++j) {
      cplx acc = 0.0;
      const auto& g = g_outer[j];
      for (std::size_t b = 0; b < n2; ++b) acc += row[b] * g[b];
      out.kernel_outer[j][a] = acc;
    }
  }
  return out;
}

// Entry (i, j) of the covariance matrix from precomputed sums, before symmetrization.
cplx covariance_entry(const CovarianceSums& sums, std::size_t i, std::size_t j,
                      const SpectralParams& p) {
  cplx dbl = 0.0;
  const auto& fi = sums.f_inner[i];
  const auto& kj = sums.kernel_outer[j];
  for (std::size_t a = 0; a < fi.size(); ++a) dbl += fi[a] * kj[a];
  const double tau = p.tau;
  const double moment = p.y * (p.m4_x - tau - 2.0) + p.Y * (p.m4_xx - tau - 2.0);
  return -(tau + 1.0) / (4.0 * kPi * kPi) * dbl -
         moment / (4.0 * kPi * kPi) * sums.single[i] * sums.single[j];
}

}  // namespace

CltValue clt_cov_value(const TestFunction& f, const TestFunction& g, const SpectralParams& params,
                       const ContourSamples& inner, const ContourSamples& outer) {
  const SpectralParams p = validate_params(params);
  check_nested({inner.contour, outer.contour});
  const CovarianceSums sums = covariance_sums({&f, &g}, p, inner, outer);
  const cplx total = 0.5 * (covariance_entry(sums, 0, 1, p) + covariance_entry(sums, 1, 0, p));
  return {checked_real(total, "covariance"), std::abs(total.imag())};
}

double clt_cov(const TestFunction& f, const TestFunction& g, const SpectralParams& params,
               const ContourPair& pair) {
  check_nested(pair);
  return clt_cov_value(f, g, params, sample_contour(params, pair.inner),
                       sample_contour(params, pair.outer))
      .value;
}

// ---------------------------------------------------------------------------

namespace {

struct LimitPass {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  double max_imag = 0.0;
  std::size_t inner_nodes = 0;
  std::size_t outer_nodes = 0;
};

LimitPass limit_pass(const std::vector<TestFunction>& fs, const SpectralParams& p,
                     const ContourPair& pair) {
  const ContourSamples inner = sample_contour(p, pair.inner);
  const ContourSamples outer = sample_contour(p, pair.outer);
  const std::size_t k = fs.size();
  LimitPass out;
  out.inner_nodes = inner.m.size();
  out.outer_nodes = outer.m.size();
  out.mean.resize(static_cast<Eigen::Index>(k));
  out.cov.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) {
    const CltValue v = clt_mean_value(fs[i], p, inner);
    out.mean[static_cast<Eigen::Index>(i)] = v.value;
    out.max_imag = std::max(out.max_imag, v.imag_residue);
  }
  std::vector<const TestFunction*> ptrs;
  for (const auto& f : fs) ptrs.push_back(&f);
  const CovarianceSums sums = covariance_sums(ptrs, p, inner, outer);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      const cplx total = 0.5 * (covariance_entry(sums, i, j, p) + covariance_entry(sums, j, i, p));
      const double value = checked_real(total, "covariance");
      out.max_imag = std::max(out.max_imag, std::abs(total.imag()));
      out.cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = value;
      out.cov(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = value;
    }
  }
  return out;
}

double relative_change(const LimitPass& a, const LimitPass& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.mean.size(); ++i) {
    worst = std::max(worst, std::abs(a.mean[i] - b.mean[i]) / std::max(1.0, std::abs(b.mean[i])));
    for (Eigen::Index j = 0; j < a.mean.size(); ++j) {
      worst = std::max(worst,
                       std::abs(a.cov(i, j) - b.cov(i, j)) / std::max(1.0, std::abs(b.cov(i, j))));
    }
  }
  return worst;
}

}  // namespace

GaussianLimit gaussian_limit(const std::vector<TestFunction>& fs, const SpectralParams& params,
                             const ContourConfig& config) {
  if (fs.empty()) throw Error(Errc::InvalidArgument, "need at least one test function");
  const SpectralParams p = validate_params(params);
  const AnalyticityInterval iv = analyticity_interval(p);
  for (const auto& f : fs) {
    if (f.singular_at_zero() && !(iv.c_l > 0.0)) {
      throw Error(Errc::SingularContour, f.name() + " is singular at 0 and c_l = 0");
    }
    if (f.singular_at_one() && !(iv.c_r < 1.0)) {
      throw Error(Errc::SingularContour, f.name() + " is singular at 1 and c_r = 1");
    }
  }
  ContourConfig cfg = config;
  ContourPair pair = build_contour_pair(p, cfg);
  LimitPass current = limit_pass(fs, p, pair);
  GaussianLimit out;
  out.diagnostics.max_imag_residue = current.max_imag;
  out.diagnostics.last_change = HUGE_VAL;
  for (int r = 0; r < cfg.max_refinements; ++r) {
    cfg.nodes_per_side *= 2;
    pair = build_contour_pair(p, cfg);
    LimitPass next = limit_pass(fs, p, pair);
    const double change = relative_change(next, current);
    out.diagnostics.max_imag_residue = std::max(out.diagnostics.max_imag_residue, next.max_imag);
    out.diagnostics.refinements = r + 1;
    out.diagnostics.last_change = change;
    current = std::move(next);
    if (change <= cfg.refine_tolerance) {
      out.diagnostics.converged = true;
      break;
    }
  }
  out.mean = current.mean;
  out.cov = 0.5 * (current.cov + current.cov.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.cov);
  const double lowest = eig.eigenvalues().minCoeff();
  if (lowest < 0.0 && lowest > -1e-8) {
    Eigen::VectorXd ev = eig.eigenvalues().cwiseMax(0.0);
    out.cov = eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose();
    out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
    out.diagnostics.psd_projected = true;
  }
  out.diagnostics.nodes_per_side = cfg.nodes_per_side;
  out.diagnostics.inner_nodes = current.inner_nodes;
  out.diagnostics.outer_nodes = current.outer_nodes;
  out.diagnostics.a = pair.inner.a;
  out.diagnostics.b = pair.inner.b;
  out.diagnostics.delta_h = pair.inner.delta_h;
  out.diagnostics.delta_v = pair.inner.delta_v;
  return out;
}

}  // namespace betalss
