#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "betalss/lsd.hpp"
#include "betalss/params.hpp"

namespace betalss {

enum class FunctionKind { Identity, Log, InvDiff, LogLinear, QuadL5, Polynomial };

/// Test function f applied to eigenvalues x of the Beta matrix. All kinds are analytic on
/// a neighbourhood of (0, 1); Log, InvDiff and LogLinear are singular at 0, LogLinear also at 1.
class TestFunction {
 public:
  static TestFunction identity();
  static TestFunction log();
  /// (1 - x)/(alpha x)
  static TestFunction inv_diff(double alpha);
  /// n log(x/c_n) + N log((1-x)/c_N), with c_n = n/(n+N) and c_N = N/(n+N)
  static TestFunction log_linear(double n, double N);
  /// c_n (x/c_n - 1)^2 + c_N ((1-x)/c_N - 1)^2
  static TestFunction quad_l5(double c_n, double c_N);
  /// sum_k coeffs[k] x^k
  static TestFunction polynomial(std::vector<double> coeffs);

  FunctionKind kind() const { return kind_; }
  std::string name() const;

  cplx operator()(cplx x) const;
  double operator()(double x) const;

  bool singular_at_zero() const;
  bool singular_at_one() const;

 private:
  FunctionKind kind_ = FunctionKind::Identity;
  double a_ = 0.0;
  double b_ = 0.0;
  std::vector<double> coeffs_;
};

/// Rectangle around [a, b] (the image of [c_l, c_r] under t -> alpha t/(1-t)) with corners
/// a - delta_h ± i delta_v and b + delta_h ± i delta_v, traversed counterclockwise.
/// Each side is covered by 16-point Gauss-Legendre panels; weights are the complex dz
/// quadrature weights, so sum |weights| equals the perimeter.
struct Contour {
  double a = 0.0;
  double b = 0.0;
  double delta_h = 0.0;
  double delta_v = 0.0;
  int nodes_per_side = 64;
  std::vector<cplx> nodes;
  std::vector<cplx> weights;

  double left() const { return a - delta_h; }
  double right() const { return b + delta_h; }
  double perimeter() const { return 2.0 * (right() - left()) + 4.0 * delta_v; }
};

struct ContourConfig {
  std::optional<double> delta_h;  // default min(0.25(b-a), 0.5, a/4), or alpha/4 in place of a/4 when a = 0
  std::optional<double> delta_v;  // default min(0.25(b-a), max(0.5, (b-a)/64))
  int nodes_per_side = 64;
  /// Node doubling in gaussian_limit stops once successive values differ by at most this
  /// (relative to max(1, |value|)).
  double refine_tolerance = 1e-8;
  int max_refinements = 4;
};

/// [a, b] for the given regime.
std::pair<double, double> contour_base_interval(const SpectralParams& params);

/// Throws SingularContour for non-positive margins, a contour enclosing z = 0 (z = -alpha when
/// the interval starts at 0), or a node at which the transform chain is singular.
/// nodes_per_side must be at least 64.
Contour build_contour(const SpectralParams& params, double delta_h, double delta_v,
                      int nodes_per_side = 64);
Contour build_contour(const SpectralParams& params, const ContourConfig& config);

/// Inner contour with margins (delta_h, delta_v) and outer contour with twice the margins.
struct ContourPair {
  Contour inner;
  Contour outer;
};

ContourPair build_contour_pair(const SpectralParams& params, const ContourConfig& config = {});

/// Throws ContourCollision unless `outer` strictly encloses `inner`.
void check_nested(const ContourPair& pair);

/// Transform-chain values m = s_dddot, m' and the Beta-scale argument z/(alpha+z) at every node.
struct ContourSamples {
  Contour contour;
  std::vector<cplx> m;
  std::vector<cplx> m_prime;
  std::vector<cplx> argument;
};

ContourSamples sample_contour(const SpectralParams& params, const Contour& contour);

/// Real value of a contour functional and the imaginary part that was discarded.
struct CltValue {
  double value = 0.0;
  double imag_residue = 0.0;
};

/// Limiting mean of p(int f dF^B - int f dF_0). Throws ImaginaryResidue if the discarded
/// imaginary part exceeds 1e-6 max(1, |value|).
CltValue clt_mean_value(const TestFunction& f, const SpectralParams& params,
                        const ContourSamples& samples);
double clt_mean(const TestFunction& f, const SpectralParams& params, const Contour& contour);

/// Limiting covariance of the statistics for f and g, symmetric in (f, g) bitwise.
CltValue clt_cov_value(const TestFunction& f, const TestFunction& g, const SpectralParams& params,
                       const ContourSamples& inner, const ContourSamples& outer);
double clt_cov(const TestFunction& f, const TestFunction& g, const SpectralParams& params,
               const ContourPair& pair);

struct LimitDiagnostics {
  double max_imag_residue = 0.0;
  double last_change = 0.0;
  int refinements = 0;
  int nodes_per_side = 0;
  std::size_t inner_nodes = 0;
  std::size_t outer_nodes = 0;
  double a = 0.0;
  double b = 0.0;
  double delta_h = 0.0;
  double delta_v = 0.0;
  bool psd_projected = false;
  bool converged = false;
};

struct GaussianLimit {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  LimitDiagnostics diagnostics;
};

/// Mean vector and covariance matrix for several test functions, doubling nodes until the
/// entries settle. The covariance is symmetrized and clipped to PSD when its smallest
/// eigenvalue lies in (-1e-8, 0).
GaussianLimit gaussian_limit(const std::vector<TestFunction>& fs, const SpectralParams& params,
                             const ContourConfig& config = {});

}  // namespace betalss
