// Acceptance runner: one PASS/FAIL line per criterion, exit status 0 only if all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "betalss/clt.hpp"
#include "betalss/errors.hpp"
#include "betalss/harness.hpp"
#include "betalss/lsd.hpp"
#include "betalss/lss_tests.hpp"
#include "betalss/parallel.hpp"
#include "betalss/params.hpp"
#include "betalss/sampler.hpp"
#include "betalss/transform_chain.hpp"

using namespace betalss;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

std::vector<SpectralParams> lsd_grid() {
  std::vector<SpectralParams> grid;
  for (double y : {0.25, 0.5, 0.9})
    for (double Y : {0.25, 0.5, 0.9})
      for (double alpha : {0.5, 1.0, 2.0}) grid.push_back({y, Y, alpha});
  for (double Y : {0.25, 0.5, 0.9})
    for (double alpha : {0.5, 1.0, 2.0}) grid.push_back({2.0, Y, alpha});
  return grid;
}

SpectralParams with_moments(SpectralParams p, int tau, double m4) {
  p.tau = tau;
  p.m4_x = m4;
  p.m4_xx = m4;
  return p;
}

Outcome normalization() {
  double worst = 0.0;
  for (const auto& p : lsd_grid()) {
    const LsdModel model(p);
    const double total = model.atoms().at_zero + model.atoms().at_one + model.bulk_mass();
    worst = std::max(worst, std::abs(total - 1.0));
  }
  return {worst <= 1e-6, fmt("max |mass - 1| = %.3g over 36 regimes", worst)};
}

Outcome edges() {
  double worst = 0.0;
  for (const auto& p : lsd_grid()) {
    const SupportEdges e = support_edges(p);
    for (double t : {e.t_l, e.t_r}) {
      const double lin = (1.0 - p.y) * (1.0 - t) + p.alpha * t * (1.0 - p.Y);
      worst = std::max(worst, std::abs(4.0 * p.alpha * t * (1.0 - t) - lin * lin));
    }
  }
  double symmetry = 0.0;
  for (double y : {0.25, 0.5, 0.9}) {
    const SupportEdges e = support_edges({y, y, 1.0});
    symmetry = std::max(symmetry, std::abs(e.t_l + e.t_r - 1.0));
  }
  return {worst <= 1e-10 && symmetry <= 1e-12,
          fmt("max quadratic residual %.3g, max |t_l + t_r - 1| %.3g", worst, symmetry)};
}

Outcome weak_convergence() {
  const FiniteDims d{400, 800, 800};
  const LsdModel model(finite_params(d));
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const EigenSpectrum s = sample_beta_spectrum(d, EntryDistribution::RealGaussian, 1.0, seed);
    worst = std::max(worst, ks_distance(s.values, [&](double x) { return model.cdf(x); }));
  }
  return {worst <= 0.05, fmt("max KS over 5 seeds = %.4f", worst)};
}

Outcome rank_atoms() {
  const FiniteDims d{300, 150, 600};
  const EigenSpectrum s = sample_beta_spectrum(d, EntryDistribution::RealGaussian, d.alpha_n(), 7);
  const auto zeros = std::count_if(s.values.begin(), s.values.end(), [](double v) { return v < 1e-8; });
  const double fraction = static_cast<double>(zeros) / 300.0;
  const double atom = lsd_atoms(finite_params(d)).at_zero;
  return {zeros == 150 && fraction == 1.0 - 1.0 / d.y_n() && std::abs(atom - 0.5) <= 1e-15,
          fmt("%.0f eigenvalues below 1e-8, limit atom %.6f", static_cast<double>(zeros), atom)};
}

Outcome stieltjes_density() {
  double worst = 0.0;
  for (const SpectralParams p : {SpectralParams{0.5, 0.5, 1.0}, SpectralParams{0.9, 0.25, 2.0}}) {
    const SupportEdges e = support_edges(p);
    for (int i = 1; i <= 50; ++i) {
      const double x = e.t_l + (e.t_r - e.t_l) * i / 51.0;
      const double exact = lsd_density(p, x);
      worst = std::max(worst, std::abs(density_from_stieltjes(p, x, 1e-4) - exact) / exact);
    }
  }
  return {worst <= 0.01, fmt("max relative error %.3g at 50 points in 2 regimes", worst)};
}

Outcome fixed_point() {
  double to_closed = 0.0;
  double between = 0.0;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> re(-0.3, 1.3), im(0.05, 1.0);
  for (const SpectralParams p : {SpectralParams{0.5, 0.5, 1.0}, SpectralParams{0.9, 0.25, 2.0}}) {
    const DiscreteLaw law = discretize_mp(p.Y, 2000);
    for (int i = 0; i < 20; ++i) {
      const cplx z(re(rng), im(rng));
      const FixedPointResult a = fixed_point_solve(law, p.y, p.alpha, z);
      FixedPointOptions other;
      other.initial = -1.0 / z;
      const FixedPointResult b = fixed_point_solve(law, p.y, p.alpha, z, other);
      to_closed = std::max(to_closed, std::abs(a.value - stieltjes_s(p, z)));
      between = std::max(between, std::abs(a.value - b.value));
    }
  }
  return {to_closed <= 1e-6 && between <= 1e-9,
          fmt("max |solver - closed form| %.3g, max |init_1 - init_2| %.3g", to_closed, between)};
}

Outcome identity_suite() {
  double worst = 0.0;
  bool all = true;
  for (const SpectralParams p : {SpectralParams{0.5, 0.25, 2.0}, SpectralParams{0.5, 0.5, 1.0},
                                 SpectralParams{0.9, 0.25, 2.0}}) {
    RunConfig rc;
    rc.subcommand = Subcommand::Identities;
    rc.params = p;
    rc.identity_points = 50;
    const IdentityReport r = run_identities(rc);
    all = all && r.pass && r.singular_points.empty();
    worst = std::max(worst, *std::max_element(r.worst.begin(), r.worst.end()));
  }
  return {all && worst <= 1e-9, fmt("max residual %.3g over 3 x 50 contour points", worst)};
}

std::vector<TestFunction> five_functions(const SpectralParams& p) {
  return {TestFunction::identity(), TestFunction::log(), TestFunction::inv_diff(p.alpha),
          TestFunction::log_linear(200.0, 400.0), TestFunction::quad_l5(1.0 / 3.0, 2.0 / 3.0)};
}

Outcome clt_realness() {
  double imag = 0.0;
  double diff = 0.0;
  for (const SpectralParams base :
       {SpectralParams{0.5, 0.25, 2.0}, SpectralParams{0.9, 0.25, 0.5}, SpectralParams{0.3, 0.6, 0.7}}) {
    const SpectralParams p = with_moments(base, 1, 2.4);
    const auto fs = five_functions(p);
    ContourConfig outer;
    outer.delta_v = 1.0;
    ContourConfig inner;
    inner.delta_h = 0.1 * contour_base_interval(p).first;
    inner.delta_v = 0.2;
    const GaussianLimit a = gaussian_limit(fs, p, outer);
    const GaussianLimit b = gaussian_limit(fs, p, inner);
    imag = std::max({imag, a.diagnostics.max_imag_residue, b.diagnostics.max_imag_residue});
    for (Eigen::Index i = 0; i < a.mean.size(); ++i) {
      diff = std::max(diff, std::abs(a.mean[i] - b.mean[i]) / std::max(1.0, std::abs(a.mean[i])));
      for (Eigen::Index j = 0; j < a.mean.size(); ++j) {
        diff = std::max(diff, std::abs(a.cov(i, j) - b.cov(i, j)) / std::max(1.0, std::abs(a.cov(i, j))));
      }
    }
  }
  return {imag <= 1e-8 && diff <= 1e-6,
          fmt("max |Im| %.3g, max relative contour difference %.3g", imag, diff)};
}

Outcome clt_monte_carlo() {
  RunConfig rc;
  rc.subcommand = Subcommand::McClt;
  rc.dims = FiniteDims{100, 200, 400};
  rc.dist = EntryDistribution::RealGaussian;
  rc.functions = {"identity"};
  rc.replicates = 2000;
  rc.seed = 2024;
  rc.threads = 0;
  const McCltSummary s = run_mc_clt(rc);
  return {s.mean_pass && s.var_pass,
          fmt("mean %.4f vs %.4f (stderr %.4f), ", s.empirical_mean, s.theory_mean, s.stderr_mean) +
              fmt("variance ratio %.4f", s.empirical_var / s.theory_var)};
}

Outcome complex_case() {
  double mean = 0.0;
  double ratio = 0.0;
  for (const SpectralParams base :
       {SpectralParams{0.5, 0.25, 2.0}, SpectralParams{0.3, 0.6, 0.7}, SpectralParams{0.9, 0.5, 1.0}}) {
    const auto fs = five_functions(base);
    const GaussianLimit real = gaussian_limit(fs, with_moments(base, 1, 3.0));
    const GaussianLimit complex = gaussian_limit(fs, with_moments(base, 0, 2.0));
    mean = std::max(mean, complex.mean.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < real.cov.rows(); ++i) {
      for (Eigen::Index j = 0; j < real.cov.cols(); ++j) {
        ratio = std::max(ratio, std::abs(complex.cov(i, j) - 0.5 * real.cov(i, j)) /
                                    std::max(1.0, std::abs(real.cov(i, j))));
      }
    }
  }
  return {mean <= 1e-10 && ratio <= 1e-10,
          fmt("max |complex mean| %.3g, max |cov_c - cov_r/2| %.3g", mean, ratio)};
}

Outcome pushforward() {
  std::vector<double> grid;
  for (int i = 0; i <= 400; ++i) grid.push_back(i / 400.0);
  const double a = f_matrix_pushforward_check({0.5, 0.5, 1.0}, grid);
  const double b = f_matrix_pushforward_check({0.9, 0.25, 2.0}, grid);
  return {a <= 1e-6 && b <= 1e-6, fmt("sup residuals %.3g and %.3g", a, b)};
}

Outcome l1_determinant() {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> normal;
  const int p = 5, n = 8, N = 12;
  const double c_n = static_cast<double>(n) / (n + N);
  const double c_N = static_cast<double>(N) / (n + N);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::MatrixXd a(p, n), b(p, N);
    for (Eigen::Index k = 0; k < a.size(); ++k) a.data()[k] = normal(rng);
    for (Eigen::Index k = 0; k < b.size(); ++k) b.data()[k] = normal(rng);
    const Eigen::MatrixXd Z1 = a * a.transpose() / n;
    const Eigen::MatrixXd Z2 = b * b.transpose() / N;
    const double det_form = n * std::log(Z1.determinant()) + N * std::log(Z2.determinant()) -
                            (n + N) * std::log((c_n * Z1 + c_N * Z2).determinant());
    const double spectral = compute_lss(data_beta_spectrum(a, b, false), Statistic::L1, {p, n, N}).value;
    worst = std::max(worst, std::abs(spectral - det_form) / std::max(1.0, std::abs(det_form)));
  }
  return {worst <= 1e-8, fmt("max relative difference %.3g over 20 instances", worst)};
}

Outcome test_level() {
  const FiniteDims d{100, 200, 400};
  const std::size_t reps = 2000;
  LssCalibrator calibrator(d, SpectralParams{});
  calibrator.terms(Statistic::L4);
  std::vector<double> p_values(reps);
  parallel_for(reps, 0, [&](std::size_t r) {
    StreamRng first(77, r, MatrixRole::First);
    StreamRng second(77, r, MatrixRole::Second);
    const Eigen::MatrixXd a = sample_real_matrix(d.p, d.n, EntryDistribution::RealGaussian, first);
    const Eigen::MatrixXd b = sample_real_matrix(d.p, d.N, EntryDistribution::RealGaussian, second);
    p_values[r] = covariance_equality_test(a, b, Statistic::L4, calibrator).p_value;
  });
  const auto rejections = std::count_if(p_values.begin(), p_values.end(), [](double v) { return v < 0.05; });
  const double rate = static_cast<double>(rejections) / static_cast<double>(reps);
  return {rate >= 0.03 && rate <= 0.07, fmt("rejection rate %.4f at nominal 0.05", rate)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"LSD normalization", normalization},
      {"support edges", edges},
      {"weak convergence", weak_convergence},
      {"rank atoms", rank_atoms},
      {"Stieltjes density recovery", stieltjes_density},
      {"fixed-point oracle", fixed_point},
      {"transform identities", identity_suite},
      {"CLT realness and contour independence", clt_realness},
      {"CLT Monte Carlo", clt_monte_carlo},
      {"complex-case mean and covariance", complex_case},
      {"F-matrix pushforward", pushforward},
      {"L1 determinant identity", l1_determinant},
      {"test level", test_level},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[k].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!outcome.pass) ++failures;
    std::printf("AC%zu %s %s: %s [%.1f s]\n", k + 1, outcome.pass ? "PASS" : "FAIL", criteria[k].first,
                outcome.detail.c_str(), seconds);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
