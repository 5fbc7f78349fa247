#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "betalss/clt.hpp"
#include "betalss/lss_tests.hpp"
#include "betalss/params.hpp"
#include "betalss/sampler.hpp"
#include "betalss/transform_chain.hpp"

namespace betalss {

enum class Subcommand { Density, Simulate, Clt, Identities, Test, McClt };

std::string_view to_string(Subcommand cmd);

struct RunConfig {
  Subcommand subcommand = Subcommand::Density;
  SpectralParams params;
  std::optional<FiniteDims> dims;
  std::uint64_t seed = 0;
  std::int64_t replicates = 1;
  std::filesystem::path out;
  unsigned threads = 0;
  int grid = 201;
  EntryDistribution dist = EntryDistribution::RealGaussian;
  /// Test functions by name: identity, log, inv-diff, log-linear, quad-l5, or L1..L5.
  std::vector<std::string> functions = {"identity"};
  Statistic statistic = Statistic::L4;
  std::filesystem::path data_a;
  std::filesystem::path data_b;
  bool demean = false;
  Sidedness sidedness = Sidedness::TwoSided;
  ContourConfig contour;
  /// Contour points sampled by run_identities and the residual they must not exceed.
  int identity_points = 50;
  double identity_tolerance = 1e-9;
};

/// Builds a TestFunction from its name. Names tied to dimensions (inv-diff, log-linear,
/// quad-l5, L1..L5) use `dims` when given and the limiting ratios otherwise.
TestFunction function_from_name(const std::string& name, const SpectralParams& params,
                                const std::optional<FiniteDims>& dims);

struct DensityResult {
  SupportEdges edges;
  Atoms atoms;
  std::vector<double> t;
  std::vector<double> density;
  std::vector<double> cdf;
  std::string metadata_json;
};

/// Density and cdf on `grid` equally spaced points of [0, 1]. Writes `out` (CSV with columns
/// t,density,cdf) and the metadata next to it with extension .json when `out` is set.
DensityResult run_density(const RunConfig& config);

struct SimulateResult {
  std::vector<EigenSpectrum> spectra;
  std::vector<double> ks;  // distance to the limiting law at (y_n, Y_N, alpha_n)
  std::string metadata_json;
};

/// Samples `replicates` Beta spectra. Writes one CSV per replicate (suffix _r<k> when more
/// than one) and a JSON sidecar.
SimulateResult run_simulate(const RunConfig& config);

struct CltRunResult {
  GaussianLimit limit;
  std::vector<std::string> functions;
  std::string json;
};

CltRunResult run_clt(const RunConfig& config);

struct IdentityReport {
  IdentityResiduals worst{};
  std::array<cplx, kIdentityCount> worst_z{};
  std::size_t points = 0;
  std::vector<std::string> singular_points;
  bool pass = false;
  std::string json;
};

/// Identity residuals at evenly spaced nodes of the default contour; passes when every
/// residual is at most identity_tolerance and no point is singular.
IdentityReport run_identities(const RunConfig& config);

struct TestRunResult {
  TestReport report;
  std::string json;
};

TestRunResult run_test(const RunConfig& config);

struct McCltSummary {
  std::string function;
  double empirical_mean = 0.0;
  double empirical_var = 0.0;
  double theory_mean = 0.0;
  double theory_var = 0.0;
  double stderr_mean = 0.0;
  std::int64_t replicates = 0;
  bool mean_pass = false;  // |empirical_mean - theory_mean| <= 3 stderr_mean
  bool var_pass = false;   // empirical_var / theory_var in [0.85, 1.15]
  std::string json;
};

/// For replicate r the spectrum is drawn from the stream (seed, r) and the centred statistic
/// sum f(lambda_i) - p int f dF_0 is recorded; the sample moments are compared with the limit.
McCltSummary run_mc_clt(const RunConfig& config);

/// Writes text to a file, throwing IoError on failure.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace betalss
