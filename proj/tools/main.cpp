#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "betalss/errors.hpp"
#include "betalss/harness.hpp"
#include "betalss/params.hpp"

namespace {

using namespace betalss;

constexpr int kPass = 0;
constexpr int kAcceptanceFailure = 1;
constexpr int kUsageError = 2;
constexpr int kNumericFailure = 3;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> reps;
  std::string out;
  std::optional<unsigned> threads;
  std::optional<double> y, Y, alpha, m4_x, m4_xx;
  std::optional<int> tau;
  std::optional<std::int64_t> p, n, N;
  std::optional<std::string> stat;
  std::optional<int> grid;
  std::vector<std::string> functions;
  std::optional<std::string> dist;
  std::string data_a, data_b;
  bool demean = false;
  std::optional<std::string> side;
  std::optional<double> delta_h, delta_v;
  std::optional<int> nodes;
  std::optional<int> points;
  std::optional<double> tolerance;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "Flat key = value configuration file");
  sub->add_option("--out", f.out, "Output path");
  sub->add_option("--y", f.y, "Limit of p/n");
  sub->add_option("--Y", f.Y, "Limit of p/N");
  sub->add_option("--alpha", f.alpha, "Scale ratio alpha");
  sub->add_option("--tau", f.tau, "1 for real entries, 0 for complex entries");
  sub->add_option("--m4x", f.m4_x, "Fourth moment of the first sample entries");
  sub->add_option("--m4xx", f.m4_xx, "Fourth moment of the second sample entries");
  sub->add_option("--p", f.p, "Dimension");
  sub->add_option("--n", f.n, "First sample size");
  sub->add_option("--N", f.N, "Second sample size");
}

void add_contour(CLI::App* sub, Flags& f) {
  sub->add_option("--delta-h", f.delta_h, "Horizontal contour margin");
  sub->add_option("--delta-v", f.delta_v, "Vertical contour margin");
  sub->add_option("--nodes", f.nodes, "Initial contour nodes per side");
}

void add_sampling(CLI::App* sub, Flags& f) {
  sub->add_option("--seed", f.seed, "Base random seed");
  sub->add_option("--reps", f.reps, "Number of replicates");
  sub->add_option("--threads", f.threads, "Worker threads (0 = available cores)");
  sub->add_option("--dist", f.dist, "Entry law: real-gaussian, complex-gaussian, rademacher, uniform");
}

RunConfig build_config(Subcommand cmd, const Flags& f) {
  RunConfig rc;
  rc.subcommand = cmd;
  KeyValueConfig file;
  if (!f.config.empty()) file = KeyValueConfig::load(f.config);

  // Command-line values override the configuration file.
  auto put = [&file](const char* key, const auto& value) {
    if (value) file.set(key, *value);
  };
  put("y", f.y);
  put("Y", f.Y);
  put("alpha", f.alpha);
  put("m4_x", f.m4_x);
  put("m4_xx", f.m4_xx);
  if (f.tau) file.set("tau", static_cast<std::int64_t>(*f.tau));
  put("p", f.p);
  put("n", f.n);
  put("N", f.N);

  rc.dims = load_dims(file);
  SpectralParams defaults;
  if (rc.dims && !file.contains("y")) {
    defaults.y = rc.dims->y_n();
    defaults.Y = rc.dims->Y_N();
    defaults.alpha = rc.dims->alpha_n();
  }
  rc.params = load_params(file, defaults);

  if (auto v = file.get_int("seed")) rc.seed = static_cast<std::uint64_t>(*v);
  if (f.seed) rc.seed = *f.seed;
  if (auto v = file.get_int("replicates")) rc.replicates = *v;
  if (f.reps) rc.replicates = *f.reps;
  if (auto v = file.get_int("threads")) rc.threads = static_cast<unsigned>(*v);
  if (f.threads) rc.threads = *f.threads;
  if (auto v = file.get_int("grid")) rc.grid = static_cast<int>(*v);
  if (f.grid) rc.grid = *f.grid;
  if (auto v = file.get_int("points")) rc.identity_points = static_cast<int>(*v);
  if (f.points) rc.identity_points = *f.points;
  if (auto v = file.get_double("tolerance")) rc.identity_tolerance = *v;
  if (f.tolerance) rc.identity_tolerance = *f.tolerance;

  if (auto v = file.get("dist")) rc.dist = parse_distribution(*v);
  if (f.dist) rc.dist = parse_distribution(*f.dist);
  if (auto v = file.get("stat")) rc.statistic = parse_statistic(*v);
  if (f.stat) rc.statistic = parse_statistic(*f.stat);
  if (auto v = file.get("side")) rc.sidedness = parse_sidedness(*v);
  if (f.side) rc.sidedness = parse_sidedness(*f.side);
  if (auto v = file.get("function")) rc.functions = {*v};
  if (!f.functions.empty()) rc.functions = f.functions;

  if (auto v = file.get_double("delta_h")) rc.contour.delta_h = *v;
  if (f.delta_h) rc.contour.delta_h = *f.delta_h;
  if (auto v = file.get_double("delta_v")) rc.contour.delta_v = *v;
  if (f.delta_v) rc.contour.delta_v = *f.delta_v;
  if (auto v = file.get_int("nodes")) rc.contour.nodes_per_side = static_cast<int>(*v);
  if (f.nodes) rc.contour.nodes_per_side = *f.nodes;

  rc.out = f.out.empty() ? file.get("out").value_or("") : f.out;
  rc.data_a = f.data_a.empty() ? file.get("data_a").value_or("") : f.data_a;
  rc.data_b = f.data_b.empty() ? file.get("data_b").value_or("") : f.data_b;
  rc.demean = f.demean || file.get("demean").value_or("false") == "true";
  return rc;
}

void emit(const RunConfig& rc, const std::string& json) {
  if (rc.out.empty()) std::cout << json;
}

int run(const RunConfig& rc) {
  switch (rc.subcommand) {
    case Subcommand::Density: {
      const DensityResult r = run_density(rc);
      emit(rc, r.metadata_json);
      return kPass;
    }
    case Subcommand::Simulate: {
      const SimulateResult r = run_simulate(rc);
      emit(rc, r.metadata_json);
      return kPass;
    }
    case Subcommand::Clt: {
      const CltRunResult r = run_clt(rc);
      emit(rc, r.json);
      return kPass;
    }
    case Subcommand::Identities: {
      const IdentityReport r = run_identities(rc);
      emit(rc, r.json);
      return r.pass ? kPass : kAcceptanceFailure;
    }
    case Subcommand::Test: {
      const TestRunResult r = run_test(rc);
      emit(rc, r.json);
      return kPass;
    }
    case Subcommand::McClt: {
      const McCltSummary r = run_mc_clt(rc);
      emit(rc, r.json);
      return r.mean_pass && r.var_pass ? kPass : kAcceptanceFailure;
    }
  }
  return kUsageError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Beta matrix spectra, CLT of linear spectral statistics and covariance tests"};
  app.require_subcommand(1);
  Flags f;

  auto* density = app.add_subcommand("density", "Limiting density and cdf on a grid");
  add_common(density, f);
  density->add_option("--grid", f.grid, "Number of grid points on [0, 1]");

  auto* simulate = app.add_subcommand("simulate", "Sample Beta matrix spectra");
  add_common(simulate, f);
  add_sampling(simulate, f);

  auto* clt = app.add_subcommand("clt", "Limiting mean and covariance of linear spectral statistics");
  add_common(clt, f);
  add_contour(clt, f);
  clt->add_option("--function", f.functions, "Test function (repeatable)");

  auto* identities = app.add_subcommand("identities", "Check the transform identities on the contour");
  add_common(identities, f);
  add_contour(identities, f);
  identities->add_option("--points", f.points, "Number of contour points");
  identities->add_option("--tolerance", f.tolerance, "Largest accepted residual (default 1e-9)");

  auto* test = app.add_subcommand("test", "Test equality of two covariance matrices");
  add_common(test, f);
  add_contour(test, f);
  test->add_option("--data-a", f.data_a, "First data file (.csv or .bspc)");
  test->add_option("--data-b", f.data_b, "Second data file (.csv or .bspc)");
  test->add_option("--stat", f.stat, "Statistic L1..L5");
  test->add_flag("--demean", f.demean, "Subtract sample means");
  test->add_option("--side", f.side, "two-sided, upper or lower");

  auto* mc = app.add_subcommand("mc-clt", "Monte Carlo check of the CLT");
  add_common(mc, f);
  add_contour(mc, f);
  add_sampling(mc, f);
  mc->add_option("--function", f.functions, "Test function");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  const std::pair<CLI::App*, Subcommand> table[] = {
      {density, Subcommand::Density}, {simulate, Subcommand::Simulate},
      {clt, Subcommand::Clt},         {identities, Subcommand::Identities},
      {test, Subcommand::Test},       {mc, Subcommand::McClt}};
  Subcommand cmd = Subcommand::Density;
  for (const auto& [sub, which] : table) {
    if (sub->parsed()) cmd = which;
  }

  try {
    return run(build_config(cmd, f));
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_usage_error(e.code()) ? kUsageError : kNumericFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericFailure;
  }
}
