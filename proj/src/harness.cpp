#include "betalss/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "betalss/errors.hpp"
#include "betalss/lsd.hpp"
#include "betalss/parallel.hpp"

namespace betalss {

namespace {

using json = nlohmann::ordered_json;

json params_json(const SpectralParams& p) {
  return {{"y", p.y},     {"Y", p.Y},       {"alpha", p.alpha},
          {"tau", p.tau}, {"m4_x", p.m4_x}, {"m4_xx", p.m4_xx}};
}

json dims_json(const FiniteDims& d) { return {{"p", d.p}, {"n", d.n}, {"N", d.N}}; }

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

const FiniteDims& require_dims(const RunConfig& config) {
  if (!config.dims) throw Error(Errc::InvalidArgument, "this subcommand needs p, n and N");
  return *config.dims;
}

// Limit parameters used for CLT quantities: finite ratios when dimensions are known.
SpectralParams regime(const RunConfig& config) {
  if (!config.dims) return validate_params(config.params);
  return finite_params(*config.dims, config.params.tau, config.params.m4_x, config.params.m4_xx);
}

std::filesystem::path sidecar_path(const std::filesystem::path& out) {
  std::filesystem::path p = out;
  p.replace_extension(".json");
  return p;
}

std::string format17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json diagnostics_json(const LimitDiagnostics& d) {
  return {{"max_imag_residue", d.max_imag_residue},
          {"last_change", std::isfinite(d.last_change) ? json(d.last_change) : json(nullptr)},
          {"refinements", d.refinements},
          {"converged", d.converged},
          {"psd_projected", d.psd_projected},
          {"nodes_per_side", d.nodes_per_side},
          {"inner_nodes", d.inner_nodes},
          {"outer_nodes", d.outer_nodes},
          {"contour", {{"a", d.a}, {"b", d.b}, {"delta_h", d.delta_h}, {"delta_v", d.delta_v}}}};
}

}  // namespace

std::string_view to_string(Subcommand cmd) {
  switch (cmd) {
    case Subcommand::Density: return "density";
    case Subcommand::Simulate: return "simulate";
    case Subcommand::Clt: return "clt";
    case Subcommand::Identities: return "identities";
    case Subcommand::Test: return "test";
    case Subcommand::McClt: return "mc-clt";
  }
  return "unknown";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

TestFunction function_from_name(const std::string& name, const SpectralParams& params,
                                const std::optional<FiniteDims>& dims) {
  if (name.size() == 2 && (name[0] == 'L' || name[0] == 'l')) {
    if (!dims) throw Error(Errc::InvalidArgument, "statistic functions need p, n and N");
    return test_function_for(parse_statistic(name), *dims);
  }
  if (name == "identity") return TestFunction::identity();
  if (name == "log") return TestFunction::log();
  if (name == "square") return TestFunction::polynomial({0.0, 0.0, 1.0});
  if (name == "inv-diff") return TestFunction::inv_diff(dims ? dims->alpha_n() : params.alpha);
  if (name == "log-linear") {
    if (!dims) throw Error(Errc::InvalidArgument, "log-linear needs p, n and N");
    return TestFunction::log_linear(static_cast<double>(dims->n), static_cast<double>(dims->N));
  }
  if (name == "quad-l5") {
    // Without dimensions, c_n = 1/(1+alpha) is the limit of n/(n+N).
    const double c_n = dims ? dims->c_n() : 1.0 / (1.0 + params.alpha);
    const double c_N = dims ? dims->c_N() : params.alpha / (1.0 + params.alpha);
    return TestFunction::quad_l5(c_n, c_N);
  }
  throw Error(Errc::InvalidArgument, "unknown test function '" + name + "'");
}

// ---------------------------------------------------------------------------

DensityResult run_density(const RunConfig& config) {
  if (config.grid < 2) throw Error(Errc::InvalidArgument, "grid needs at least 2 points");
  const LsdModel model(config.params);
  DensityResult r;
  r.edges = model.edges();
  r.atoms = model.atoms();
  const int g = config.grid;
  std::string csv = "t,density,cdf\n";
  for (int i = 0; i < g; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(g - 1);
    r.t.push_back(t);
    r.density.push_back(model.density(t));
    r.cdf.push_back(model.cdf(t));
    csv += format17(t) + "," + format17(r.density.back()) + "," + format17(r.cdf.back()) + "\n";
  }
  json meta;
  meta["params"] = params_json(model.params());
  meta["t_l"] = r.edges.t_l;
  meta["t_r"] = r.edges.t_r;
  meta["atom0"] = r.atoms.at_zero;
  meta["atom1"] = r.atoms.at_one;
  meta["discriminant"] = model.discriminant();
  meta["grid"] = g;
  r.metadata_json = meta.dump(2) + "\n";
  if (!config.out.empty()) {
    write_text(config.out, csv);
    write_text(sidecar_path(config.out), r.metadata_json);
  }
  return r;
}

SimulateResult run_simulate(const RunConfig& config) {
  const FiniteDims d = validate_dims(require_dims(config));
  if (config.replicates < 1) throw Error(Errc::InvalidArgument, "replicates must be positive");
  const std::size_t reps = static_cast<std::size_t>(config.replicates);
  SimulateResult r;
  r.spectra.resize(reps);
  r.ks.resize(reps);
  const LsdModel model(finite_params(d));
  parallel_for(reps, config.threads, [&](std::size_t k) {
    r.spectra[k] = sample_beta_spectrum(d, config.dist, d.alpha_n(), config.seed, k);
    r.ks[k] = ks_distance(r.spectra[k].values, [&](double x) { return model.cdf(x); });
  });
  json meta;
  meta["dims"] = dims_json(d);
  meta["alpha"] = d.alpha_n();
  meta["seed"] = config.seed;
  meta["distribution"] = std::string(to_string(config.dist));
  meta["replicates"] = config.replicates;
  json files = json::array();
  json ks = json::array();
  for (std::size_t k = 0; k < reps; ++k) {
    ks.push_back(r.ks[k]);
    if (!config.out.empty()) {
      std::filesystem::path path = config.out;
      if (reps > 1) {
        path.replace_filename(config.out.stem().string() + "_r" + std::to_string(k) +
                              config.out.extension().string());
      }
      write_spectrum_csv(path, r.spectra[k].values);
      files.push_back(path.filename().string());
    }
  }
  meta["files"] = files;
  meta["ks_to_limit"] = ks;
  r.metadata_json = meta.dump(2) + "\n";
  if (!config.out.empty()) write_text(sidecar_path(config.out), r.metadata_json);
  return r;
}

CltRunResult run_clt(const RunConfig& config) {
  const SpectralParams p = regime(config);
  std::vector<TestFunction> fs;
  for (const auto& name : config.functions) fs.push_back(function_from_name(name, p, config.dims));
  CltRunResult r;
  r.functions = config.functions;
  r.limit = gaussian_limit(fs, p, config.contour);
  json j;
  j["params"] = params_json(p);
  if (config.dims) j["dims"] = dims_json(*config.dims);
  j["functions"] = config.functions;
  j["mean"] = std::vector<double>(r.limit.mean.data(), r.limit.mean.data() + r.limit.mean.size());
  json cov = json::array();
  for (Eigen::Index i = 0; i < r.limit.cov.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < r.limit.cov.cols(); ++k) row.push_back(r.limit.cov(i, k));
    cov.push_back(row);
  }
  j["cov"] = cov;
  j["diagnostics"] = diagnostics_json(r.limit.diagnostics);
  r.json = j.dump(2) + "\n";
  if (!config.out.empty()) write_text(config.out, r.json);
  return r;
}

IdentityReport run_identities(const RunConfig& config) {
  const SpectralParams p = regime(config);
  if (config.identity_points < 1) throw Error(Errc::InvalidArgument, "need at least one point");
  const Contour contour = build_contour(p, config.contour);
  IdentityReport r;
  const std::size_t n = contour.nodes.size();
  const std::size_t count = std::min<std::size_t>(n, static_cast<std::size_t>(config.identity_points));
  for (std::size_t k = 0; k < count; ++k) {
    const cplx z = contour.nodes[(2 * k + 1) * n / (2 * count)];
    try {
      const IdentityResiduals res = lemma51_residuals(p, z);
      for (std::size_t i = 0; i < kIdentityCount; ++i) {
        if (res[i] >= r.worst[i]) {
          r.worst[i] = res[i];
          r.worst_z[i] = z;
        }
      }
      ++r.points;
    } catch (const Error& e) {
      if (e.code() != Errc::SingularPoint) throw;
      r.singular_points.push_back(format17(z.real()) + (z.imag() < 0 ? "" : "+") +
                                  format17(z.imag()) + "i");
    }
  }
  r.pass = r.singular_points.empty() &&
           std::all_of(r.worst.begin(), r.worst.end(), [&](double v) { return v <= config.identity_tolerance; });
  json j;
  j["params"] = params_json(p);
  j["points"] = r.points;
  j["tolerance"] = config.identity_tolerance;
  json ids = json::array();
  static const char* labels[kIdentityCount] = {"z_from_m",      "s_ddot_from_m",
                                               "m_prime",       "resolvent_integral",
                                               "second_integral", "s_ddot_prime"};
  for (std::size_t i = 0; i < kIdentityCount; ++i) {
    ids.push_back({{"identity", labels[i]},
                   {"max_residual", r.worst[i]},
                   {"worst_z", complex_json(r.worst_z[i])}});
  }
  j["identities"] = ids;
  j["singular_points"] = r.singular_points;
  j["max_residual"] = *std::max_element(r.worst.begin(), r.worst.end());
  j["pass"] = r.pass;
  r.json = j.dump(2) + "\n";
  if (!config.out.empty()) write_text(config.out, r.json);
  return r;
}

TestRunResult run_test(const RunConfig& config) {
  if (config.data_a.empty() || config.data_b.empty()) {
    throw Error(Errc::InvalidArgument, "test needs two data files");
  }
  const Eigen::MatrixXd a = read_data(config.data_a);
  const Eigen::MatrixXd b = read_data(config.data_b);
  EqualityTestOptions opt;
  opt.demean = config.demean;
  opt.sidedness = config.sidedness;
  opt.tau = config.params.tau;
  opt.m4_x = config.params.m4_x;
  opt.m4_xx = config.params.m4_xx;
  opt.contour = config.contour;
  TestRunResult r;
  r.report = covariance_equality_test(a, b, config.statistic, opt);
  r.json = report_json(r.report) + "\n";
  if (!config.out.empty()) write_text(config.out, r.json);
  return r;
}

McCltSummary run_mc_clt(const RunConfig& config) {
  const FiniteDims d = validate_dims(require_dims(config));
  if (config.replicates < 100) throw Error(Errc::InvalidArgument, "mc-clt needs at least 100 replicates");
  if (config.functions.empty()) throw Error(Errc::InvalidArgument, "mc-clt needs a test function");
  const EntryMoments mom = entry_moments(config.dist);
  const SpectralParams p = finite_params(d, mom.tau, mom.m4, mom.m4);
  const TestFunction f = function_from_name(config.functions.front(), p, d);
  const double centre = center_term(f, d);
  const GaussianLimit limit = gaussian_limit({f}, p, config.contour);

  const std::size_t reps = static_cast<std::size_t>(config.replicates);
  std::vector<double> values(reps);
  parallel_for(reps, config.threads, [&](std::size_t r) {
    const EigenSpectrum spec = sample_beta_spectrum(d, config.dist, d.alpha_n(), config.seed, r);
    double sum = 0.0;
    for (const double v : spec.values) sum += f(v);
    if (!std::isfinite(sum)) {
      throw Error(Errc::DegenerateEigenvalue, f.name() + " is not finite on a sampled spectrum");
    }
    values[r] = sum - centre;
  });
  double total = 0.0;
  for (const double v : values) total += v;
  const double mean = total / static_cast<double>(reps);
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);

  McCltSummary s;
  s.function = config.functions.front();
  s.replicates = config.replicates;
  s.empirical_mean = mean;
  s.empirical_var = ss / static_cast<double>(reps - 1);
  s.theory_mean = limit.mean[0];
  s.theory_var = limit.cov(0, 0);
  s.stderr_mean = std::sqrt(s.empirical_var / static_cast<double>(reps));
  s.mean_pass = std::abs(s.empirical_mean - s.theory_mean) <= 3.0 * s.stderr_mean;
  const double ratio = s.empirical_var / s.theory_var;
  s.var_pass = ratio >= 0.85 && ratio <= 1.15;

  json j;
  j["function"] = s.function;
  j["dims"] = dims_json(d);
  j["params"] = params_json(p);
  j["distribution"] = std::string(to_string(config.dist));
  j["seed"] = config.seed;
  j["replicates"] = s.replicates;
  j["centering"] = centre;
  j["empirical_mean"] = s.empirical_mean;
  j["empirical_var"] = s.empirical_var;
  j["stderr_mean"] = s.stderr_mean;
  j["theory_mean"] = s.theory_mean;
  j["theory_var"] = s.theory_var;
  j["var_ratio"] = ratio;
  j["mean_pass"] = s.mean_pass;
  j["var_pass"] = s.var_pass;
  j["pass"] = s.mean_pass && s.var_pass;
  s.json = j.dump(2) + "\n";
  if (!config.out.empty()) write_text(config.out, s.json);
  return s;
}

}  // namespace betalss
