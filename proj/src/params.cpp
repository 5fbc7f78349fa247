#include "betalss/params.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "betalss/errors.hpp"

namespace betalss {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

SpectralParams validate_params(const SpectralParams& raw) {
  if (!positive_finite(raw.y) || !positive_finite(raw.Y) || !positive_finite(raw.alpha)) {
    throw Error(Errc::NonPositive, "y, Y and alpha must be positive and finite");
  }
  if (raw.tau != 0 && raw.tau != 1) {
    throw Error(Errc::BadMoment, "tau must be 0 (complex) or 1 (real)");
  }
  if (!(raw.m4_x >= 1.0) || !(raw.m4_xx >= 1.0) || !std::isfinite(raw.m4_x) ||
      !std::isfinite(raw.m4_xx)) {
    throw Error(Errc::BadMoment, "fourth moments must be finite and >= 1");
  }
  const double r = raw.pooled_ratio();
  if (!(r > 0.0 && r < 1.0)) {
    throw Error(Errc::DegenerateRegime, "yY/(y+Y) = " + format_double(r) + " is outside (0,1)");
  }
  return raw;
}

FiniteDims validate_dims(const FiniteDims& raw) {
  if (raw.p <= 0 || raw.n <= 0 || raw.N <= 0) {
    throw Error(Errc::DimensionMismatch, "p, n and N must be positive");
  }
  if (raw.p >= raw.n + raw.N) {
    throw Error(Errc::DimensionMismatch, "p must be smaller than n + N");
  }
  return raw;
}

SpectralParams finite_params(const FiniteDims& dims, int tau, double m4_x, double m4_xx) {
  const FiniteDims d = validate_dims(dims);
  SpectralParams params;
  params.y = d.y_n();
  params.Y = d.Y_N();
  params.alpha = d.alpha_n();
  params.tau = tau;
  params.m4_x = m4_x;
  params.m4_xx = m4_xx;
  return validate_params(params);
}

SpectralBounds spectral_bounds(const SpectralParams& params) {
  const SpectralParams p = validate_params(params);
  const double scale = p.alpha * p.Y / p.y;
  const double root = std::sqrt(p.pooled_ratio());
  const double base = 1.0 + p.y / p.Y;
  SpectralBounds b;
  b.nu1 = std::min(1.0, scale) * base * (1.0 - root) * (1.0 - root);
  b.nu2 = std::max(1.0, scale) * base * (1.0 + root) * (1.0 + root);
  return b;
}

AnalyticityInterval analyticity_interval(const SpectralParams& params) {
  const SpectralBounds b = spectral_bounds(params);
  const double ly = 1.0 - std::sqrt(params.y);
  const double lY = 1.0 - std::sqrt(params.Y);
  AnalyticityInterval iv;
  iv.c_l = ly * ly / b.nu2;
  iv.c_r = 1.0 - params.alpha * lY * lY / b.nu2;
  if (!(iv.c_l < iv.c_r)) {
    throw Error(Errc::IntervalCollapse, "c_l = " + format_double(iv.c_l) +
                                            " is not below c_r = " + format_double(iv.c_r));
  }
  return iv;
}

// ---------------------------------------------------------------------------

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::InvalidArgument,
                  "config line " + std::to_string(lineno) + " has no '=' separator");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw Error(Errc::InvalidArgument, "config line " + std::to_string(lineno) + " has no key");
    }
    cfg.values_[key] = value;
  }
  return cfg;
}

void KeyValueConfig::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write config file " + path.string());
  out << dump();
}

std::string KeyValueConfig::dump() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

void KeyValueConfig::set(const std::string& key, double value) { values_[key] = format_double(value); }

void KeyValueConfig::set(const std::string& key, std::int64_t value) {
  values_[key] = std::to_string(value);
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> KeyValueConfig::get_double(const std::string& key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  try {
    std::size_t used = 0;
    const double d = std::stod(*v, &used);
    if (used != v->size()) throw std::invalid_argument("trailing characters");
    return d;
  } catch (const std::exception&) {
    throw Error(Errc::InvalidArgument, "config key '" + key + "' is not a number: " + *v);
  }
}

std::optional<std::int64_t> KeyValueConfig::get_int(const std::string& key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  try {
    std::size_t used = 0;
    const long long i = std::stoll(*v, &used);
    if (used != v->size()) throw std::invalid_argument("trailing characters");
    return static_cast<std::int64_t>(i);
  } catch (const std::exception&) {
    throw Error(Errc::InvalidArgument, "config key '" + key + "' is not an integer: " + *v);
  }
}

void store_params(KeyValueConfig& config, const SpectralParams& params) {
  config.set("y", params.y);
  config.set("Y", params.Y);
  config.set("alpha", params.alpha);
  config.set("tau", static_cast<std::int64_t>(params.tau));
  config.set("m4_x", params.m4_x);
  config.set("m4_xx", params.m4_xx);
}

void store_dims(KeyValueConfig& config, const FiniteDims& dims) {
  config.set("p", dims.p);
  config.set("n", dims.n);
  config.set("N", dims.N);
}

SpectralParams load_params(const KeyValueConfig& config, const SpectralParams& defaults) {
  SpectralParams p = defaults;
  if (auto v = config.get_double("y")) p.y = *v;
  if (auto v = config.get_double("Y")) p.Y = *v;
  if (auto v = config.get_double("alpha")) p.alpha = *v;
  if (auto v = config.get_int("tau")) p.tau = static_cast<int>(*v);
  if (auto v = config.get_double("m4_x")) p.m4_x = *v;
  if (auto v = config.get_double("m4_xx")) p.m4_xx = *v;
  return validate_params(p);
}

std::optional<FiniteDims> load_dims(const KeyValueConfig& config) {
  const auto p = config.get_int("p");
  const auto n = config.get_int("n");
  const auto N = config.get_int("N");
  if (!p && !n && !N) return std::nullopt;
  if (!p || !n || !N) {
    throw Error(Errc::InvalidArgument, "p, n and N must be given together");
  }
  return validate_dims(FiniteDims{*p, *n, *N});
}

}  // namespace betalss
