#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace betalss {

/// Limiting regime of the Beta matrix B = S(S + alpha T)^{-1}.
///
/// y = lim p/n, Y = lim p/N, alpha = lim N/n-style weight, tau = 1 for real
/// entries and 0 for complex ones, m4_x / m4_xx the fourth absolute moments
/// of the entries of the two data matrices. Defaults describe real Gaussian data.
struct SpectralParams {
  double y = 0.5;
  double Y = 0.5;
  double alpha = 1.0;
  int tau = 1;
  double m4_x = 3.0;
  double m4_xx = 3.0;

  /// yY/(y+Y), the limit of p/(n+N).
  double pooled_ratio() const { return y * Y / (y + Y); }
};

/// Throws Error(NonPositive | BadMoment | DegenerateRegime) when the regime is invalid.
SpectralParams validate_params(const SpectralParams& raw);

/// Finite-sample dimensions: p variables, n and N observations.
struct FiniteDims {
  std::int64_t p = 0;
  std::int64_t n = 0;
  std::int64_t N = 0;

  double y_n() const { return static_cast<double>(p) / static_cast<double>(n); }
  double Y_N() const { return static_cast<double>(p) / static_cast<double>(N); }
  double alpha_n() const { return static_cast<double>(N) / static_cast<double>(n); }
  double c_n() const { return static_cast<double>(n) / static_cast<double>(n + N); }
  double c_N() const { return static_cast<double>(N) / static_cast<double>(n + N); }
};

/// Requires positive dimensions and p < n + N (Error DimensionMismatch otherwise).
FiniteDims validate_dims(const FiniteDims& raw);

/// SpectralParams with (y, Y, alpha) replaced by (y_n, Y_N, alpha_n).
SpectralParams finite_params(const FiniteDims& dims, int tau = 1, double m4_x = 3.0,
                             double m4_xx = 3.0);

struct SpectralBounds {
  double nu1 = 0.0;
  double nu2 = 0.0;
};

/// Almost-sure limits bounding the spectrum of S + alpha T.
SpectralBounds spectral_bounds(const SpectralParams& params);

struct AnalyticityInterval {
  double c_l = 0.0;
  double c_r = 0.0;
};

/// [c_l, c_r] on which CLT test functions must be analytic. Throws IntervalCollapse if c_l >= c_r.
AnalyticityInterval analyticity_interval(const SpectralParams& params);

/// Flat `key = value` configuration file; '#' starts a comment. Keys are case-sensitive.
class KeyValueConfig {
 public:
  static KeyValueConfig load(const std::filesystem::path& path);
  static KeyValueConfig parse(const std::string& text);

  void save(const std::filesystem::path& path) const;
  std::string dump() const;

  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  void set(const std::string& key, double value);
  void set(const std::string& key, std::int64_t value);

  std::optional<std::string> get(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;
  std::optional<std::int64_t> get_int(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Writes y, Y, alpha, tau, m4_x, m4_xx.
void store_params(KeyValueConfig& config, const SpectralParams& params);
void store_dims(KeyValueConfig& config, const FiniteDims& dims);

/// Missing keys keep the values of `defaults`. The result is validated.
SpectralParams load_params(const KeyValueConfig& config, const SpectralParams& defaults = {});
std::optional<FiniteDims> load_dims(const KeyValueConfig& config);

}  // namespace betalss
