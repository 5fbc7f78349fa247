#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "betalss/clt.hpp"
#include "betalss/params.hpp"

namespace betalss {

/// Covariance-equality statistics built from the Beta spectrum lambda_1..lambda_p:
///   L1 = sum n log(lambda/c_n) + N log((1-lambda)/c_N)   (log likelihood ratio)
///   L2 = sum (1-lambda)/(alpha_n lambda)
///   L3 = sum log lambda
///   L4 = sum lambda
///   L5 = c_n sum (lambda/c_n - 1)^2 + c_N sum ((1-lambda)/c_N - 1)^2
enum class Statistic { L1, L2, L3, L4, L5 };

std::string_view to_string(Statistic which);
/// Accepts "L1".."L5" (case-insensitive).
Statistic parse_statistic(std::string_view name);

struct LssValue {
  Statistic which = Statistic::L4;
  double value = 0.0;
  FiniteDims dims;
};

/// L1, L2 and L3 throw DegenerateEigenvalue if some eigenvalue is <= 1e-12 or >= 1 - 1e-12
/// (L2 only for the lower end).
LssValue compute_lss(std::span<const double> eigenvalues, Statistic which, const FiniteDims& dims);

/// Test function f with statistic = sum f(lambda_i). L1 uses n and N frozen at dims.
TestFunction test_function_for(Statistic which, const FiniteDims& dims);

/// p times the integral of f against the limiting law at (y_n, Y_N, alpha_n), atoms included.
/// Throws AtomDivergence when f is singular at an atom of that law.
double center_term(const TestFunction& f, const FiniteDims& dims);

enum class Sidedness { TwoSided, Upper, Lower };

std::string_view to_string(Sidedness side);
Sidedness parse_sidedness(std::string_view name);

struct TestReport {
  LssValue statistic;
  double centering = 0.0;
  double mean_shift = 0.0;
  double variance = 0.0;
  double z_score = 0.0;
  double p_value = 1.0;
  Sidedness sidedness = Sidedness::TwoSided;
  bool demeaned = false;
  SpectralParams params;
  LimitDiagnostics diagnostics;
};

/// p-value of a standard normal z-score.
double normal_p_value(double z, Sidedness side);

/// Centering, mean shift and variance for one set of dimensions, computed once and reused
/// for every statistic value calibrated against them.
class LssCalibrator {
 public:
  /// `moments` supplies tau, m4_x and m4_xx; the ratios are taken from dims.
  LssCalibrator(const FiniteDims& dims, const SpectralParams& moments,
                const ContourConfig& config = {});

  const FiniteDims& dims() const { return dims_; }
  const SpectralParams& params() const { return params_; }

  struct Terms {
    double centering = 0.0;
    double mean_shift = 0.0;
    double variance = 0.0;
    LimitDiagnostics diagnostics;
  };

  /// Computed on first use for each statistic.
  const Terms& terms(Statistic which);

  TestReport calibrate(const LssValue& stat, Sidedness side = Sidedness::TwoSided);

 private:
  FiniteDims dims_;
  SpectralParams params_;
  ContourConfig config_;
  std::map<Statistic, Terms> cache_;
};

/// One-shot calibration. Throws VarianceNonpositive if the limiting variance is not positive.
TestReport calibrate(const LssValue& stat, const SpectralParams& params,
                     const ContourConfig& config = {}, Sidedness side = Sidedness::TwoSided);

struct EqualityTestOptions {
  bool demean = false;
  Sidedness sidedness = Sidedness::TwoSided;
  int tau = 1;
  double m4_x = 3.0;
  double m4_xx = 3.0;
  ContourConfig contour;
};

/// Dimensions after the optional demeaning adjustment (n and N reduced by one).
FiniteDims effective_dims(Eigen::Index p, Eigen::Index n, Eigen::Index N, bool demean);

/// Beta spectrum of two data sets (rows are variables, columns observations).
std::vector<double> data_beta_spectrum(const Eigen::MatrixXd& data_a, const Eigen::MatrixXd& data_b,
                                       bool demean);

/// Tests Sigma_1 = Sigma_2 from two samples. Throws DimensionMismatch for differing row counts
/// or p >= n + N.
TestReport covariance_equality_test(const Eigen::MatrixXd& data_a, const Eigen::MatrixXd& data_b,
                                    Statistic which, const EqualityTestOptions& options = {});

/// Same, reusing a calibrator whose dims match the data.
TestReport covariance_equality_test(const Eigen::MatrixXd& data_a, const Eigen::MatrixXd& data_b,
                                    Statistic which, LssCalibrator& calibrator,
                                    const EqualityTestOptions& options = {});

std::string report_json(const TestReport& report);

/// Headerless CSV, one variable per row.
Eigen::MatrixXd read_data_csv(const std::filesystem::path& path);
void write_data_csv(const std::filesystem::path& path, const Eigen::MatrixXd& data);

/// Binary layout: "BSPC", u32 rows, u32 cols, u32 reserved (0), then rows*cols float64 values
/// in column-major order; all little-endian.
Eigen::MatrixXd read_data_bspc(const std::filesystem::path& path);
void write_data_bspc(const std::filesystem::path& path, const Eigen::MatrixXd& data);

/// Dispatches on the ".bspc" extension, CSV otherwise.
Eigen::MatrixXd read_data(const std::filesystem::path& path);

}  // namespace betalss
