#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "betalss/params.hpp"

namespace betalss {

enum class EntryDistribution { RealGaussian, ComplexGaussian, Rademacher, StandardizedUniform };

struct EntryMoments {
  int tau = 1;
  double m4 = 3.0;
};

/// (tau, E|x|^4) implied by each entry law; every law has mean 0 and E|x|^2 = 1.
EntryMoments entry_moments(EntryDistribution dist);
std::string_view to_string(EntryDistribution dist);
/// Accepts "real-gaussian", "complex-gaussian", "rademacher", "uniform".
EntryDistribution parse_distribution(std::string_view name);

/// Which data matrix a random stream feeds.
enum class MatrixRole : std::uint32_t { First = 0, Second = 1 };

/// Deterministic random stream keyed by (seed, replicate, role), independent of scheduling.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t replicate, MatrixRole role);

  double real_entry(EntryDistribution dist);
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{-1.0, 1.0};
};

Eigen::MatrixXd sample_real_matrix(Eigen::Index rows, Eigen::Index cols, EntryDistribution dist,
                                   StreamRng& rng);
/// Real and imaginary parts independent with variance 1/2 each.
Eigen::MatrixXcd sample_complex_matrix(Eigen::Index rows, Eigen::Index cols, StreamRng& rng);

/// Sorted eigenvalues of B = S (S + alpha T)^{-1} from the symmetric-definite pencil
/// (S, S + alpha T). Throws NearSingularPencil if lambda_min(S + alpha T) < 1e-12.
std::vector<double> beta_spectrum(const Eigen::MatrixXd& S, const Eigen::MatrixXd& T, double alpha);
std::vector<double> beta_spectrum(const Eigen::MatrixXcd& S, const Eigen::MatrixXcd& T,
                                  double alpha);

struct EigenSpectrum {
  std::vector<double> values;  // ascending
  FiniteDims dims;
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;
  EntryDistribution dist = EntryDistribution::RealGaussian;
  double alpha = 1.0;
};

/// Samples X (p x n) and XX (p x N), forms S = XX^*/n, T = XX XX^*/N and returns the
/// spectrum of S(S + alpha T)^{-1}. Bitwise reproducible for identical arguments.
EigenSpectrum sample_beta_spectrum(const FiniteDims& dims, EntryDistribution dist, double alpha,
                                   std::uint64_t seed, std::uint64_t replicate = 0);

/// Fraction of values <= x. `sorted` must be ascending.
double esd_eval(std::span<const double> sorted, double x);

/// Kolmogorov-Smirnov distance between the step ESD of `sorted` and a monotone cdf.
/// Both one-sided limits of the step are compared with cdf at the jump and just below it.
double ks_distance(std::span<const double> sorted, const std::function<double(double)>& cdf);

/// Single-column CSV with header "eigenvalue", 17 significant digits.
void write_spectrum_csv(const std::filesystem::path& path, std::span<const double> values);
std::vector<double> read_spectrum_csv(const std::filesystem::path& path);
/// JSON sidecar with dims, seed, replicate, distribution and alpha.
std::string spectrum_metadata_json(const EigenSpectrum& spectrum);

}  // namespace betalss
