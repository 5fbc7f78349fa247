#include "betalss/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "betalss/errors.hpp"

namespace betalss {

namespace {

constexpr double kPencilFloor = 1e-12;

template <class Matrix>
std::vector<double> whitened_spectrum(const Matrix& S, const Matrix& T, double alpha) {
  if (S.rows() != S.cols() || T.rows() != T.cols() || S.rows() != T.rows()) {
    throw Error(Errc::DimensionMismatch, "S and T must be square matrices of the same size");
  }
  if (!(alpha > 0.0)) throw Error(Errc::NonPositive, "alpha must be positive");
  const Matrix pencil = S + alpha * T;
  Eigen::SelfAdjointEigenSolver<Matrix> outer(pencil);
  if (outer.info() != Eigen::Success) {
    throw Error(Errc::NearSingularPencil, "eigendecomposition of S + alpha T failed");
  }
  const Eigen::VectorXd lambda = outer.eigenvalues();
  if (lambda.minCoeff() < kPencilFloor) {
    throw Error(Errc::NearSingularPencil, "smallest eigenvalue of S + alpha T is below 1e-12");
  }
  const Matrix W = outer.eigenvectors() * lambda.cwiseSqrt().cwiseInverse().asDiagonal();
  Matrix M = W.adjoint() * S * W;
  M = (0.5 * (M + M.adjoint())).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> inner(M, Eigen::EigenvaluesOnly);
  if (inner.info() != Eigen::Success) {
    throw Error(Errc::NearSingularPencil, "eigendecomposition of the whitened matrix failed");
  }
  const Eigen::VectorXd ev = inner.eigenvalues();
  std::vector<double> values(ev.data(), ev.data() + ev.size());
  std::sort(values.begin(), values.end());
  return values;
}

std::uint32_t lo32(std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); }
std::uint32_t hi32(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

}  // namespace

EntryMoments entry_moments(EntryDistribution dist) {
  switch (dist) {
    case EntryDistribution::RealGaussian: return {1, 3.0};
    case EntryDistribution::ComplexGaussian: return {0, 2.0};
    case EntryDistribution::Rademacher: return {1, 1.0};
    case EntryDistribution::StandardizedUniform: return {1, 1.8};
  }
  return {};
}

std::string_view to_string(EntryDistribution dist) {
  switch (dist) {
    case EntryDistribution::RealGaussian: return "real-gaussian";
    case EntryDistribution::ComplexGaussian: return "complex-gaussian";
    case EntryDistribution::Rademacher: return "rademacher";
    case EntryDistribution::StandardizedUniform: return "uniform";
  }
  return "unknown";
}

EntryDistribution parse_distribution(std::string_view name) {
  for (auto d : {EntryDistribution::RealGaussian, EntryDistribution::ComplexGaussian,
                 EntryDistribution::Rademacher, EntryDistribution::StandardizedUniform}) {
    if (name == to_string(d)) return d;
  }
  throw Error(Errc::InvalidArgument, "unknown entry distribution '" + std::string(name) + "'");
}

StreamRng::StreamRng(std::uint64_t seed, std::uint64_t replicate, MatrixRole role) {
  std::seed_seq seq{lo32(seed), hi32(seed), lo32(replicate), hi32(replicate),
                    static_cast<std::uint32_t>(role), 0x42e7a1u};
  engine_.seed(seq);
}

double StreamRng::real_entry(EntryDistribution dist) {
  switch (dist) {
    case EntryDistribution::RealGaussian:
      return normal_(engine_);
    case EntryDistribution::Rademacher:
      return (engine_() >> 63) != 0 ? 1.0 : -1.0;
    case EntryDistribution::StandardizedUniform:
      return std::sqrt(3.0) * uniform_(engine_);
    case EntryDistribution::ComplexGaussian:
      break;
  }
  throw Error(Errc::InvalidArgument, "complex entries are drawn with sample_complex_matrix");
}

Eigen::MatrixXd sample_real_matrix(Eigen::Index rows, Eigen::Index cols, EntryDistribution dist,
                                   StreamRng& rng) {
  Eigen::MatrixXd X(rows, cols);
  // Column-major fill order is part of the reproducibility contract.
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) X(i, j) = rng.real_entry(dist);
  return X;
}

Eigen::MatrixXcd sample_complex_matrix(Eigen::Index rows, Eigen::Index cols, StreamRng& rng) {
  Eigen::MatrixXcd X(rows, cols);
  const double scale = std::sqrt(0.5);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = rng.real_entry(EntryDistribution::RealGaussian);
      const double im = rng.real_entry(EntryDistribution::RealGaussian);
      X(i, j) = std::complex<double>(scale * re, scale * im);
    }
  }
  return X;
}

std::vector<double> beta_spectrum(const Eigen::MatrixXd& S, const Eigen::MatrixXd& T,
                                  double alpha) {
  return whitened_spectrum(S, T, alpha);
}

std::vector<double> beta_spectrum(const Eigen::MatrixXcd& S, const Eigen::MatrixXcd& T,
                                  double alpha) {
  return whitened_spectrum(S, T, alpha);
}

EigenSpectrum sample_beta_spectrum(const FiniteDims& dims, EntryDistribution dist, double alpha,
                                   std::uint64_t seed, std::uint64_t replicate) {
  const FiniteDims d = validate_dims(dims);
  EigenSpectrum out;
  out.dims = d;
  out.seed = seed;
  out.replicate = replicate;
  out.dist = dist;
  out.alpha = alpha;
  StreamRng first(seed, replicate, MatrixRole::First);
  StreamRng second(seed, replicate, MatrixRole::Second);
  const double n = static_cast<double>(d.n);
  const double N = static_cast<double>(d.N);
  if (dist == EntryDistribution::ComplexGaussian) {
    const Eigen::MatrixXcd X = sample_complex_matrix(d.p, d.n, first);
    const Eigen::MatrixXcd XX = sample_complex_matrix(d.p, d.N, second);
    const Eigen::MatrixXcd S = X * X.adjoint() / n;
    const Eigen::MatrixXcd T = XX * XX.adjoint() / N;
    out.values = beta_spectrum(S, T, alpha);
  } else {
    const Eigen::MatrixXd X = sample_real_matrix(d.p, d.n, dist, first);
    const Eigen::MatrixXd XX = sample_real_matrix(d.p, d.N, dist, second);
    const Eigen::MatrixXd S = X * X.transpose() / n;
    const Eigen::MatrixXd T = XX * XX.transpose() / N;
    out.values = beta_spectrum(S, T, alpha);
  }
  return out;
}

double esd_eval(std::span<const double> sorted, double x) {
  if (sorted.empty()) return 0.0;
  const auto count = std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin();
  return static_cast<double>(count) / static_cast<double>(sorted.size());
}

double ks_distance(std::span<const double> sorted, const std::function<double(double)>& cdf) {
  const std::size_t p = sorted.size();
  if (p == 0) return 0.0;
  const double inv = 1.0 / static_cast<double>(p);
  double worst = 0.0;
  std::size_t i = 0;
  while (i < p) {
    const double x = sorted[i];
    std::size_t j = i;
    while (j < p && sorted[j] == x) ++j;
    const double below = static_cast<double>(i) * inv;
    const double at = static_cast<double>(j) * inv;
    const double left_cdf = cdf(std::nextafter(x, -HUGE_VAL));
    worst = std::max({worst, std::abs(at - cdf(x)), std::abs(below - left_cdf)});
    i = j;
  }
  return worst;
}

void write_spectrum_csv(const std::filesystem::path& path, std::span<const double> values) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << "eigenvalue\n";
  char buf[64];
  for (const double v : values) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", v);
    out << buf;
  }
}

std::vector<double> read_spectrum_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("eigenvalue", 0) != 0) {
    throw Error(Errc::IoError, "missing 'eigenvalue' header in " + path.string());
  }
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    values.push_back(std::stod(line));
  }
  std::sort(values.begin(), values.end());
  return values;
}

std::string spectrum_metadata_json(const EigenSpectrum& spectrum) {
  nlohmann::ordered_json j;
  j["p"] = spectrum.dims.p;
  j["n"] = spectrum.dims.n;
  j["N"] = spectrum.dims.N;
  j["alpha"] = spectrum.alpha;
  j["seed"] = spectrum.seed;
  j["replicate"] = spectrum.replicate;
  j["distribution"] = std::string(to_string(spectrum.dist));
  j["count"] = spectrum.values.size();
  return j.dump(2);
}

}  // namespace betalss
