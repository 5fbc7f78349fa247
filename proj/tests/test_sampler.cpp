#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <vector>

#include "betalss/errors.hpp"
#include "betalss/lsd.hpp"
#include "betalss/sampler.hpp"

using namespace betalss;

namespace {

std::size_t count_below(const std::vector<double>& v, double x) {
  return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [x](double e) { return e < x; }));
}

std::size_t count_above(const std::vector<double>& v, double x) {
  return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [x](double e) { return e > x; }));
}

}  // namespace

TEST_CASE("entry laws have unit variance and the advertised fourth moment") {
  for (auto dist : {EntryDistribution::RealGaussian, EntryDistribution::Rademacher,
                    EntryDistribution::StandardizedUniform}) {
    StreamRng rng(11, 0, MatrixRole::First);
    const int count = 400000;
    double m1 = 0, m2 = 0, m4 = 0;
    for (int i = 0; i < count; ++i) {
      const double x = rng.real_entry(dist);
      m1 += x;
      m2 += x * x;
      m4 += x * x * x * x;
    }
    m1 /= count;
    m2 /= count;
    m4 /= count;
    CAPTURE(to_string(dist));
    CHECK(std::abs(m1) < 0.01);
    CHECK(m2 == doctest::Approx(1.0).epsilon(0.01));
    CHECK(m4 == doctest::Approx(entry_moments(dist).m4).epsilon(0.03));
  }
}

TEST_CASE("complex entries have E|x|^2 = 1, E x^2 = 0 and E|x|^4 = 2") {
  StreamRng rng(5, 0, MatrixRole::Second);
  const Eigen::MatrixXcd m = sample_complex_matrix(400, 500, rng);
  const double count = static_cast<double>(m.size());
  const double second = m.cwiseAbs2().sum() / count;
  const std::complex<double> pseudo = m.cwiseProduct(m).sum() / count;
  const double fourth = m.cwiseAbs2().cwiseAbs2().sum() / count;
  CHECK(second == doctest::Approx(1.0).epsilon(0.01));
  CHECK(std::abs(pseudo) < 0.01);
  CHECK(fourth == doctest::Approx(2.0).epsilon(0.03));
  CHECK(entry_moments(EntryDistribution::ComplexGaussian).tau == 0);
}

TEST_CASE("distribution names round trip") {
  for (auto dist : {EntryDistribution::RealGaussian, EntryDistribution::ComplexGaussian,
                    EntryDistribution::Rademacher, EntryDistribution::StandardizedUniform}) {
    CHECK(parse_distribution(to_string(dist)) == dist);
  }
  CHECK_THROWS_AS(parse_distribution("cauchy"), Error);
}

TEST_CASE("small sample has all eigenvalues in [0, 1]") {
  const auto spec = sample_beta_spectrum({3, 5, 5}, EntryDistribution::RealGaussian, 1.0, 7);
  REQUIRE(spec.values.size() == 3);
  for (double v : spec.values) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK(std::is_sorted(spec.values.begin(), spec.values.end()));
}

TEST_CASE("rank deficiency produces exact atoms") {
  const auto spec = sample_beta_spectrum({300, 150, 600}, EntryDistribution::RealGaussian, 4.0, 1);
  CHECK(count_below(spec.values, 1e-8) == 150);
  CHECK(count_above(spec.values, 1.0 - 1e-8) == 0);
}

TEST_CASE("atom counts and containment hold across seeds and laws") {
  const FiniteDims shapes[] = {{40, 25, 60}, {40, 60, 30}, {30, 20, 20}, {20, 60, 80}};
  const EntryDistribution laws[] = {EntryDistribution::RealGaussian, EntryDistribution::ComplexGaussian,
                                    EntryDistribution::Rademacher, EntryDistribution::StandardizedUniform};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const FiniteDims d = shapes[seed % 4];
    const EntryDistribution law = laws[(seed / 4) % 4];
    const EigenSpectrum spec = sample_beta_spectrum(d, law, d.alpha_n(), seed);
    CAPTURE(seed);
    CHECK(count_below(spec.values, 1e-8) == static_cast<std::size_t>(std::max<std::int64_t>(0, d.p - d.n)));
    CHECK(count_above(spec.values, 1.0 - 1e-8) == static_cast<std::size_t>(std::max<std::int64_t>(0, d.p - d.N)));
    CHECK(spec.values.front() >= -1e-10);
    CHECK(spec.values.back() <= 1.0 + 1e-10);
  }
}

TEST_CASE("swapping the two samples maps lambda to 1 - lambda") {
  for (double alpha : {1.0, 2.5}) {
    StreamRng first(3, 0, MatrixRole::First);
    StreamRng second(3, 0, MatrixRole::Second);
    const Eigen::MatrixXd x = sample_real_matrix(15, 25, EntryDistribution::RealGaussian, first);
    const Eigen::MatrixXd xx = sample_real_matrix(15, 40, EntryDistribution::RealGaussian, second);
    const Eigen::MatrixXd S = x * x.transpose() / 25.0;
    const Eigen::MatrixXd T = xx * xx.transpose() / 40.0;
    const auto forward = beta_spectrum(S, T, alpha);
    const auto swapped = beta_spectrum(T, S, 1.0 / alpha);
    REQUIRE(forward.size() == swapped.size());
    const std::size_t p = forward.size();
    for (std::size_t i = 0; i < p; ++i) CHECK(std::abs(forward[i] - (1.0 - swapped[p - 1 - i])) < 1e-10);
  }
}

TEST_CASE("generalized eigenvalues match the explicit product") {
  StreamRng first(8, 0, MatrixRole::First);
  StreamRng second(8, 0, MatrixRole::Second);
  const Eigen::MatrixXd x = sample_real_matrix(6, 10, EntryDistribution::RealGaussian, first);
  const Eigen::MatrixXd xx = sample_real_matrix(6, 9, EntryDistribution::RealGaussian, second);
  const Eigen::MatrixXd S = x * x.transpose() / 10.0;
  const Eigen::MatrixXd T = xx * xx.transpose() / 9.0;
  const Eigen::MatrixXd B = S * (S + 0.9 * T).inverse();
  Eigen::VectorXd direct = B.eigenvalues().real();
  std::sort(direct.data(), direct.data() + direct.size());
  const auto values = beta_spectrum(S, T, 0.9);
  for (Eigen::Index i = 0; i < direct.size(); ++i) CHECK(values[i] == doctest::Approx(direct[i]).epsilon(1e-9));
}

TEST_CASE("singular pencil is rejected") {
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(3, 3);
  CHECK_THROWS_AS(beta_spectrum(zero, zero, 1.0), Error);
  try {
    beta_spectrum(zero, zero, 1.0);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NearSingularPencil);
  }
}

TEST_CASE("sampling is bitwise reproducible and stream keyed") {
  const FiniteDims d{20, 30, 50};
  const auto a = sample_beta_spectrum(d, EntryDistribution::StandardizedUniform, 1.5, 99, 4);
  const auto b = sample_beta_spectrum(d, EntryDistribution::StandardizedUniform, 1.5, 99, 4);
  CHECK(a.values == b.values);
  const auto c = sample_beta_spectrum(d, EntryDistribution::StandardizedUniform, 1.5, 99, 5);
  CHECK(a.values != c.values);
  const auto e = sample_beta_spectrum(d, EntryDistribution::StandardizedUniform, 1.5, 100, 4);
  CHECK(a.values != e.values);
}

TEST_CASE("esd_eval examples") {
  const std::vector<double> v = {0.2, 0.5, 0.8};
  CHECK(esd_eval(v, 0.5) == doctest::Approx(2.0 / 3.0));
  CHECK(esd_eval(v, 0.1) == 0.0);
  CHECK(esd_eval(v, 0.8) == 1.0);
  CHECK(esd_eval(v, 3.0) == 1.0);
  const std::vector<double> single = {0.5};
  CHECK(esd_eval(single, 0.5) == 1.0);
}

TEST_CASE("ks_distance examples") {
  const std::vector<double> v = {0.1, 0.3, 0.3, 0.9};
  CHECK(ks_distance(v, [&](double x) { return esd_eval(v, x); }) == 0.0);
  const std::vector<double> single = {0.5};
  CHECK(ks_distance(single, [](double x) { return std::clamp(x, 0.0, 1.0); }) ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("sampled spectrum approaches the limiting law") {
  const FiniteDims d{200, 400, 400};
  const auto spec = sample_beta_spectrum(d, EntryDistribution::RealGaussian, 1.0, 2);
  const LsdModel model(finite_params(d));
  CHECK(ks_distance(spec.values, [&](double x) { return model.cdf(x); }) <= 0.05);
}

TEST_CASE("spectrum CSV round trip is exact") {
  const auto spec = sample_beta_spectrum({7, 9, 11}, EntryDistribution::RealGaussian, 1.2, 3);
  const auto path = std::filesystem::temp_directory_path() / "betalss_spectrum_roundtrip.csv";
  write_spectrum_csv(path, spec.values);
  CHECK(read_spectrum_csv(path) == spec.values);
  std::filesystem::remove(path);
  const std::string meta = spectrum_metadata_json(spec);
  CHECK(meta.find("\"seed\"") != std::string::npos);
  CHECK(meta.find("real-gaussian") != std::string::npos);
}
