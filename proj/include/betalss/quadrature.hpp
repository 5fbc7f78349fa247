#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <type_traits>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "betalss/errors.hpp"

namespace betalss::quad {

inline constexpr int kGaussOrder = 16;

/// Nodes and weights of the 16-point Gauss-Legendre rule on [-1, 1], ascending.
struct GaussRule {
  std::array<double, kGaussOrder> nodes{};
  std::array<double, kGaussOrder> weights{};
};

const GaussRule& gauss_legendre16();

struct Tolerance {
  double relative = 1e-12;
  double absolute = 1e-8;  // reported error above this is a QuadratureFailure
  unsigned max_depth = 18;
};

template <class T>
double magnitude(const T& v) {
  return std::abs(v);
}

/// Adaptive Gauss-Kronrod (G10/K21) integral of f over [a, b]. f may be real or complex valued.
template <class F>
auto integrate(F&& f, double a, double b, const Tolerance& tol = {}) {
  using Result = std::invoke_result_t<F&, double>;
  double error = 0.0;
  double l1 = 0.0;
  if (a == b) return Result{};
  const Result value = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(
      f, a, b, tol.max_depth, tol.relative, &error, &l1);
  if (!std::isfinite(magnitude(value)) || !(error <= tol.absolute)) {
    throw Error(Errc::QuadratureFailure,
                "adaptive quadrature did not reach the requested accuracy (error estimate " +
                    std::to_string(error) + ")");
  }
  return value;
}

/// Integral over [a, b] ⊂ [left, right] of an integrand with square-root behaviour at the
/// edges `left` and `right`. The substitution t = left + u² is used on the left half and
/// t = right - v² on the right half, so f(t)·2u stays smooth at the edges.
template <class F>
auto integrate_sqrt_edges(F&& f, double left, double right, double a, double b,
                          const Tolerance& tol = {}) {
  using Result = std::invoke_result_t<F&, double>;
  if (!(left < right)) throw Error(Errc::InvalidArgument, "empty edge interval");
  a = std::max(a, left);
  b = std::min(b, right);
  if (!(a < b)) return Result{};
  const double mid = 0.5 * (left + right);
  Result total{};
  if (a < mid) {
    const double hi = std::min(b, mid);
    auto g = [&](double u) -> Result { return f(left + u * u) * (2.0 * u); };
    total += integrate(g, std::sqrt(a - left), std::sqrt(hi - left), tol);
  }
  if (b > mid) {
    const double lo = std::max(a, mid);
    auto g = [&](double v) -> Result { return f(right - v * v) * (2.0 * v); };
    total += integrate(g, std::sqrt(right - b), std::sqrt(right - lo), tol);
  }
  return total;
}

}  // namespace betalss::quad
