#include "betalss/quadrature.hpp"

namespace betalss::quad {

const GaussRule& gauss_legendre16() {
  static const GaussRule rule = [] {
    using G = boost::math::quadrature::gauss<double, kGaussOrder>;
    GaussRule r;
    const auto& x = G::abscissa();
    const auto& w = G::weights();
    // Boost stores the non-negative half; the rule is symmetric.
    constexpr int half = kGaussOrder / 2;
    for (int i = 0; i < half; ++i) {
      r.nodes[half - 1 - i] = -x[i];
      r.weights[half - 1 - i] = w[i];
      r.nodes[half + i] = x[i];
      r.weights[half + i] = w[i];
    }
    return r;
  }();
  return rule;
}

}  // namespace betalss::quad
