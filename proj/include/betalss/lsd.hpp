#pragma once

#include <complex>
#include <span>

#include "betalss/params.hpp"

namespace betalss {

using cplx = std::complex<double>;

struct SupportEdges {
  double t_l = 0.0;
  double t_r = 0.0;
};

struct Atoms {
  double at_zero = 0.0;
  double at_one = 0.0;
};

/// D = (alpha(1-Y) - 1 + y)^2 + 4 alpha, the leading coefficient of the edge quadratic.
double edge_discriminant(const SpectralParams& params);

/// Roots of 4 alpha t(1-t) - ((1-y)(1-t) + alpha t (1-Y))^2, the support edges of the limiting law.
SupportEdges support_edges(const SpectralParams& params);

/// Absolutely continuous part of the limiting spectral law of B. Zero outside (t_l, t_r)
/// and at the edges themselves.
double lsd_density(const SpectralParams& params, double t);

Atoms lsd_atoms(const SpectralParams& params);

/// Limiting distribution function, atoms included.
double lsd_cdf(const SpectralParams& params, double x);

/// Stieltjes transform of the limiting law of B at z off [t_l, t_r] ∪ {0, 1}.
cplx stieltjes_s(const SpectralParams& params, cplx z);

/// d/dz of stieltjes_s, from the same closed form.
cplx stieltjes_s_derivative(const SpectralParams& params, cplx z);

/// pi^{-1} Im s(x + i eps).
double density_from_stieltjes(const SpectralParams& params, double x, double eps);

struct MpSupport {
  double a = 0.0;
  double b = 0.0;
};

MpSupport mp_support(double ratio);
double mp_atom(double ratio);
/// Marchenko-Pastur density for aspect ratio `ratio`; the atom at 0 is reported by mp_atom.
double mp_density(double ratio, double x);
cplx mp_stieltjes(double ratio, cplx z);
cplx mp_stieltjes_derivative(double ratio, cplx z);

/// Stieltjes transform of the limiting law of the F matrix S T^{-1}. Independent of alpha.
/// Requires Y != 1.
cplx fmatrix_stieltjes(const SpectralParams& params, cplx z);
double fmatrix_density(const SpectralParams& params, double x);

/// sup over the grid of |f_B(t) - f_F(alpha t/(1-t)) alpha/(1-t)^2|. Requires Y < 1.
double f_matrix_pushforward_check(const SpectralParams& params, std::span<const double> grid);

/// True when [t_l, t_r] lies strictly inside (c_l, c_r).
bool support_inside_analyticity_interval(const SpectralParams& params);

/// Cached evaluator bundling the edges, atoms and discriminant of one parameter set.
class LsdModel {
 public:
  explicit LsdModel(const SpectralParams& params);

  const SpectralParams& params() const { return params_; }
  const SupportEdges& edges() const { return edges_; }
  const Atoms& atoms() const { return atoms_; }
  double discriminant() const { return disc_; }

  double density(double t) const;
  double cdf(double x) const;
  /// Mass of the absolutely continuous part.
  double bulk_mass() const;
  cplx stieltjes(cplx z) const;

 private:
  SpectralParams params_;
  SupportEdges edges_;
  Atoms atoms_;
  double disc_ = 0.0;
};

}  // namespace betalss
