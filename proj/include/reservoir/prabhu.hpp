#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "reservoir/params.hpp"

namespace reservoir {

// Internal precision of the exact solver. The CDF is a difference between 1
// and exp(mu (v - z)) times an alternating series, so a few extra bits keep
// results accurate to ~1e-13 at desk-scale parameters.
using Wide = long double;

// (-lambda)^q x^k / k! for x >= 0 with 0^0 = 1. Evaluated by plain
// multiplication for k <= 30 and in log-magnitude with a tracked sign above.
Wide lambda_power_term(Wide neg_lambda, long q, Wide x, long k);

/// p x p coefficient matrix of the alpha system, row-major.
class DMatrix {
 public:
  explicit DMatrix(int p) : p_(p), entries_(static_cast<std::size_t>(p) * p, 0.0) {}

  int size() const { return p_; }
  Wide operator()(int r, int s) const { return entries_[index(r, s)]; }
  Wide& operator()(int r, int s) { return entries_[index(r, s)]; }
  std::span<const Wide> entries() const { return entries_; }

 private:
  std::size_t index(int r, int s) const { return static_cast<std::size_t>(r) * p_ + s; }

  int p_;
  std::vector<Wide> entries_;
};

/// Solution of (I - lambda D) alpha = b. alpha[0] is the spillage probability.
struct AlphaVector {
  std::vector<Wide> alpha;
  double condition = 0.0;
  double residual = 0.0;
};

// d_rs in closed form: the integrand (t - qm)^(qp+s) (t+m)^(p-r-1) is
// expanded binomially in u = t - qm, so each q contributes a finite sum of
// monomials in L = v - qm. Throws DomainError for r or s outside [0, p).
Wide d_entry(const ModelParams& params, const DerivedParams& derived, int r, int s);

DMatrix build_dmatrix(const ModelParams& params, const DerivedParams& derived);

// b_r = (-mu)^r exp(-mu(v+m)) sum_{s<p-r} [mu(v+m)]^s / s!
Wide rhs_entry(const ModelParams& params, int r);

std::vector<Wide> build_rhs(const ModelParams& params);

// Throws NumericalError if I - lambda D is singular or badly conditioned.
AlphaVector solve_alpha(const DMatrix& dmat, std::span<const Wide> rhs, double lambda);

// Index j of the arc containing z, 0 < z < v: the unique j with
// max{(j-1)m + delta, 0} < z < min{jm + delta, v}. A z lying exactly on a
// boundary belongs to the arc on its right.
long arc_index(const ModelParams& params, const DerivedParams& derived, double z);

/// Stationary law of the storage level: an atom F(0) at z = 0, an atom
/// alpha_0 at z = v and a piecewise-smooth density on the n + 1 arcs in
/// between. Immutable once built.
class StationaryDistribution {
 public:
  StationaryDistribution(ModelParams params, DerivedParams derived, DMatrix dmat,
                         AlphaVector alpha);

  const ModelParams& params() const { return params_; }
  const DerivedParams& derived() const { return derived_; }
  const DMatrix& dmatrix() const { return dmat_; }
  const AlphaVector& alpha() const { return alpha_; }

  // Right-continuous CDF on [0, v], clamped to [0, 1]; cdf(v) == 1.
  double cdf(double z) const;
  // Evaluates the expression of arc j at z, without the endpoint rules of
  // cdf(). Used for one-sided limits at arc boundaries and at v.
  double arc_cdf(long j, double z) const;
  // Absolutely continuous part of the density on (0, v).
  double pdf(double z) const;

  double depletion_probability() const { return depletion_; }
  double spillage_probability() const { return static_cast<double>(alpha_.alpha.front()); }

 private:
  // sum_r alpha_r sum_{q<=q_max} (-lambda)^q (v - qm - z)^(qp+r-shift) / (qp+r-shift)!
  Wide series(long q_max, Wide z, int shift) const;
  Wide arc_cdf_wide(long j, Wide z) const;

  ModelParams params_;
  DerivedParams derived_;
  DMatrix dmat_;
  AlphaVector alpha_;
  double depletion_ = 0.0;
};

StationaryDistribution build_distribution(const ModelParams& params);

}  // namespace reservoir
