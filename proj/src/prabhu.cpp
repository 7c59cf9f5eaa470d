#include "reservoir/prabhu.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "reservoir/errors.hpp"
#include "reservoir/linear_solve.hpp"

namespace reservoir {

namespace {

// Exponents above this are accumulated in log-magnitude.
constexpr long kPlainExponentLimit = 30;

// exp(-mu(v+m)) must stay representable for the right-hand side.
constexpr double kMaxExponent = 700.0;

bool odd(long k) { return (k % 2) != 0; }

// lambda recomputed at full internal precision.
Wide lambda_wide(const ModelParams& params) {
  const Wide mu = params.mu;
  Wide magnitude = std::exp(-mu * static_cast<Wide>(params.m));
  for (int i = 0; i < params.p; ++i) magnitude *= mu;
  return odd(params.p - 1) ? -magnitude : magnitude;
}

}  // namespace

void validate(const ModelParams& params) {
  auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (!positive(params.v)) throw DomainError("v must be finite and > 0");
  if (!positive(params.mu)) throw DomainError("mu must be finite and > 0");
  if (!positive(params.m)) throw DomainError("m must be finite and > 0");
  if (params.p < 1) throw DomainError("p must be a positive integer");
  if (params.p > kMaxShape) {
    throw DomainError("p = " + std::to_string(params.p) + " exceeds the supported maximum " +
                      std::to_string(kMaxShape));
  }
  if (params.mu * (params.v + params.m) > kMaxExponent) {
    throw DomainError("mu (v + m) too large: exp(-mu (v + m)) underflows");
  }
}

DerivedParams derive_params(const ModelParams& params) {
  validate(params);
  const double ratio = params.v / params.m;
  if (ratio > static_cast<double>(kMaxArcs) + 1.0) {
    throw DomainError("v/m exceeds the supported arc count " + std::to_string(kMaxArcs));
  }

  DerivedParams d;
  d.n = static_cast<long>(std::floor(ratio));
  d.delta = params.v - params.m * static_cast<double>(d.n);
  if (d.delta < kDeltaSnap * params.m) {
    d.delta = 0.0;
  } else if (params.m - d.delta < kDeltaSnap * params.m) {
    ++d.n;
    d.delta = 0.0;
  }
  if (d.n > kMaxArcs) {
    throw DomainError("v/m exceeds the supported arc count " + std::to_string(kMaxArcs));
  }

  d.lambda = static_cast<double>(lambda_wide(params));
  d.kappa = d.delta == 0.0 ? d.n - 1 : d.n;
  return d;
}

ModelParams rescale(const ModelParams& params) {
  validate(params);
  return ModelParams{params.v / params.m, params.p, params.m * params.mu, 1.0};
}

Wide lambda_power_term(Wide neg_lambda, long q, Wide x, long k) {
  if (k < 0) return 0;
  Wide factor = 1;
  if (x <= 0) {
    if (k > 0) return 0;
    x = 0;
  }
  if (k <= kPlainExponentLimit) {
    for (long i = 1; i <= k; ++i) factor *= x / static_cast<Wide>(i);
    for (long i = 0; i < q; ++i) factor *= neg_lambda;
    return factor;
  }
  if (q > 0 && neg_lambda == 0) return 0;
  Wide log_mag = static_cast<Wide>(k) * std::log(x) -
                 boost::math::lgamma(static_cast<Wide>(k) + 1);
  if (q > 0) log_mag += static_cast<Wide>(q) * std::log(std::abs(neg_lambda));
  const Wide mag = std::exp(log_mag);
  return (neg_lambda < 0 && odd(q)) ? -mag : mag;
}

Wide d_entry(const ModelParams& params, const DerivedParams& derived, int r, int s) {
  const int p = params.p;
  if (r < 0 || r >= p || s < 0 || s >= p) {
    throw DomainError("d-matrix index (" + std::to_string(r) + ", " + std::to_string(s) +
                      ") outside [0, " + std::to_string(p) + ")");
  }
  const long b = p - r - 1;
  const Wide m = params.m;
  const Wide neg_lambda = -lambda_wide(params);

  Wide total = 0;
  for (long q = 0; q <= derived.n; ++q) {
    const Wide qm = static_cast<Wide>(q) * m;
    const Wide length = params.v - qm;
    if (length <= 0) continue;
    const Wide shift = qm + m;  // t + m = u + (q+1)m
    const long a = q * p + s;

    Wide inner = 0;
    Wide binom = 1;  // C(a + k, k)
    for (long k = 0; k <= b; ++k) {
      if (k > 0) binom *= static_cast<Wide>(a + k) / static_cast<Wide>(k);
      inner += lambda_power_term(1, 0, shift, b - k) * binom *
               lambda_power_term(neg_lambda, q, length, a + k + 1);
    }
    total += inner;
  }
  return odd(p + r - 1) ? -total : total;
}

DMatrix build_dmatrix(const ModelParams& params, const DerivedParams& derived) {
  DMatrix dmat(params.p);
  for (int r = 0; r < params.p; ++r) {
    for (int s = 0; s < params.p; ++s) dmat(r, s) = d_entry(params, derived, r, s);
  }
  return dmat;
}

Wide rhs_entry(const ModelParams& params, int r) {
  if (r < 0 || r >= params.p) {
    throw DomainError("rhs index " + std::to_string(r) + " outside [0, " +
                      std::to_string(params.p) + ")");
  }
  const Wide mu = params.mu;
  const Wide x = mu * (static_cast<Wide>(params.v) + params.m);
  Wide sum = 0;
  Wide term = std::exp(-x);
  for (int s = 0; s < params.p - r; ++s) {
    if (s > 0) term *= x / static_cast<Wide>(s);
    sum += term;
  }
  for (int i = 0; i < r; ++i) sum *= -mu;
  return sum;
}

std::vector<Wide> build_rhs(const ModelParams& params) {
  std::vector<Wide> rhs(static_cast<std::size_t>(params.p));
  for (int r = 0; r < params.p; ++r) rhs[static_cast<std::size_t>(r)] = rhs_entry(params, r);
  return rhs;
}

AlphaVector solve_alpha(const DMatrix& dmat, std::span<const Wide> rhs, double lambda) {
  const int p = dmat.size();
  if (rhs.size() != static_cast<std::size_t>(p)) {
    throw DomainError("rhs length does not match the d-matrix");
  }
  std::vector<Wide> a(static_cast<std::size_t>(p) * p);
  for (int r = 0; r < p; ++r) {
    for (int s = 0; s < p; ++s) {
      a[static_cast<std::size_t>(r) * p + s] = (r == s ? 1 : 0) - lambda * dmat(r, s);
    }
  }
  DenseSolution<Wide> sol = solve_dense<Wide>(a, rhs, static_cast<std::size_t>(p));
  return AlphaVector{std::move(sol.x), sol.condition, sol.residual};
}

long arc_index(const ModelParams& params, const DerivedParams& derived, double z) {
  if (!(z > 0.0 && z < params.v)) {
    throw DomainError("arc_index requires 0 < z < v, got z = " + std::to_string(z));
  }
  if (z < derived.delta) return 0;
  const long j = static_cast<long>(std::floor((z - derived.delta) / params.m)) + 1;
  return std::clamp(j, 1L, derived.n);
}

StationaryDistribution::StationaryDistribution(ModelParams params, DerivedParams derived,
                                               DMatrix dmat, AlphaVector alpha)
    : params_(params), derived_(derived), dmat_(std::move(dmat)), alpha_(std::move(alpha)) {
  const Wide scale = std::exp(static_cast<Wide>(params_.mu) * params_.v);
  // Rounding can push a vanishing atom a few ulps below zero.
  depletion_ = std::clamp(static_cast<double>(1 - scale * series(derived_.kappa, 0, 0)), 0.0, 1.0);
}

Wide StationaryDistribution::series(long q_max, Wide z, int shift) const {
  const int p = params_.p;
  const Wide neg_lambda = -lambda_wide(params_);
  const Wide v = params_.v;
  const Wide m = params_.m;
  Wide total = 0;
  for (int r = 0; r < p; ++r) {
    Wide inner = 0;
    for (long q = 0; q <= q_max; ++q) {
      const Wide base = v - static_cast<Wide>(q) * m - z;
      inner += lambda_power_term(neg_lambda, q, base, q * p + r - shift);
    }
    total += alpha_.alpha[static_cast<std::size_t>(r)] * inner;
  }
  return total;
}

Wide StationaryDistribution::arc_cdf_wide(long j, Wide z) const {
  const Wide mu = params_.mu;
  return 1 - std::exp(mu * (static_cast<Wide>(params_.v) - z)) * series(derived_.n - j, z, 0);
}

double StationaryDistribution::arc_cdf(long j, double z) const {
  return static_cast<double>(arc_cdf_wide(j, z));
}

double StationaryDistribution::cdf(double z) const {
  if (!(z >= 0.0 && z <= params_.v)) {
    throw DomainError("cdf requires 0 <= z <= v, got z = " + std::to_string(z));
  }
  if (z == 0.0) return depletion_;
  if (z == params_.v) return 1.0;
  return std::clamp(arc_cdf(arc_index(params_, derived_, z), z), 0.0, 1.0);
}

double StationaryDistribution::pdf(double z) const {
  if (!(z > 0.0 && z < params_.v)) {
    throw DomainError("pdf requires 0 < z < v, got z = " + std::to_string(z));
  }
  const long q_max = derived_.n - arc_index(params_, derived_, z);
  const Wide mu = params_.mu;
  const Wide zw = z;
  return static_cast<double>(std::exp(mu * (static_cast<Wide>(params_.v) - zw)) *
                             (mu * series(q_max, zw, 0) + series(q_max, zw, 1)));
}

StationaryDistribution build_distribution(const ModelParams& params) {
  const DerivedParams derived = derive_params(params);
  DMatrix dmat = build_dmatrix(params, derived);
  const std::vector<Wide> rhs = build_rhs(params);
  AlphaVector alpha = solve_alpha(dmat, rhs, derived.lambda);
  return StationaryDistribution(params, derived, std::move(dmat), std::move(alpha));
}

}  // namespace reservoir
