#pragma once

namespace reservoir {

// Largest gamma shape accepted by the exact solver.
inline constexpr int kMaxShape = 16;
// Largest arc count n = floor(v/m) accepted by the exact solver.
inline constexpr long kMaxArcs = 10000;
// Relative tolerance (in units of m) used to snap delta to zero.
inline constexpr double kDeltaSnap = 1e-9;

/// Discrete-time reservoir: capacity v, Gamma(p, mu) inflow per step
/// (shape p, rate mu, mean p/mu) and constant target outflow m.
struct ModelParams {
  double v = 1.0;
  int p = 1;
  double mu = 1.0;
  double m = 0.5;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Quantities derived from ModelParams that fix the arc layout of the
/// stationary distribution.
///
///   n      = floor(v/m)
///   delta  = v - m n, in [0, m), snapped to 0 within kDeltaSnap * m
///   lambda = (-1)^(p-1) mu^p exp(-mu m)
///   kappa  = n - 1 if delta == 0, else n
struct DerivedParams {
  long n = 0;
  double delta = 0.0;
  double lambda = 0.0;
  long kappa = 0;
};

// Throws DomainError unless v, mu, m are finite and positive and
// 1 <= p <= kMaxShape.
void validate(const ModelParams& params);

// Throws DomainError for invalid params or when n exceeds kMaxArcs.
DerivedParams derive_params(const ModelParams& params);

// Maps {v, p, mu, m} to {v/m, p, m mu, 1}. Depletion and spillage
// probabilities are unchanged and the CDF scales as F~(z) = F(m z).
ModelParams rescale(const ModelParams& params);

}  // namespace reservoir
