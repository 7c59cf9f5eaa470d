#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "reservoir/params.hpp"
#include "reservoir/prabhu.hpp"
#include "reservoir/rng.hpp"

namespace reservoir {

// Distance from 0 or v within which a simulated level counts as an atom hit.
inline constexpr double kAtomTolerance = 1e-12;

struct SimConfig {
  std::uint64_t seed = 1;
  std::size_t burn_in = 10000;
  std::size_t samples = 1000000;  // retained steps per chain
  std::size_t chains = 1;
  // Worker threads; 0 picks min(chains, hardware concurrency,
  // RESERVOIR_CALC_THREADS).
  unsigned threads = 0;
};

// Throws DomainError if samples == 0 or chains == 0.
void validate(const SimConfig& config);

/// Pooled post-burn-in levels from one or more chains.
struct SimulationResult {
  ModelParams params;
  std::size_t total = 0;  // samples * chains
  std::size_t at_zero = 0;
  std::size_t at_v = 0;
  double empirical_mass_at_zero = 0.0;
  double empirical_mass_at_v = 0.0;
  std::vector<double> interior_samples;  // sorted, each in (0, v)
  std::optional<double> ks_distance;
};

// One Gamma(p, mu) draw as the sum of p Exponential(mu) draws.
double sample_inflow(Rng& rng, int p, double mu);

// max{0, min{x + z - m, v}}
double step(double z, double x, double m, double v);

// Runs config.chains independent chains from Z_1 = v/2, each on its own
// stream derived from config.seed, and pools the retained levels.
// Deterministic for a fixed seed regardless of thread count.
SimulationResult run_chain(const ModelParams& params, const SimConfig& config);

// KS distance between the pooled sample (atoms included) and the analytic
// distribution; also stored in sim.ks_distance. Throws DomainError if the
// simulation was generated under different parameters.
double compare(SimulationResult& sim, const StationaryDistribution& dist);

// Two-sample KS distance between pooled simulations, atoms included.
double compare(const SimulationResult& a, const SimulationResult& b);

// Worker count honouring RESERVOIR_CALC_THREADS.
unsigned worker_threads(std::size_t jobs, unsigned requested);

}  // namespace reservoir
