#include "reservoir/mc_sim.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <string_view>
#include <thread>

#include "reservoir/errors.hpp"
#include "reservoir/ks.hpp"

namespace reservoir {

namespace {

struct ChainOutput {
  std::size_t at_zero = 0;
  std::size_t at_v = 0;
  std::vector<double> interior;
};

ChainOutput simulate_one(const ModelParams& params, const SimConfig& config,
                         std::uint64_t seed) {
  Rng rng(seed);
  ChainOutput out;
  out.interior.reserve(config.samples);
  double z = params.v / 2.0;
  for (std::size_t t = 0; t < config.burn_in; ++t) {
    z = step(z, sample_inflow(rng, params.p, params.mu), params.m, params.v);
  }
  for (std::size_t t = 0; t < config.samples; ++t) {
    z = step(z, sample_inflow(rng, params.p, params.mu), params.m, params.v);
    if (z <= kAtomTolerance) {
      ++out.at_zero;
    } else if (params.v - z <= kAtomTolerance) {
      ++out.at_v;
    } else {
      out.interior.push_back(z);
    }
  }
  return out;
}

std::vector<double> with_atoms(const SimulationResult& sim) {
  std::vector<double> all;
  all.reserve(sim.total);
  all.insert(all.end(), sim.at_zero, 0.0);
  all.insert(all.end(), sim.interior_samples.begin(), sim.interior_samples.end());
  all.insert(all.end(), sim.at_v, sim.params.v);
  return all;
}

}  // namespace

void validate(const SimConfig& config) {
  if (config.samples == 0) throw DomainError("samples must be > 0");
  if (config.chains == 0) throw DomainError("chains must be >= 1");
}

unsigned worker_threads(std::size_t jobs, unsigned requested) {
  unsigned cap = requested;
  if (cap == 0) {
    cap = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("RESERVOIR_CALC_THREADS")) {
      unsigned parsed = 0;
      const std::string_view text(env);
      const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), parsed);
      if (ec == std::errc() && ptr == text.data() + text.size() && parsed > 0) {
        cap = std::min(cap, parsed);
      }
    }
  }
  return static_cast<unsigned>(std::min<std::size_t>(cap, std::max<std::size_t>(jobs, 1)));
}

double sample_inflow(Rng& rng, int p, double mu) {
  double x = 0.0;
  for (int i = 0; i < p; ++i) x += rng.exponential(mu);
  return x;
}

double step(double z, double x, double m, double v) {
  return std::max(0.0, std::min(x + z - m, v));
}

SimulationResult run_chain(const ModelParams& params, const SimConfig& config) {
  validate(params);
  validate(config);

  std::vector<ChainOutput> outputs(config.chains);
  const unsigned workers = worker_threads(config.chains, config.threads);
  if (workers <= 1) {
    for (std::size_t c = 0; c < config.chains; ++c) {
      outputs[c] = simulate_one(params, config, stream_seed(config.seed, c));
    }
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t c = w; c < config.chains; c += workers) {
          outputs[c] = simulate_one(params, config, stream_seed(config.seed, c));
        }
      });
    }
  }

  SimulationResult result;
  result.params = params;
  result.total = config.samples * config.chains;
  for (ChainOutput& out : outputs) {
    result.at_zero += out.at_zero;
    result.at_v += out.at_v;
    result.interior_samples.insert(result.interior_samples.end(), out.interior.begin(),
                                   out.interior.end());
    out.interior = {};
  }
  std::sort(result.interior_samples.begin(), result.interior_samples.end());
  const double total = static_cast<double>(result.total);
  result.empirical_mass_at_zero = static_cast<double>(result.at_zero) / total;
  result.empirical_mass_at_v = static_cast<double>(result.at_v) / total;
  return result;
}

double compare(SimulationResult& sim, const StationaryDistribution& dist) {
  if (!(sim.params == dist.params())) {
    throw DomainError("simulation parameters do not match the distribution");
  }
  const double d = ks_distance_with_atoms(
      sim.interior_samples, sim.at_zero, sim.at_v, dist.depletion_probability(),
      dist.spillage_probability(), [&](double z) { return dist.cdf(z); });
  sim.ks_distance = d;
  return d;
}

double compare(const SimulationResult& a, const SimulationResult& b) {
  const std::vector<double> xa = with_atoms(a);
  const std::vector<double> xb = with_atoms(b);
  return ks_two_sample(xa, xb);
}

}  // namespace reservoir
