#include "reservoir/moran.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <thread>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "reservoir/errors.hpp"
#include "reservoir/ks.hpp"
#include "reservoir/mc_sim.hpp"

namespace reservoir::moran {

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 31>;

constexpr double kInnerTol = 1e-12;
constexpr double kOuterTol = 1e-11;
// z = exp(-s) substitution near the origin is truncated at this s; the
// neglected mass is of order z |ln z| < 1e-15.
constexpr double kLogCut = 40.0;

unsigned depth_for(std::size_t nodes) {
  unsigned depth = 1;
  while ((std::size_t{31} << (depth + 1)) <= nodes && depth < 20) ++depth;
  return depth;
}

// Adaptive Gauss-Kronrod over consecutive breakpoints.
template <typename F>
double integrate_pieces(F&& f, const std::vector<double>& cuts, unsigned depth, double tol) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] > cuts[i]) total += Kronrod::integrate(f, cuts[i], cuts[i + 1], depth, tol);
  }
  return total;
}

// Geometric breakpoints start, start*ratio, ... up to and including stop.
std::vector<double> geometric_cuts(double first, double start, double stop, double ratio) {
  std::vector<double> cuts{first};
  for (double x = start; x < stop; x *= ratio) {
    if (x > cuts.back()) cuts.push_back(x);
  }
  cuts.push_back(stop);
  return cuts;
}

// Int_0^upper g(z) dz where g may have a log singularity at 0: substitute
// z = upper * exp(-s).
template <typename F>
double integrate_from_origin(F&& g, double upper, unsigned depth, double tol) {
  auto h = [&](double s) {
    const double z = upper * std::exp(-s);
    return g(z) * z;
  };
  return integrate_pieces(h, {0.0, 2.0, 6.0, 15.0, kLogCut}, depth, tol);
}

}  // namespace

void validate(const MoranModel& model) {
  if (!(model.rho > 0.0 && model.rho < 1.0)) {
    throw DomainError("rho must lie in (0, 1), got " + std::to_string(model.rho));
  }
  if (!(model.quad_upper > 0.0) || !std::isfinite(model.quad_upper)) {
    throw DomainError("quad_upper must be finite and > 0");
  }
  if (model.quad_points < 31) throw DomainError("quad_points must be at least 31");
}

MoranModel make_model(double rho) {
  if (!(rho > 0.0 && rho < 1.0)) {
    throw DomainError("rho must lie in (0, 1), got " + std::to_string(rho));
  }
  MoranModel model;
  model.rho = rho;
  const double decay = 1.0 / rho - 1.0 + std::log(rho);
  model.quad_upper = 50.0 / decay;
  return model;
}

double effective_upper(const MoranModel& model, double z) {
  return model.quad_upper + model.rho * z / (1.0 - model.rho);
}

double integrand_dz(double rho, double z, double w) {
  if (w <= 0.0) return 0.0;
  const double s = z + w;
  const double log_g =
      (w - 1.0) * std::log(s) - s / rho - w * std::log(rho) - boost::math::lgamma(w);
  return std::exp(log_g) * ((w - 1.0) / s - 1.0 / rho);
}

double daniels_pdf(const MoranModel& model, double z) {
  validate(model);
  if (!(z > 0.0) || !std::isfinite(z)) {
    throw DomainError("daniels_pdf requires z > 0, got z = " + std::to_string(z));
  }
  const double rho = model.rho;
  auto f = [rho, z](double w) { return integrand_dz(rho, z, w); };

  // The integrand varies on the scale w ~ z near the origin.
  const double upper = effective_upper(model, z);
  std::vector<double> cuts = geometric_cuts(0.0, std::min(z, 1.0), 1.0, 8.0);
  for (double x = 4.0; x < upper; x *= 4.0) cuts.push_back(x);
  cuts.push_back(upper);

  const double integral = integrate_pieces(f, cuts, depth_for(model.quad_points), kInnerTol);
  return -(1.0 - rho) * integral;
}

double point_mass(const MoranModel& model) {
  validate(model);
  return 1.0 - model.rho;
}

double laplace_transform(double rho, double theta) {
  if (theta == 0.0) return 1.0;
  return (1.0 - rho) * theta / (theta - std::log1p(rho * theta));
}

double stationary_mean(double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw DomainError("rho must lie in (0, 1)");
  return rho * rho / (2.0 * (1.0 - rho));
}

double tail_decay_rate(double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw DomainError("rho must lie in (0, 1)");
  auto h = [rho](double t) { return t - std::log1p(rho * t); };
  // h > 0 near -1/rho, h < 0 just below 0.
  double lo = -1.0 / rho * (1.0 - 1e-15);
  double hi = -1e-9;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (h(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double numeric_laplace_transform(const MoranModel& model, double theta) {
  validate(model);
  if (theta < 0.0) throw DomainError("theta must be >= 0");
  const unsigned depth = 10;
  auto g = [&](double z) { return std::exp(-theta * z) * daniels_pdf(model, z); };

  const double tail_end = 1.0 + 40.0 / std::abs(tail_decay_rate(model.rho));
  const double near = integrate_from_origin(g, 1.0, depth, kOuterTol);
  const double far = integrate_pieces(g, geometric_cuts(1.0, 2.0, tail_end, 2.0), depth, kOuterTol);
  return (1.0 - model.rho) + near + far;
}

DanielsCdf::DanielsCdf(const MoranModel& model, std::size_t cells) : atom_(point_mass(model)) {
  if (cells < 2) throw DomainError("DanielsCdf needs at least two cells");
  const double z_max = 40.0 / std::abs(tail_decay_rate(model.rho));
  nodes_.resize(cells + 1);
  values_.resize(cells + 1);
  for (std::size_t k = 0; k <= cells; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(cells);
    nodes_[k] = z_max * t * t;
  }

  auto f = [&](double z) { return daniels_pdf(model, z); };
  values_[0] = atom_;
  values_[1] = atom_ + integrate_from_origin(f, nodes_[1], 10, kOuterTol);
  using Legendre = boost::math::quadrature::gauss<double, 10>;
  for (std::size_t k = 1; k < cells; ++k) {
    values_[k + 1] = values_[k] + Legendre::integrate(f, nodes_[k], nodes_[k + 1]);
  }
}

double DanielsCdf::operator()(double z) const {
  if (z <= 0.0) return z < 0.0 ? 0.0 : atom_;
  if (z >= nodes_.back()) return values_.back();
  const std::size_t cells = nodes_.size() - 1;
  std::size_t k = static_cast<std::size_t>(static_cast<double>(cells) * std::sqrt(z / nodes_.back()));
  k = std::min(k, cells - 1);
  while (k > 0 && nodes_[k] > z) --k;
  while (k + 1 < cells && nodes_[k + 1] <= z) ++k;
  const double t = (z - nodes_[k]) / (nodes_[k + 1] - nodes_[k]);
  return values_[k] + t * (values_[k + 1] - values_[k]);
}

void validate(const SimConfig& config) {
  if (!(config.dt > 0.0) || !std::isfinite(config.dt)) throw DomainError("dt must be > 0");
  if (!(config.horizon >= config.dt)) throw DomainError("horizon must be at least dt");
  if (!(config.burn_in >= 0.0)) throw DomainError("burn_in must be >= 0");
  if (config.thin == 0) throw DomainError("thin must be >= 1");
  if (config.chains == 0) throw DomainError("chains must be >= 1");
}

double sample_gamma(Rng& rng, double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0)) throw DomainError("gamma shape and scale must be > 0");
  const double whole = std::floor(shape);
  const double frac = shape - whole;
  double x = 0.0;
  for (double i = 0.0; i < whole; i += 1.0) x += rng.exponential(1.0);
  if (frac > 0.0) {
    const double b = 1.0 + frac / std::numbers::e;
    for (;;) {
      const double p = b * rng.uniform();
      if (p <= 1.0) {
        const double y = std::pow(p, 1.0 / frac);
        if (rng.uniform() <= std::exp(-y)) {
          x += y;
          break;
        }
      } else {
        const double y = -std::log((b - p) / frac);
        if (rng.uniform() <= std::pow(y, frac - 1.0)) {
          x += y;
          break;
        }
      }
    }
  }
  return x * scale;
}

Samples simulate_moran(const MoranModel& model, const SimConfig& config, Rng& rng) {
  validate(model);
  validate(config);
  const double dt = config.dt;
  const double rho = model.rho;
  const auto burn_steps = static_cast<std::size_t>(std::llround(config.burn_in / dt));
  const auto steps = static_cast<std::size_t>(std::llround(config.horizon / dt));

  double z = 0.0;
  auto advance = [&] {
    const double dx = sample_gamma(rng, dt, rho);
    if (config.scheme == Scheme::lindley) {
      z = std::max(0.0, z + dx - dt);
    } else {
      const double u = rng.uniform();
      const double before = std::max(0.0, z - u * dt);
      z = std::max(0.0, before + dx - (1.0 - u) * dt);
    }
  };

  for (std::size_t t = 0; t < burn_steps; ++t) advance();

  Samples out;
  out.positive.reserve(steps / config.thin + 1);
  double sum = 0.0;
  for (std::size_t t = 1; t <= steps; ++t) {
    advance();
    if (t % config.thin != 0) continue;
    ++out.total;
    sum += z;
    if (z == 0.0) {
      ++out.at_zero;
    } else {
      out.positive.push_back(z);
    }
  }
  std::sort(out.positive.begin(), out.positive.end());
  out.mean = out.total == 0 ? 0.0 : sum / static_cast<double>(out.total);
  return out;
}

Samples simulate_pooled(const MoranModel& model, const SimConfig& config) {
  validate(model);
  validate(config);
  std::vector<Samples> chains(config.chains);
  auto run = [&](std::size_t c) {
    Rng rng(stream_seed(config.seed, c));
    chains[c] = simulate_moran(model, config, rng);
  };
  const unsigned workers = worker_threads(config.chains, 0);
  if (workers <= 1) {
    for (std::size_t c = 0; c < config.chains; ++c) run(c);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t c = w; c < config.chains; c += workers) run(c);
      });
    }
  }

  Samples pooled;
  double weighted = 0.0;
  for (Samples& s : chains) {
    pooled.total += s.total;
    pooled.at_zero += s.at_zero;
    weighted += s.mean * static_cast<double>(s.total);
    pooled.positive.insert(pooled.positive.end(), s.positive.begin(), s.positive.end());
    s.positive = {};
  }
  std::sort(pooled.positive.begin(), pooled.positive.end());
  pooled.mean = pooled.total == 0 ? 0.0 : weighted / static_cast<double>(pooled.total);
  return pooled;
}

double ks_distance(const Samples& samples, const DanielsCdf& cdf) {
  return ks_distance_with_atoms(samples.positive, samples.at_zero, 0, cdf.atom(), 0.0, cdf);
}

}  // namespace reservoir::moran
