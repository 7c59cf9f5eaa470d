#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "reservoir/rng.hpp"

// Continuous-time, infinite-capacity reservoir with gamma-process inflow
// X(t) ~ Gamma(shape t, scale rho) and unit outflow while non-empty. Its
// stationary law has an atom 1 - rho at zero and Daniels' density
//
//   f(z) = -(1 - rho) Int_0^inf d/dz [(z+w)^(w-1) exp(-(z+w)/rho) / (rho^w Gamma(w))] dw
//
// on z > 0. Everything here is experimental: there are no published
// reference values, only the Laplace transform identity and simulation.
namespace reservoir::moran {

struct MoranModel {
  double rho = 0.5;
  // Upper limit W of the w-integral at z = 0; it grows with z (see
  // effective_upper).
  double quad_upper = 0.0;
  // Node budget per w-segment for the adaptive Gauss-Kronrod rule.
  std::size_t quad_points = 10000;
};

// Model with the default truncation W = 50 / (1/rho - 1 - ln(1/rho)), the
// point where the integrand's exponential envelope has decayed by e^-50.
// Throws DomainError unless 0 < rho < 1.
MoranModel make_model(double rho);

void validate(const MoranModel& model);

// w-integral upper limit used at level z: W + rho z / (1 - rho), which
// tracks the drift of the integrand's peak for large z.
double effective_upper(const MoranModel& model, double z);

// d/dz of (z+w)^(w-1) exp(-(z+w)/rho) / (rho^w Gamma(w)), evaluated in
// log-space. Zero at w = 0 where 1/Gamma(w) vanishes.
double integrand_dz(double rho, double z, double w);

// Daniels' density for z > 0. Throws DomainError for z <= 0; the atom at
// zero is point_mass().
double daniels_pdf(const MoranModel& model, double z);

double point_mass(const MoranModel& model);

// Closed-form Laplace-Stieltjes transform (1-rho) theta / (theta - ln(1 + rho theta)).
// At theta = 0 it is 1.
double laplace_transform(double rho, double theta);

// (1 - rho) + Int_0^inf exp(-theta z) f(z) dz by quadrature. theta = 0
// gives the total mass.
double numeric_laplace_transform(const MoranModel& model, double theta);

// Stationary mean rho^2 / (2 (1 - rho)), i.e. minus the derivative of the
// transform at theta = 0.
double stationary_mean(double rho);

// Negative root of theta = ln(1 + rho theta); the density decays like
// exp(root * z).
double tail_decay_rate(double rho);

// CDF (1 - rho) + Int_0^z f, tabulated on a grid that is quadratically
// refined towards the log singularity at z = 0 and interpolated linearly.
class DanielsCdf {
 public:
  explicit DanielsCdf(const MoranModel& model, std::size_t cells = 1200);

  double operator()(double z) const;
  double atom() const { return atom_; }
  double z_max() const { return nodes_.back(); }
  // Mass of the continuous part up to z_max, should be close to rho.
  double tabulated_mass() const { return values_.back() - atom_; }

 private:
  double atom_;
  std::vector<double> nodes_;
  std::vector<double> values_;
};

// How a step of length dt combines the increment with the unit outflow.
enum class Scheme {
  // Z <- max{0, Z + dX - dt}: the whole increment arrives before the
  // outflow, so idle time inside a step is undercounted by O(dt).
  lindley,
  // The increment arrives at a uniform time inside the step; the level
  // is clamped at zero before and after the arrival.
  uniform_arrival,
};

struct SimConfig {
  double horizon = 2.0e5;  // simulated time after burn-in, per chain
  double dt = 0.01;
  double burn_in = 100.0;  // simulated time discarded at the start
  std::size_t thin = 10;   // retain every thin-th step
  std::uint64_t seed = 1;
  std::size_t chains = 1;
  Scheme scheme = Scheme::uniform_arrival;
};

// Throws DomainError unless dt > 0, horizon >= dt, burn_in >= 0, thin >= 1,
// chains >= 1.
void validate(const SimConfig& config);

struct Samples {
  std::size_t total = 0;
  std::size_t at_zero = 0;
  std::vector<double> positive;  // sorted
  double mean = 0.0;

  double mass_at_zero() const {
    return total == 0 ? 0.0 : static_cast<double>(at_zero) / static_cast<double>(total);
  }
};

// Gamma(shape, scale) for any shape > 0. The fractional part of the shape
// uses the Ahrens-Dieter GS acceptance-rejection sampler.
double sample_gamma(Rng& rng, double shape, double scale);

// One chain started empty; returns the retained post-burn-in levels.
Samples simulate_moran(const MoranModel& model, const SimConfig& config, Rng& rng);

// config.chains independent chains with streams derived from config.seed,
// pooled in chain order.
Samples simulate_pooled(const MoranModel& model, const SimConfig& config);

// KS distance between the pooled sample (atom included) and the tabulated
// Daniels CDF.
double ks_distance(const Samples& samples, const DanielsCdf& cdf);

}  // namespace reservoir::moran
