#include <doctest.h>

#include <cmath>

#include "reservoir/design_opt.hpp"
#include "reservoir/errors.hpp"

using namespace reservoir;

namespace {

// Brute-force argmin of spillage + depletion on an even grid.
double grid_argmin(double lo, double hi, int points) {
  double best_m = lo;
  double best = INFINITY;
  for (int i = 0; i < points; ++i) {
    const double m = lo + (hi - lo) * i / (points - 1);
    const double h = spill_plus_depletion(1.0, 1, 2.0, m);
    if (h < best) {
      best = h;
      best_m = m;
    }
  }
  return best_m;
}

}  // namespace

TEST_CASE("crossover outflow") {
  const OptimizationResult r = crossover_outflow(1.0, 1, 2.0, {0.4, 0.5});
  CHECK(std::abs(r.m_star - 0.44276) < 5e-6);
  CHECK(std::abs(r.objective_value - 0.199) < 5e-4);
  CHECK(std::abs(spill_minus_depletion(1.0, 1, 2.0, r.m_star)) <= 1e-8);
  CHECK(r.bracket.hi - r.bracket.lo <= 1e-10);
  CHECK(r.bracket.lo <= r.m_star);
  CHECK(r.m_star <= r.bracket.hi);
  CHECK(r.evaluations > 0);

  const OptimizationResult wide = crossover_outflow(1.0, 1, 2.0, {0.35, 0.55});
  CHECK(std::abs(wide.m_star - r.m_star) < 1e-6);
}

TEST_CASE("crossover root is unique on the bracket") {
  int changes = 0;
  double prev = spill_minus_depletion(1.0, 1, 2.0, 0.35);
  for (int i = 1; i <= 2000; ++i) {
    const double g = spill_minus_depletion(1.0, 1, 2.0, 0.35 + 0.2 * i / 2000);
    if ((g > 0) != (prev > 0)) ++changes;
    prev = g;
  }
  CHECK(changes == 1);
}

TEST_CASE("crossover bracket errors") {
  CHECK_THROWS_AS(crossover_outflow(1.0, 1, 2.0, {0.45, 0.45}), DomainError);
  CHECK_THROWS_AS(crossover_outflow(1.0, 1, 2.0, {0.5, 0.4}), DomainError);
  CHECK_THROWS_AS(crossover_outflow(1.0, 1, 2.0, {0.6, 0.9}), BracketError);
}

TEST_CASE("sum minimizer") {
  const OptimizationResult r = minimize_sum(1.0, 1, 2.0, {0.05, 0.95});
  CHECK(std::abs(r.m_star - 0.38) < 0.005);
  CHECK(std::abs(r.objective_value - 0.372) < 0.001);
  CHECK(r.bracket.hi - r.bracket.lo <= 1e-8);
  CHECK(r.objective_value <= spill_plus_depletion(1.0, 1, 2.0, r.m_star + 0.01));
  CHECK(r.objective_value <= spill_plus_depletion(1.0, 1, 2.0, r.m_star - 0.01));
  CHECK(std::abs(grid_argmin(0.05, 0.95, 10000) - r.m_star) < 0.002);

  CHECK_THROWS_AS(minimize_sum(1.0, 1, 2.0, {0.5, 0.5}), DomainError);
  CHECK_THROWS_AS(minimize_sum(1.0, 1, 2.0, {0.9, 0.1}), DomainError);
}

TEST_CASE("optimizers are deterministic") {
  const OptimizationResult a = minimize_sum(1.0, 2, 4.0, {0.05, 0.95});
  const OptimizationResult b = minimize_sum(1.0, 2, 4.0, {0.05, 0.95});
  CHECK(a.m_star == b.m_star);
  CHECK(a.evaluations == b.evaluations);
  const OptimizationResult c = crossover_outflow(1.0, 2, 4.0, {0.05, 0.95});
  const OptimizationResult d = crossover_outflow(1.0, 2, 4.0, {0.05, 0.95});
  CHECK(c.m_star == d.m_star);
}
