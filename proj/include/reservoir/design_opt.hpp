#pragma once

#include <cstddef>

namespace reservoir {

struct Bracket {
  double lo = 0.0;
  double hi = 0.0;
};

struct OptimizationResult {
  double m_star = 0.0;
  double objective_value = 0.0;
  std::size_t evaluations = 0;
  Bracket bracket;  // final search interval, contains m_star
};

// Bisection terminates once the bracket is narrower than this.
inline constexpr double kCrossoverWidth = 1e-10;
// Largest |spillage - depletion| accepted at the returned crossover.
inline constexpr double kCrossoverResidual = 1e-8;
inline constexpr std::size_t kSumGridPoints = 512;
inline constexpr double kSumWidth = 1e-8;

// Outflow m at which spillage and depletion probabilities coincide, by
// bisection on g(m) = spillage(m) - depletion(m). objective_value is the
// common probability. Throws DomainError for an empty or inverted bracket
// and BracketError when g does not change sign on it.
OptimizationResult crossover_outflow(double v, int p, double mu, Bracket bracket);

// Outflow m minimising spillage(m) + depletion(m): a kSumGridPoints scan of
// the bracket followed by golden-section refinement around the best grid
// point. The scan guards against the kinks where floor(v/m) jumps.
// Throws DomainError for an empty or inverted bracket.
OptimizationResult minimize_sum(double v, int p, double mu, Bracket bracket);

// spillage + depletion at outflow m; used by the optimizers.
double spill_plus_depletion(double v, int p, double mu, double m);
// spillage - depletion at outflow m.
double spill_minus_depletion(double v, int p, double mu, double m);

}  // namespace reservoir
