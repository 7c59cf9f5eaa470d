#include "reservoir/design_opt.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "reservoir/errors.hpp"
#include "reservoir/prabhu.hpp"

namespace reservoir {

namespace {

void check_bracket(Bracket b) {
  if (!(std::isfinite(b.lo) && std::isfinite(b.hi))) throw DomainError("bracket must be finite");
  if (!(b.lo < b.hi)) throw DomainError("bracket requires lo < hi");
  if (!(b.lo > 0.0)) throw DomainError("bracket requires lo > 0");
}

struct Probabilities {
  double spillage;
  double depletion;
};

Probabilities evaluate(double v, int p, double mu, double m, std::size_t& evaluations) {
  ++evaluations;
  const StationaryDistribution dist = build_distribution(ModelParams{v, p, mu, m});
  return {dist.spillage_probability(), dist.depletion_probability()};
}

// Objective for the sum search; +inf where the distribution cannot be built.
double sum_or_inf(double v, int p, double mu, double m, std::size_t& evaluations) {
  try {
    const Probabilities pr = evaluate(v, p, mu, m, evaluations);
    return pr.spillage + pr.depletion;
  } catch (const DomainError&) {
  } catch (const NumericalError&) {
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace

double spill_plus_depletion(double v, int p, double mu, double m) {
  std::size_t unused = 0;
  const Probabilities pr = evaluate(v, p, mu, m, unused);
  return pr.spillage + pr.depletion;
}

double spill_minus_depletion(double v, int p, double mu, double m) {
  std::size_t unused = 0;
  const Probabilities pr = evaluate(v, p, mu, m, unused);
  return pr.spillage - pr.depletion;
}

OptimizationResult crossover_outflow(double v, int p, double mu, Bracket bracket) {
  check_bracket(bracket);
  OptimizationResult out;
  auto g = [&](double m) {
    const Probabilities pr = evaluate(v, p, mu, m, out.evaluations);
    return pr.spillage - pr.depletion;
  };

  double lo = bracket.lo;
  double hi = bracket.hi;
  double g_lo = g(lo);
  const double g_hi = g(hi);
  if (std::signbit(g_lo) == std::signbit(g_hi) && g_lo != 0.0 && g_hi != 0.0) {
    std::ostringstream msg;
    msg << "spillage - depletion does not change sign on [" << lo << ", " << hi
        << "] (values " << g_lo << ", " << g_hi << "); widen the bracket";
    throw BracketError(msg.str());
  }

  while (hi - lo > kCrossoverWidth) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double g_mid = g(mid);
    if (g_mid == 0.0) {
      lo = hi = mid;
      break;
    }
    if (std::signbit(g_mid) == std::signbit(g_lo)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
  }

  out.m_star = lo + 0.5 * (hi - lo);
  const Probabilities pr = evaluate(v, p, mu, out.m_star, out.evaluations);
  const double residual = pr.spillage - pr.depletion;
  if (std::abs(residual) > kCrossoverResidual) {
    std::ostringstream msg;
    msg << "bisection converged to m = " << out.m_star << " where spillage - depletion = "
        << residual << "; the sign change is not a root";
    throw BracketError(msg.str());
  }
  out.objective_value = 0.5 * (pr.spillage + pr.depletion);
  out.bracket = {lo, hi};
  return out;
}

OptimizationResult minimize_sum(double v, int p, double mu, Bracket bracket) {
  check_bracket(bracket);
  OptimizationResult out;
  auto h = [&](double m) { return sum_or_inf(v, p, mu, m, out.evaluations); };

  const std::size_t n = kSumGridPoints;
  const double span = bracket.hi - bracket.lo;
  auto grid = [&](std::size_t i) {
    return i + 1 == n ? bracket.hi
                      : bracket.lo + span * static_cast<double>(i) / static_cast<double>(n - 1);
  };

  std::size_t best = n;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double value = h(grid(i));
    if (value < best_value) {
      best_value = value;
      best = i;
    }
  }
  if (best == n) {
    throw NumericalError("objective could not be evaluated anywhere on the bracket");
  }

  double a = grid(best == 0 ? 0 : best - 1);
  double b = grid(best + 1 == n ? n - 1 : best + 1);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double hc = h(c);
  double hd = h(d);
  while (b - a > kSumWidth) {
    if (hc <= hd) {
      b = d;
      d = c;
      hd = hc;
      c = b - inv_phi * (b - a);
      hc = h(c);
    } else {
      a = c;
      c = d;
      hc = hd;
      d = a + inv_phi * (b - a);
      hd = h(d);
    }
  }

  out.m_star = a + 0.5 * (b - a);
  out.objective_value = h(out.m_star);
  out.bracket = {a, b};
  if (!std::isfinite(out.objective_value)) {
    throw NumericalError("objective is not finite at the refined minimiser");
  }
  return out;
}

}  // namespace reservoir
