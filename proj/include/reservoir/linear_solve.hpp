#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <numeric>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "reservoir/errors.hpp"

namespace reservoir {

// Largest 1-norm condition estimate accepted by solve_dense.
inline constexpr double kMaxCondition = 1e12;

template <std::floating_point T>
struct DenseSolution {
  std::vector<T> x;
  double condition = 0.0;  // 1-norm condition number of A
  double residual = 0.0;   // ||Ax - b||_inf / (||A||_inf ||x||_inf + ||b||_inf)
};

namespace detail {

template <std::floating_point T>
struct LuFactors {
  std::vector<T> lu;
  std::vector<std::size_t> perm;
  std::size_t size;

  T& at(std::size_t i, std::size_t j) { return lu[i * size + j]; }
  T at(std::size_t i, std::size_t j) const { return lu[i * size + j]; }

  std::vector<T> solve(std::span<const T> b) const {
    std::vector<T> x(size);
    for (std::size_t i = 0; i < size; ++i) {
      T s = b[perm[i]];
      for (std::size_t j = 0; j < i; ++j) s -= at(i, j) * x[j];
      x[i] = s;
    }
    for (std::size_t i = size; i-- > 0;) {
      T s = x[i];
      for (std::size_t j = i + 1; j < size; ++j) s -= at(i, j) * x[j];
      x[i] = s / at(i, i);
    }
    return x;
  }
};

template <std::floating_point T>
LuFactors<T> factor(std::span<const T> a, std::size_t size) {
  LuFactors<T> f{std::vector<T>(a.begin(), a.end()), std::vector<std::size_t>(size), size};
  std::iota(f.perm.begin(), f.perm.end(), std::size_t{0});

  for (std::size_t k = 0; k < size; ++k) {
    std::size_t pivot = k;
    for (std::size_t i = k + 1; i < size; ++i) {
      if (std::abs(f.at(i, k)) > std::abs(f.at(pivot, k))) pivot = i;
    }
    if (f.at(pivot, k) == T{0} || !std::isfinite(f.at(pivot, k))) {
      std::ostringstream msg;
      msg << "linear system is singular (zero pivot in column " << k << ")";
      throw NumericalError(msg.str());
    }
    if (pivot != k) {
      for (std::size_t j = 0; j < size; ++j) std::swap(f.at(k, j), f.at(pivot, j));
      std::swap(f.perm[k], f.perm[pivot]);
    }
    for (std::size_t i = k + 1; i < size; ++i) {
      const T l = f.at(i, k) / f.at(k, k);
      f.at(i, k) = l;
      for (std::size_t j = k + 1; j < size; ++j) f.at(i, j) -= l * f.at(k, j);
    }
  }
  return f;
}

}  // namespace detail

// Solves the dense size x size system A x = b (A row-major) by Gaussian
// elimination with partial pivoting. Throws NumericalError when A is
// singular or its condition number exceeds kMaxCondition.
template <std::floating_point T>
DenseSolution<T> solve_dense(std::span<const T> a, std::span<const T> b, std::size_t size) {
  if (size == 0 || a.size() != size * size || b.size() != size) {
    throw DomainError("solve_dense: inconsistent system dimensions");
  }
  const detail::LuFactors<T> lu = detail::factor(a, size);

  // Exact inverse column by column; size is tiny.
  T inv_norm1 = 0;
  std::vector<T> unit(size, T{0});
  for (std::size_t j = 0; j < size; ++j) {
    unit[j] = 1;
    T s = 0;
    for (T c : lu.solve(unit)) s += std::abs(c);
    unit[j] = 0;
    inv_norm1 = std::max(inv_norm1, s);
  }
  T a_norm1 = 0;
  for (std::size_t j = 0; j < size; ++j) {
    T col = 0;
    for (std::size_t i = 0; i < size; ++i) col += std::abs(a[i * size + j]);
    a_norm1 = std::max(a_norm1, col);
  }

  DenseSolution<T> out;
  out.condition = static_cast<double>(a_norm1 * inv_norm1);
  if (!std::isfinite(out.condition) || out.condition > kMaxCondition) {
    std::ostringstream msg;
    msg << "linear system is ill-conditioned (1-norm condition " << out.condition << " > "
        << kMaxCondition << ")";
    throw NumericalError(msg.str());
  }
  out.x = lu.solve(b);

  T a_inf = 0;
  T r_inf = 0;
  T x_inf = 0;
  T b_inf = 0;
  for (std::size_t i = 0; i < size; ++i) {
    T row = 0;
    T ax = 0;
    for (std::size_t j = 0; j < size; ++j) {
      row += std::abs(a[i * size + j]);
      ax += a[i * size + j] * out.x[j];
    }
    a_inf = std::max(a_inf, row);
    r_inf = std::max(r_inf, std::abs(ax - b[i]));
    x_inf = std::max(x_inf, std::abs(out.x[i]));
    b_inf = std::max(b_inf, std::abs(b[i]));
  }
  const T scale = a_inf * x_inf + b_inf;
  out.residual = scale > 0 ? static_cast<double>(r_inf / scale) : 0.0;
  return out;
}

}  // namespace reservoir
