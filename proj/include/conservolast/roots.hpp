#pragma once

#include <functional>
#include <utility>

namespace conservolast {

struct RootResult {
  double x = 0.0;
  double f = 0.0;
  int evaluations = 0;
};

struct RootOptions {
  double lo = 0.3;
  double hi = 2.5;
  double f_tol = 1e-12;
  double x_tol = 1e-13;
  double initial_step = 0.05;
  int max_evaluations = 200;
};

/// Root of an increasing-through-zero scalar function on [lo, hi], given its
/// value and derivative. Walks outward from the guess with doubling steps to
/// bracket the root, then runs Newton steps that fall back to bisection
/// whenever they leave the bracket or stall. Throws NoBracket when the sign
/// does not change before a bound is reached.
RootResult safeguarded_newton(const std::function<std::pair<double, double>(double)>& fn, double guess,
                              const RootOptions& options);

}  // namespace conservolast
