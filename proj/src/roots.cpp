#include "conservolast/roots.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>

#include "conservolast/errors.hpp"

namespace conservolast {

RootResult safeguarded_newton(const std::function<std::pair<double, double>(double)>& fn, double guess,
                              const RootOptions& opt) {
  RootResult res;
  auto eval = [&](double x) {
    ++res.evaluations;
    if (res.evaluations > opt.max_evaluations) throw NonConverged("root search exceeded its evaluation budget");
    return fn(x);
  };

  double x = std::clamp(guess, opt.lo, opt.hi);
  double f = 0.0, df = 0.0;
  std::tie(f, df) = eval(x);
  if (std::abs(f) <= opt.f_tol) return {x, f, res.evaluations};

  // Bracket: a has f < 0, b has f > 0.
  double a = x, b = x;
  double step = opt.initial_step;
  const double dir = f > 0.0 ? -1.0 : 1.0;
  double last_x = x, last_f = f, last_df = df;
  while (true) {
    const double bound = dir < 0.0 ? opt.lo : opt.hi;
    if (last_x == bound) {
      throw NoBracket("derivative keeps its sign on [" + std::to_string(opt.lo) + ", " + std::to_string(opt.hi) + "]");
    }
    double next = last_x + dir * step;
    // Take the Newton step when it points the right way and is shorter.
    if (last_df > 0.0) {
      const double newton = last_x - last_f / last_df;
      if ((newton - last_x) * dir > 0.0 && std::abs(newton - last_x) < step) next = newton + 0.1 * dir * std::abs(newton - last_x);
    }
    next = std::clamp(next, opt.lo, opt.hi);
    auto [fn_next, dfn_next] = eval(next);
    if (std::abs(fn_next) <= opt.f_tol) return {next, fn_next, res.evaluations};
    if ((fn_next > 0.0) != (last_f > 0.0)) {
      if (fn_next > 0.0) {
        a = last_x, b = next;
      } else {
        a = next, b = last_x;
      }
      // Continue Newton from the new point.
      x = next, f = fn_next, df = dfn_next;
      break;
    }
    last_x = next, last_f = fn_next, last_df = dfn_next;
    step *= 2.0;
  }

  // Newton with bisection fallback (rtsafe).
  double dx_old = std::abs(b - a);
  double dx = dx_old;
  while (true) {
    const double lo = std::min(a, b), hi = std::max(a, b);
    const double newton = df != 0.0 ? x - f / df : std::numeric_limits<double>::quiet_NaN();
    if (!std::isfinite(newton) || newton <= lo || newton >= hi || std::abs(2.0 * f) > std::abs(dx_old * df)) {
      dx_old = dx;
      dx = 0.5 * (b - a);
      x = a + dx;
    } else {
      dx_old = dx;
      dx = f / df;
      x = newton;
    }
    std::tie(f, df) = eval(x);
    if (std::abs(f) <= opt.f_tol || std::abs(dx) <= opt.x_tol) return {x, f, res.evaluations};
    if (f > 0.0) {
      b = x;
    } else {
      a = x;
    }
  }
}

}  // namespace conservolast
