// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <optional>

namespace pqlap {

template <typename Scalar>
struct ArmijoOptions {
  Scalar c1{1e-4};     ///< sufficient-decrease slope factor
  Scalar shrink{0.5};  ///< backtracking ratio
  int max_backtracks{60};
};

template <typename Scalar>
struct ArmijoStep {
  Scalar step;
  Scalar value;
  int backtracks;
  bool refined{false}; ///< the quadratic-model step replaced the Armijo step
};

/// Backtracking line search on f(step) <= f0 + c1 * step * slope.
///
/// `trial(step)` evaluates the objective at the candidate for that step and
/// returns nullopt when the candidate is infeasible; infeasible trials are
/// treated like failed decreases. The last call to `trial` is always the
/// returned step.
template <typename Scalar, typename Trial>
std::optional<ArmijoStep<Scalar>> armijo_backtrack(Scalar f0, Scalar slope, Scalar initial_step,
                                                   Trial&& trial, const ArmijoOptions<Scalar>& opt)
{
  if (!(slope < 0)) return std::nullopt;
  Scalar step = initial_step;
  for (int k = 0; k <= opt.max_backtracks; ++k, step *= opt.shrink) {
    const std::optional<Scalar> f = trial(step);
    if (f && std::isfinite(static_cast<double>(*f)) && *f <= f0 + opt.c1 * step * slope &&
        *f < f0)
      return ArmijoStep<Scalar>{step, *f, k};
  }
  return std::nullopt;
}

/// Armijo backtracking followed by one trial at the minimizer of the quadratic
/// through f0, slope and the accepted point, kept only if it lowers the value
/// further. Without it a step that merely satisfies Armijo can flip the stiff
/// modes back and forth indefinitely.
template <typename Scalar, typename Trial>
std::optional<ArmijoStep<Scalar>> armijo_quadratic(Scalar f0, Scalar slope, Scalar initial_step,
                                                   Trial&& trial, const ArmijoOptions<Scalar>& opt)
{
  auto accepted = armijo_backtrack(f0, slope, initial_step, trial, opt);
  if (!accepted) return accepted;
  const Scalar t = accepted->step;
  const Scalar curvature = accepted->value - f0 - slope * t;
  if (!(curvature > 0)) return accepted;
  const Scalar model_step = -slope * t * t / (2 * curvature);
  if (!(model_step > Scalar(0.1) * t && model_step < Scalar(0.95) * t)) return accepted;
  const std::optional<Scalar> f = trial(model_step);
  if (f && std::isfinite(static_cast<double>(*f)) && *f < accepted->value)
    return ArmijoStep<Scalar>{model_step, *f, accepted->backtracks, true};
  // Re-evaluate the Armijo point so the caller's cached candidate matches it.
  trial(t);
  return accepted;
}

} // namespace pqlap
