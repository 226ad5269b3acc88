// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <pqlap/line_search.hpp>
#include <pqlap/preconditioner.hpp>
#include <pqlap/solver_config.hpp>

#include <cmath>
#include <optional>
#include <vector>

namespace pqlap {

enum class DescentStop { stalled, line_search_exhausted, max_iterations, hook };

template <typename Scalar>
struct DescentTrace {
  Field<Scalar> u;
  Scalar value{0};
  std::vector<Scalar> history; ///< objective after every accepted step, starting point first
  int iterations{0};
  DescentStop stop{DescentStop::max_iterations};
  Scalar epsilon{0}; ///< smoothing level at exit

  /// Met the stagnation rule (a failed line search counts: no decrease is left).
  bool converged() const
  {
    return stop == DescentStop::stalled || stop == DescentStop::line_search_exhausted;
  }
};

template <typename Scalar>
struct DescentOptions {
  Scalar rel_tol{1e-8};
  int patience{25};
  int max_iterations{5000};
  Scalar initial_step{1};
  ArmijoOptions<Scalar> armijo{};
  SmoothingConfig<Scalar> smoothing{};
  bool smoothing_active{false}; ///< some exponent is below 2

  static DescentOptions from(const SolverConfig<Scalar>& cfg, int max_iterations,
                             bool smoothing_active)
  {
    DescentOptions o;
    o.rel_tol = cfg.rel_tol;
    o.patience = cfg.patience;
    o.max_iterations = max_iterations;
    o.initial_step = cfg.initial_step;
    o.armijo = cfg.armijo;
    o.smoothing = cfg.smoothing;
    o.smoothing_active = smoothing_active;
    return o;
  }
};

/// Projected, H1-preconditioned gradient descent with Armijo backtracking.
///
/// `problem` provides
///   std::optional<Scalar> value(const Field&)            (nullopt: infeasible)
///   Field gradient(const Field&, Scalar epsilon)
///   std::optional<Field> project(const Field&)           (nullopt: degenerate)
/// and `hook(u, value, gradient)` may end the run early by returning true.
/// When smoothing is active, stagnation first lowers epsilon by the continuation
/// factor and only stops once epsilon has reached epsilon_min.
template <typename Scalar, typename Problem, typename Hook>
DescentTrace<Scalar> projected_descent(Problem& problem, Field<Scalar> u,
                                       const H1Preconditioner<Scalar>& metric,
                                       const DescentOptions<Scalar>& opt, Hook&& hook)
{
  using std::abs;
  DescentTrace<Scalar> trace;
  Scalar epsilon = opt.smoothing_active ? opt.smoothing.epsilon : Scalar(0);
  const Scalar epsilon_floor = opt.smoothing_active ? opt.smoothing.epsilon_min : Scalar(0);

  const std::optional<Scalar> f0 = problem.value(u);
  trace.u = u;
  trace.value = f0.value_or(std::numeric_limits<Scalar>::infinity());
  trace.history.push_back(trace.value);
  if (!f0) {
    trace.stop = DescentStop::hook;
    trace.epsilon = epsilon;
    return trace;
  }

  auto lower_smoothing = [&] {
    if (epsilon <= epsilon_floor) return false;
    epsilon = std::max(epsilon * opt.smoothing.continuation_factor, epsilon_floor);
    return true;
  };

  Scalar f = *f0;
  Scalar step = opt.initial_step;
  std::size_t window_start = 0;
  Field<Scalar> candidate;
  Field<Scalar> prev_g, prev_pg, prev_d;
  trace.stop = DescentStop::max_iterations;

  for (int it = 0; it < opt.max_iterations; ++it) {
    trace.iterations = it;
    const Field<Scalar> g = problem.gradient(u, epsilon);
    if (hook(u, f, g)) {
      trace.stop = DescentStop::hook;
      break;
    }
    // Preconditioned Polak-Ribiere+ directions, reset to steepest descent
    // whenever the combination is not a descent direction.
    const Field<Scalar> pg = metric.solve(g);
    Field<Scalar> d = -pg;
    if (prev_d.size() == d.size()) {
      const Scalar beta = std::max(Scalar(0), (g - prev_g).dot(pg) / prev_g.dot(prev_pg));
      if (std::isfinite(static_cast<double>(beta)) && beta > 0) {
        Field<Scalar> cg = d + beta * prev_d;
        if (g.dot(cg) < 0) d = std::move(cg);
      }
    }
    const Scalar slope = g.dot(d);

    auto trial = [&](Scalar t) -> std::optional<Scalar> {
      auto projected = problem.project(u + t * d);
      if (!projected) return std::nullopt;
      candidate = std::move(*projected);
      return problem.value(candidate);
    };
    const auto accepted = armijo_quadratic(f, slope, step, trial, opt.armijo);
    if (!accepted) {
      if (prev_d.size() != 0) {
        prev_d.resize(0);
        continue;
      }
      if (lower_smoothing()) {
        window_start = trace.history.size() - 1;
        continue;
      }
      trace.stop = DescentStop::line_search_exhausted;
      break;
    }
    prev_g = g;
    prev_pg = pg;
    prev_d = accepted->step * d;
    // `candidate` holds the last trial, which is the accepted one.
    u = std::move(candidate);
    f = accepted->value;
    trace.history.push_back(f);
    step = accepted->backtracks == 0 && !accepted->refined ? 2 * accepted->step : accepted->step;

    const std::size_t n = trace.history.size() - 1;
    if (n >= window_start + static_cast<std::size_t>(opt.patience)) {
      const Scalar before = trace.history[n - opt.patience];
      if (before - f <= opt.rel_tol * abs(f)) {
        if (lower_smoothing()) {
          window_start = n;
          continue;
        }
        trace.stop = DescentStop::stalled;
        trace.iterations = it + 1;
        break;
      }
    }
    trace.iterations = it + 1;
  }
  trace.u = std::move(u);
  trace.value = f;
  trace.epsilon = epsilon;
  return trace;
}

} // namespace pqlap
