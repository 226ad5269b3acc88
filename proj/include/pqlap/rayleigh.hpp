// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <pqlap/cone.hpp>
#include <pqlap/descent.hpp>
#include <pqlap/parallel.hpp>

#include <limits>
#include <vector>

namespace pqlap {

template <typename Scalar>
struct Lambda1Result {
  Scalar lambda1{0};
  Field<Scalar> minimizer; ///< lies in the cone with B = 1
  int restarts_used{0};
  int best_restart{0};
  std::vector<Scalar> quotient_history; ///< accepted steps of the winning restart
  std::vector<Scalar> restart_values;
  std::vector<int> restart_iterations;
  bool converged{false};
};

/// J_q(u) / B(u), or +inf when B(u) = 0.
template <typename Scalar>
Scalar rayleigh_quotient(const Mesh<Scalar>& mesh, const QuotientProblem<Scalar>& prob,
                         const Field<Scalar>& u)
{
  check_field(mesh, u);
  if (u.isZero(0)) raise(ErrorKind::invalid_argument, "Rayleigh quotient of the zero field");
  const Scalar b = weighted_qnorm(mesh, prob, u);
  if (b == 0) return std::numeric_limits<Scalar>::infinity();
  return grad_energy(mesh, u, prob.q) / b;
}

/// (J_q/q + J_p/p) / (B/q): the quotient whose infimum over the cone also equals lambda_1.
template <typename Scalar>
Scalar lambda_tilde_quotient(const Mesh<Scalar>& mesh, const ProblemSpec<Scalar>& spec,
                             const Field<Scalar>& u)
{
  check_field(mesh, u);
  if (u.isZero(0)) raise(ErrorKind::invalid_argument, "quotient of the zero field");
  const auto parts = energy_parts(mesh, spec, u);
  if (parts.b == 0) return std::numeric_limits<Scalar>::infinity();
  return (parts.jq / spec.q + parts.jp / spec.p) / (parts.b / spec.q);
}

namespace detail {

// Descent on the q-energy over the normalized cone slice. The gradient is the
// quotient gradient grad J_q - R grad B (scaled by 1/B), which has no radial
// component, so normalization after the step does not undo it.
template <typename Scalar>
class RayleighDescent {
public:
  RayleighDescent(const Mesh<Scalar>& mesh, const QuotientProblem<Scalar>& prob, Scalar shift_tol)
    : mesh_(mesh), prob_(prob), shift_tol_(shift_tol)
  {}

  std::optional<Scalar> value(const Field<Scalar>& u) const
  {
    const Scalar b = weighted_qnorm(mesh_, prob_, u);
    if (!(b > 0)) return std::nullopt;
    return grad_energy(mesh_, u, prob_.q) / b;
  }

  Field<Scalar> gradient(const Field<Scalar>& u, Scalar epsilon) const
  {
    SmoothingConfig<Scalar> s = SmoothingConfig<Scalar>::none();
    s.epsilon = epsilon;
    const Scalar b = weighted_qnorm(mesh_, prob_, u);
    const Scalar r = grad_energy(mesh_, u, prob_.q) / b;
    return (grad_grad_energy(mesh_, u, prob_.q, s) - r * grad_weighted_qnorm(mesh_, prob_, u)) / b;
  }

  std::optional<Field<Scalar>> project(const Field<Scalar>& v) const
  {
    const auto shifted = shift_to_cone(mesh_, prob_, v, shift_tol_);
    if (!(weighted_qnorm(mesh_, prob_, shifted.shifted) > 0)) return std::nullopt;
    return normalize_to_C1(mesh_, prob_, shifted.shifted);
  }

private:
  const Mesh<Scalar>& mesh_;
  const QuotientProblem<Scalar>& prob_;
  Scalar shift_tol_;
};

template <typename Scalar, typename Hook>
DescentTrace<Scalar> minimize_quotient(const Mesh<Scalar>& mesh,
                                       const QuotientProblem<Scalar>& prob, Field<Scalar> start,
                                       const H1Preconditioner<Scalar>& metric,
                                       const SolverConfig<Scalar>& cfg, Hook&& hook)
{
  RayleighDescent<Scalar> problem(mesh, prob, cfg.shift_tol);
  const auto opt = DescentOptions<Scalar>::from(cfg, cfg.lambda1_max_iterations, prob.q < 2);
  return projected_descent(problem, std::move(start), metric, opt, std::forward<Hook>(hook));
}

} // namespace detail

/// Discrete lambda_1: minimum of the q-Rayleigh quotient over the cone, from
/// cfg.n_restarts seeded starting points. Only q and the weights are read.
template <typename Scalar>
Lambda1Result<Scalar> compute_lambda1(const Mesh<Scalar>& mesh,
                                      const QuotientProblem<Scalar>& prob,
                                      const SolverConfig<Scalar>& cfg)
{
  validate_weights(mesh, prob);
  cfg.validate();
  const H1Preconditioner<Scalar> metric(mesh);

  struct Run {
    std::optional<DescentTrace<Scalar>> trace;
  };
  auto runs = run_indexed(cfg.n_restarts, cfg.threads, [&](int i) {
    Run run;
    Field<Scalar> start;
    try {
      start = random_cone_point(mesh, prob, restart_seed(cfg.seed, i), cfg.shift_tol);
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::generation_failure) throw;
      return run;
    }
    run.trace = detail::minimize_quotient(mesh, prob, std::move(start), metric, cfg,
                                          [](const auto&, Scalar, const auto&) { return false; });
    return run;
  });

  Lambda1Result<Scalar> result;
  result.restarts_used = cfg.n_restarts;
  int best = -1;
  for (int i = 0; i < cfg.n_restarts; ++i) {
    const auto& trace = runs[i].trace;
    result.restart_values.push_back(trace ? trace->value : std::numeric_limits<Scalar>::infinity());
    result.restart_iterations.push_back(trace ? trace->iterations : 0);
    if (!trace) continue;
    result.converged = result.converged || trace->converged();
    // Strictly smaller (beyond 1e-12 relative) wins; ties keep the lower index.
    if (best < 0 || trace->value < runs[best].trace->value * (1 - Scalar(1e-12))) best = i;
  }
  if (best < 0) raise(ErrorKind::no_feasible_start, "every restart failed to produce a cone point");

  auto& winner = *runs[best].trace;
  result.best_restart = best;
  result.minimizer = std::move(winner.u);
  result.quotient_history = std::move(winner.history);
  result.lambda1 = rayleigh_quotient(mesh, prob, result.minimizer);
  return result;
}

} // namespace pqlap
