// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <pqlap/rayleigh.hpp>

#include <Eigen/SparseLU>

#include <cmath>
#include <limits>
#include <optional>
#include <string_view>

namespace pqlap {

/// direct: minimize J_lambda over the cone (p > q).
/// nehari: minimize J_lambda over the Nehari set through the scaling t(u) (p < q).
enum class Regime { direct, nehari };

enum class SolveStatus { converged, infeasible, not_found, not_converged };

inline std::string_view to_string(Regime r) { return r == Regime::direct ? "direct" : "nehari"; }

inline std::string_view to_string(SolveStatus s)
{
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::not_found: return "not_found";
    case SolveStatus::not_converged: return "not_converged";
  }
  return "unknown";
}

template <typename Scalar>
struct EigenResult {
  static constexpr Scalar nan = std::numeric_limits<Scalar>::quiet_NaN();

  Scalar lambda{0};
  Field<Scalar> eigenfunction;
  Scalar weak_residual{nan};       ///< |grad J_lambda| / |gradient-term vector|
  Scalar constraint_residual{nan}; ///< |I(u)|
  Scalar energy{nan};              ///< J_lambda(u)
  std::optional<Scalar> nehari_gap; ///< |L_lambda(u)|, nehari regime only
  Regime regime{Regime::direct};
  SolveStatus status{SolveStatus::not_found};
  bool converged{false};

  EnergyParts<Scalar> parts{nan, nan, nan};
  int restarts_used{0};
  int restarts_feasible{0}; ///< restarts that reached a candidate (negative energy / feasible direction)
  int best_restart{-1};
  int descent_iterations{0};
  int newton_iterations{0};
};

/// t(u) = (J_p / (lambda B - J_q))^(1/(q-p)); t(u) u lies on the Nehari set.
template <typename Scalar>
Scalar nehari_scale(const Mesh<Scalar>& mesh, const ProblemSpec<Scalar>& spec, Scalar lambda,
                    const Field<Scalar>& u)
{
  using std::pow;
  if (!(spec.p < spec.q)) raise(ErrorKind::invalid_argument, "Nehari scaling needs p < q");
  check_field(mesh, u);
  if (u.isZero(0)) raise(ErrorKind::invalid_argument, "Nehari scaling of the zero field");
  const auto parts = energy_parts(mesh, spec, u);
  if (parts.jp == 0)
    raise(ErrorKind::invalid_argument, "constant fields are not on the Nehari set");
  const Scalar denom = lambda * parts.b - parts.jq;
  if (!(denom > 0))
    raise(ErrorKind::infeasible_direction, "lambda B(u) - J_q(u) is not positive");
  return pow(parts.jp / denom, Scalar(1) / (spec.q - spec.p));
}

/// Phi(u) = ((q-p)/(pq)) t(u)^p J_p(u) = J_lambda(t(u) u); invariant under positive scaling.
template <typename Scalar>
Scalar reduced_nehari_energy(const Mesh<Scalar>& mesh, const ProblemSpec<Scalar>& spec,
                             Scalar lambda, const Field<Scalar>& u)
{
  using std::pow;
  const Scalar t = nehari_scale(mesh, spec, lambda, u);
  return (spec.q - spec.p) / (spec.p * spec.q) * pow(t, spec.p) * grad_energy(mesh, u, spec.p);
}

namespace detail {

// Gradient-term vector and full gradient with the continuous extension at zero gradients.
template <typename Scalar>
std::pair<Field<Scalar>, Field<Scalar>> residual_vectors(const Mesh<Scalar>& mesh,
                                                         const ProblemSpec<Scalar>& spec,
                                                         Scalar lambda, const Field<Scalar>& u)
{
  Field<Scalar> flux =
      assemble_flux(mesh, spec, u, Scalar(0), EnergyMode::full, ZeroGradientPolicy::extend);
  Field<Scalar> g = flux - lambda * assemble_source(nodal_weights(mesh, spec.quotient_part()), u, spec.q);
  return {std::move(flux), std::move(g)};
}

template <typename Scalar>
Scalar relative_residual(const Mesh<Scalar>& mesh, const ProblemSpec<Scalar>& spec, Scalar lambda,
                         const Field<Scalar>& u)
{
  const auto [flux, g] = residual_vectors(mesh, spec, lambda, u);
  const Scalar scale = flux.norm();
  const Scalar r = g.norm();
  if (scale == 0) return r == 0 ? Scalar(0) : std::numeric_limits<Scalar>::infinity();
  return r / scale;
}

template <typename Scalar>
Scalar smoothing_epsilon(const ProblemSpec<Scalar>& spec, Scalar epsilon)
{
  return (spec.p < 2 || spec.q < 2) ? epsilon : Scalar(0);
}

// Newton iteration on the discrete weak form grad J_lambda(u) = 0, with
// backtracking on the residual norm. Stops when no step reduces the residual.
template <typename Scalar>
std::pair<Field<Scalar>, int> newton_polish(const Mesh<Scalar>& mesh,
                                            const ProblemSpec<Scalar>& spec, Scalar lambda,
                                            Field<Scalar> u, const SolverConfig<Scalar>& cfg)
{
  Field<Scalar> g = residual_vectors(mesh, spec, lambda, u).second;
  Scalar res = g.norm();
  Eigen::SparseLU<Eigen::SparseMatrix<Scalar>> lu;
  int it = 0;
  for (; it < cfg.newton_max_iterations && res > 0; ++it) {
    Eigen::SparseMatrix<Scalar> H =
        hessian_J_lambda(mesh, spec, lambda, u, cfg.smoothing.epsilon_min, Scalar(1e-12));
    H.makeCompressed();
    lu.compute(H);
    if (lu.info() != Eigen::Success) break;
    const Field<Scalar> delta = lu.solve(-g);
    if (!delta.allFinite()) break;
    bool improved = false;
    for (Scalar alpha = 1; alpha > Scalar(1e-6); alpha /= 2) {
      Field<Scalar> trial = u + alpha * delta;
      Field<Scalar> g_trial = residual_vectors(mesh, spec, lambda, trial).second;
      const Scalar r_trial = g_trial.norm();
      if (r_trial <= (1 - Scalar(1e-4) * alpha) * res) {
        u = std::move(trial);
        g = std::move(g_trial);
        res = r_trial;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  return {std::move(u), it};
}

template <typename Scalar>
struct Attempt {
  std::optional<EigenResult<Scalar>> result; // set when a candidate eigenfunction was reached
  int descent_iterations{0};
};

// Fills diagnostics for a candidate and decides whether it is an accepted eigenpair.
template <typename Scalar>
EigenResult<Scalar> assess(const Mesh<Scalar>& mesh, const ProblemSpec<Scalar>& spec,
                           Scalar lambda, Field<Scalar> u, Regime regime,
                           const SolverConfig<Scalar>& cfg)
{
  using std::abs;
  using std::pow;
  EigenResult<Scalar> r;
  r.lambda = lambda;
  r.regime = regime;
  r.parts = energy_parts(mesh, spec, u);
  r.energy = r.parts.jp / spec.p + r.parts.jq / spec.q - lambda / spec.q * r.parts.b;
  r.weak_residual = relative_residual(mesh, spec, lambda, u);
  r.constraint_residual = abs(constraint_value(mesh, spec.quotient_part(), u));
  const Scalar gap = -r.parts.jp - r.parts.jq + lambda * r.parts.b;
  if (regime == Regime::nehari) r.nehari_gap = abs(gap);

  const Scalar max_abs = u.cwiseAbs().maxCoeff();
  const Scalar weight_total = nodal_weights(mesh, spec.quotient_part()).sum();
  const bool nonconstant = (u.maxCoeff() - u.minCoeff()) > Scalar(1e-8) * max_abs;
  const bool in_cone =
      r.constraint_residual <= cfg.shift_tol * weight_total * pow(max_abs, spec.q - 1);
  bool ok = nonconstant && in_cone && r.weak_residual <= cfg.residual_tol;
  if (regime == Regime::direct) {
    ok = ok && r.energy < 0;
  } else {
    const Scalar reduced = (spec.q - spec.p) / (spec.p * spec.q) * r.parts.jp;
    ok = ok && r.energy > 0 && abs(r.energy - reduced) <= Scalar(1e-10) * abs(r.energy) &&
         abs(gap) <= Scalar(1e-9) * (r.parts.jp + r.parts.jq);
  }
  r.eigenfunction = std::move(u);
  r.status = ok ? SolveStatus::converged : SolveStatus::not_converged;
  r.converged = ok;
  return r;
}

template <typename Scalar>
class DirectDescent {
public:
  DirectDescent(const Mesh<Scalar>& mesh, const ProblemSpec<Scalar>& spec, Scalar lambda,
                Scalar shift_tol)
    : mesh_(mesh), spec_(spec), lambda_(lambda), shift_tol_(shift_tol)
  {}

  std::optional<Scalar> value(const Field<Scalar>& u) const
  {
    return J_lambda(mesh_, spec_, lambda_, u);
  }

  Field<Scalar> gradient(const Field<Scalar>& u, Scalar epsilon) const
  {
    const Field<Scalar> w = nodal_weights(mesh_, spec_.quotient_part());
    return assemble_flux(mesh_, spec_, u, epsilon, EnergyMode::full, ZeroGradientPolicy::extend) -
           lambda_ * assemble_source(w, u, spec_.q);
  }

  std::optional<Field<Scalar>> project(const Field<Scalar>& v) const
  {
    return shift_to_cone(mesh_, spec_.quotient_part(), v, shift_tol_).shifted;
  }

private:
  const Mesh<Scalar>& mesh_;
  const ProblemSpec<Scalar>& spec_;
  Scalar lambda_;
  Scalar shift_tol_;
};

// Descent on Phi over normalized cone directions. Phi = c J_p^(q/(q-p)) D^(-p/(q-p))
// with D = lambda B - J_q, so grad Phi = Phi (q/(q-p) grad J_p / J_p - p/(q-p) grad D / D).
template <typename Scalar>
class NehariDescent {
public:
  NehariDescent(const Mesh<Scalar>& mesh, const ProblemSpec<Scalar>& spec, Scalar lambda,
                const SolverConfig<Scalar>& cfg)
    : mesh_(mesh), spec_(spec), lambda_(lambda), cfg_(cfg)
  {}

  std::optional<Scalar> value(const Field<Scalar>& u) const
  {
    using std::pow;
    const auto parts = energy_parts(mesh_, spec_, u);
    const Scalar d = lambda_ * parts.b - parts.jq;
    if (!(parts.jp > 0) || !(d > cfg_.feasibility_margin * lambda_ * parts.b)) return std::nullopt;
    const Scalar t = pow(parts.jp / d, Scalar(1) / (spec_.q - spec_.p));
    return (spec_.q - spec_.p) / (spec_.p * spec_.q) * pow(t, spec_.p) * parts.jp;
  }

  Field<Scalar> gradient(const Field<Scalar>& u, Scalar epsilon) const
  {
    SmoothingConfig<Scalar> s = SmoothingConfig<Scalar>::none();
    s.epsilon = epsilon;
    const auto& quot = spec_.quotient_part();
    const auto parts = energy_parts(mesh_, spec_, u);
    const Scalar d = lambda_ * parts.b - parts.jq;
    const Scalar phi = *value(u);
    const Scalar k = spec_.q - spec_.p;
    const Field<Scalar> grad_d =
        lambda_ * grad_weighted_qnorm(mesh_, quot, u) - grad_grad_energy(mesh_, u, spec_.q, s);
    return phi * ((spec_.q / k / parts.jp) * grad_grad_energy(mesh_, u, spec_.p, s) -
                  (spec_.p / k / d) * grad_d);
  }

  std::optional<Field<Scalar>> project(const Field<Scalar>& v) const
  {
    const auto& quot = spec_.quotient_part();
    const auto shifted = shift_to_cone(mesh_, quot, v, cfg_.shift_tol);
    if (!(weighted_qnorm(mesh_, quot, shifted.shifted) > 0)) return std::nullopt;
    return normalize_to_C1(mesh_, quot, shifted.shifted);
  }

  // t(u) u, or nullopt when the direction is infeasible.
  std::optional<Field<Scalar>> lift(const Field<Scalar>& u) const
  {
    if (!value(u)) return std::nullopt;
    return nehari_scale(mesh_, spec_, lambda_, u) * u;
  }

private:
  const Mesh<Scalar>& mesh_;
  const ProblemSpec<Scalar>& spec_;
  Scalar lambda_;
  const SolverConfig<Scalar>& cfg_;
};

template <typename Scalar>
EigenResult<Scalar> merge_attempts(std::vector<Attempt<Scalar>>& attempts, Scalar lambda,
                                   Regime regime, Index n_nodes)
{
  int best = -1;
  int best_any = -1;
  int feasible = 0;
  for (int i = 0; i < static_cast<int>(attempts.size()); ++i) {
    const auto& r = attempts[i].result;
    if (!r) continue;
    ++feasible;
    if (best_any < 0 || r->energy < attempts[best_any].result->energy) best_any = i;
    if (r->converged && (best < 0 || r->energy < attempts[best].result->energy)) best = i;
  }
  EigenResult<Scalar> out;
  const int pick = best >= 0 ? best : best_any;
  if (pick >= 0) {
    out = std::move(*attempts[pick].result);
    out.best_restart = pick;
    out.descent_iterations = attempts[pick].descent_iterations;
  } else {
    out.lambda = lambda;
    out.regime = regime;
    out.eigenfunction = Field<Scalar>::Zero(n_nodes);
    out.status = regime == Regime::nehari ? SolveStatus::infeasible : SolveStatus::not_found;
    out.converged = false;
  }
  out.restarts_used = static_cast<int>(attempts.size());
  out.restarts_feasible = feasible;
  return out;
}

} // namespace detail

/// Eigenfunction for p > q: projected descent of J_lambda over the cone from
/// seeded starts, finished by Newton on the weak form. Restarts that never reach
/// negative energy (they collapse onto 0) yield no candidate.
template <typename Scalar>
EigenResult<Scalar> solve_direct(const Mesh<Scalar>& mesh, const ProblemSpec<Scalar>& spec,
                                 Scalar lambda, const SolverConfig<Scalar>& cfg)
{
  validate_problem(mesh, spec);
  cfg.validate();
  if (!(spec.p > spec.q)) raise(ErrorKind::invalid_argument, "direct route needs p > q");
  if (!(lambda >= 0)) raise(ErrorKind::invalid_argument, "lambda must be nonnegative");
  const H1Preconditioner<Scalar> metric(mesh);
  const auto& quot = spec.quotient_part();

  auto attempts = run_indexed(cfg.n_restarts, cfg.threads, [&](int i) {
    detail::Attempt<Scalar> attempt;
    const Field<Scalar> start = random_cone_point(mesh, quot, restart_seed(cfg.seed, i), cfg.shift_tol);
    const Scalar start_norm = start.cwiseAbs().maxCoeff();
    detail::DirectDescent<Scalar> problem(mesh, spec, lambda, cfg.shift_tol);
    bool collapsed = false;
    auto hook = [&](const Field<Scalar>& u, Scalar f, const Field<Scalar>& g) {
      if (u.cwiseAbs().maxCoeff() < cfg.collapse_ratio * start_norm) {
        collapsed = true;
        return true;
      }
      if (!(f < 0)) return false;
      const Scalar scale = detail::assemble_flux(mesh, spec, u, Scalar(0), EnergyMode::full,
                                                 ZeroGradientPolicy::extend).norm();
      return scale > 0 && g.norm() <= cfg.handoff_tol * scale;
    };
    const auto opt = DescentOptions<Scalar>::from(cfg, cfg.max_iterations, spec.p < 2 || spec.q < 2);
    auto trace = projected_descent(problem, start, metric, opt, hook);
    attempt.descent_iterations = trace.iterations;
    if (collapsed || !(trace.value < 0)) return attempt;

    auto [polished, newton_its] = detail::newton_polish(mesh, spec, lambda, std::move(trace.u), cfg);
    Field<Scalar> u = shift_to_cone(mesh, quot, polished, cfg.shift_tol).shifted;
    attempt.result = detail::assess(mesh, spec, lambda, std::move(u), Regime::direct, cfg);
    attempt.result->newton_iterations = newton_its;
    return attempt;
  });
  return detail::merge_attempts(attempts, lambda, Regime::direct, mesh.num_nodes());
}

/// Eigenfunction for p < q: minimizes Phi(u) = J_lambda(t(u) u) over feasible
/// cone directions (lambda B > J_q), then Newton on the weak form and a final
/// rescaling onto the Nehari set. A restart whose Rayleigh descent cannot get
/// below lambda has no feasible direction.
template <typename Scalar>
EigenResult<Scalar> solve_nehari(const Mesh<Scalar>& mesh, const ProblemSpec<Scalar>& spec,
                                 Scalar lambda, const SolverConfig<Scalar>& cfg)
{
  validate_problem(mesh, spec);
  cfg.validate();
  if (!(spec.p < spec.q)) raise(ErrorKind::invalid_argument, "Nehari route needs p < q");
  if (!(lambda >= 0)) raise(ErrorKind::invalid_argument, "lambda must be nonnegative");
  const H1Preconditioner<Scalar> metric(mesh);
  const auto& quot = spec.quotient_part();
  const Scalar feasible_below = lambda * (1 - cfg.feasibility_margin);

  auto attempts = run_indexed(cfg.n_restarts, cfg.threads, [&](int i) {
    detail::Attempt<Scalar> attempt;
    Field<Scalar> u = random_cone_point(mesh, quot, restart_seed(cfg.seed, i), cfg.shift_tol);
    if (!(rayleigh_quotient(mesh, quot, u) < feasible_below)) {
      auto trace = detail::minimize_quotient(
          mesh, quot, std::move(u), metric, cfg,
          [&](const auto&, Scalar f, const auto&) { return f < feasible_below; });
      attempt.descent_iterations = trace.iterations;
      if (!(trace.value < feasible_below)) return attempt;
      u = std::move(trace.u);
    }

    detail::NehariDescent<Scalar> problem(mesh, spec, lambda, cfg);
    auto hook = [&](const Field<Scalar>& v, Scalar, const Field<Scalar>&) {
      const auto z = problem.lift(v);
      return z && detail::relative_residual(mesh, spec, lambda, *z) <= cfg.handoff_tol;
    };
    const auto opt = DescentOptions<Scalar>::from(cfg, cfg.max_iterations, spec.p < 2 || spec.q < 2);
    auto trace = projected_descent(problem, std::move(u), metric, opt, hook);
    attempt.descent_iterations += trace.iterations;
    const auto lifted = problem.lift(trace.u);
    if (!lifted) return attempt;

    auto [polished, newton_its] = detail::newton_polish(mesh, spec, lambda, *lifted, cfg);
    Field<Scalar> z = shift_to_cone(mesh, quot, polished, cfg.shift_tol).shifted;
    try {
      z *= nehari_scale(mesh, spec, lambda, z);
    } catch (const Error&) {
      z = *lifted; // Newton left the feasible region; keep the descent result
    }
    attempt.result = detail::assess(mesh, spec, lambda, std::move(z), Regime::nehari, cfg);
    attempt.result->newton_iterations = newton_its;
    return attempt;
  });
  return detail::merge_attempts(attempts, lambda, Regime::nehari, mesh.num_nodes());
}

/// Dispatch: lambda = 0 gives the constant eigenfunction; otherwise the direct
/// route for p > q and the Nehari route for p < q.
template <typename Scalar>
EigenResult<Scalar> solve(const Mesh<Scalar>& mesh, const ProblemSpec<Scalar>& spec,
                          Scalar lambda, const SolverConfig<Scalar>& cfg)
{
  if (spec.p == spec.q)
    raise(ErrorKind::unsupported, "p = q is excluded by hypothesis h_pq (homogeneous operator)");
  validate_problem(mesh, spec);
  if (!(lambda >= 0) || !std::isfinite(static_cast<double>(lambda)))
    raise(ErrorKind::invalid_argument, "lambda must be a finite nonnegative number");
  const Regime regime = spec.p > spec.q ? Regime::direct : Regime::nehari;
  if (lambda == 0) {
    EigenResult<Scalar> r;
    r.lambda = 0;
    r.regime = regime;
    r.eigenfunction = Field<Scalar>::Ones(mesh.num_nodes());
    r.parts = energy_parts(mesh, spec, r.eigenfunction);
    r.energy = 0;
    r.weak_residual = detail::relative_residual(mesh, spec, Scalar(0), r.eigenfunction);
    r.constraint_residual = std::abs(constraint_value(mesh, spec.quotient_part(), r.eigenfunction));
    r.status = SolveStatus::converged;
    r.converged = true;
    return r;
  }
  return regime == Regime::direct ? solve_direct(mesh, spec, lambda, cfg)
                                  : solve_nehari(mesh, spec, lambda, cfg);
}

} // namespace pqlap
