// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <pqlap/eigensolver.hpp>

#include <cmath>
#include <cstring>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace pqlap {

enum class CheckStatus { pass, fail, skip };

inline std::string_view to_string(CheckStatus s)
{
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::skip: return "skip";
  }
  return "unknown";
}

struct Check {
  std::string name;
  CheckStatus status{CheckStatus::skip};
  std::optional<double> measured;
  std::optional<double> tolerance;
  std::string detail;
};

struct VerificationReport {
  std::vector<Check> checks;

  /// True iff no check failed.
  bool overall() const
  {
    for (const auto& c : checks)
      if (c.status == CheckStatus::fail) return false;
    return true;
  }

  void add(std::string name, bool ok, std::optional<double> measured = {},
           std::optional<double> tolerance = {}, std::string detail = {})
  {
    checks.push_back({std::move(name), ok ? CheckStatus::pass : CheckStatus::fail, measured,
                      tolerance, std::move(detail)});
  }

  void skip(std::string name, std::string detail)
  {
    checks.push_back({std::move(name), CheckStatus::skip, {}, {}, std::move(detail)});
  }

  void append(const VerificationReport& other)
  {
    checks.insert(checks.end(), other.checks.begin(), other.checks.end());
  }
};

/// Multipliers of the computed lambda_1 probed by the spectrum check, and the
/// decades used for the lambda-tilde limit.
struct VerifyOptions {
  std::vector<double> below{0.25, 0.5, 0.9};
  std::vector<double> above{1.1, 2.0, 10.0};
  int tilde_decades{6};
  double gap_ratio_tolerance{0.2};
  double p_success_factor{1.2};
  double p_infeasible_factor{0.8};
};

/// Weak-form defect r_v = <A(u) - lambda F(u), phi_v> assembled term by term,
/// independently of the functional gradients. Also returns the left side A.
template <typename Scalar>
std::pair<Field<Scalar>, Field<Scalar>> weak_form_defect(const Mesh<Scalar>& mesh,
                                                         const ProblemSpec<Scalar>& spec,
                                                         Scalar lambda, const Field<Scalar>& u)
{
  using std::abs;
  using std::pow;
  using std::sqrt;
  check_field(mesh, u);
  const int dim = mesh.dim();
  const Index nv = mesh.num_nodes();
  Field<Scalar> lhs = Field<Scalar>::Zero(nv);
  Field<Scalar> rhs = Field<Scalar>::Zero(nv);

  for (Index e = 0; e < mesh.num_elements(); ++e) {
    Scalar grad[2] = {0, 0};
    for (int i = 0; i <= dim; ++i) {
      const auto phi = mesh.basis_gradient(e, i);
      for (int k = 0; k < dim; ++k) grad[k] += u[mesh.element_node(e, i)] * phi[k];
    }
    Scalar norm = 0;
    for (int k = 0; k < dim; ++k) norm += grad[k] * grad[k];
    norm = sqrt(norm);
    // (|G|^(p-2) + |G|^(q-2)) G, written as (|G|^(p-1) + |G|^(q-1)) G/|G|; zero at G = 0.
    if (norm == 0) continue;
    const Scalar amplitude = pow(norm, spec.p - 1) + pow(norm, spec.q - 1);
    for (int i = 0; i <= dim; ++i) {
      const auto phi = mesh.basis_gradient(e, i);
      Scalar dot = 0;
      for (int k = 0; k < dim; ++k) dot += grad[k] / norm * phi[k];
      lhs[mesh.element_node(e, i)] += mesh.element_measures()[e] * amplitude * dot;
    }
  }

  // Lumped right side: a|K|/(dim+1) on element vertices and b|F|/dim on facet vertices.
  auto source_term = [&](Index v, Scalar weight) {
    const Scalar x = u[v];
    if (x != 0) rhs[v] += weight * (x > 0 ? Scalar(1) : Scalar(-1)) * pow(abs(x), spec.q - 1);
  };
  for (Index e = 0; e < mesh.num_elements(); ++e)
    for (int i = 0; i <= dim; ++i)
      source_term(mesh.element_node(e, i),
                  spec.a[e] * mesh.element_measures()[e] / Scalar(dim + 1));
  for (Index f = 0; f < mesh.num_facets(); ++f)
    for (int i = 0; i < dim; ++i)
      source_term(mesh.facet_node(f, i), spec.b[f] * mesh.facet_measures()[f] / Scalar(dim));

  Field<Scalar> defect = lhs - lambda * rhs;
  return {std::move(defect), std::move(lhs)};
}

/// |defect| / |A(u)|; 0 when both vanish.
template <typename Scalar>
Scalar weak_form_residual(const Mesh<Scalar>& mesh, const ProblemSpec<Scalar>& spec,
                          Scalar lambda, const Field<Scalar>& u)
{
  if (u.isZero(0)) raise(ErrorKind::invalid_argument, "weak-form residual of the zero field");
  const auto [defect, lhs] = weak_form_defect(mesh, spec, lambda, u);
  const Scalar scale = lhs.norm();
  const Scalar r = defect.norm();
  if (scale == 0) return r == 0 ? Scalar(0) : std::numeric_limits<Scalar>::infinity();
  return r / scale;
}

namespace detail {

inline std::string format_factor(double f)
{
  std::ostringstream os;
  os << f;
  return os.str();
}

template <typename Scalar>
void check_eigenpair(VerificationReport& report, const std::string& tag,
                     const Mesh<Scalar>& mesh, const ProblemSpec<Scalar>& spec,
                     const EigenResult<Scalar>& r, const SolverConfig<Scalar>& cfg)
{
  using std::abs;
  const auto& parts = r.parts;
  const Scalar scale = parts.jp + parts.jq;
  const Scalar energy_gap = abs(parts.jp + parts.jq - r.lambda * parts.b);
  report.add("energy_identity_" + tag, energy_gap <= Scalar(1e-9) * scale,
             static_cast<double>(energy_gap / scale), 1e-9);
  const Scalar oracle = weak_form_residual(mesh, spec, r.lambda, r.eigenfunction);
  report.add("weak_form_oracle_" + tag, oracle <= cfg.residual_tol, static_cast<double>(oracle),
             static_cast<double>(cfg.residual_tol));
  report.add("constraint_" + tag, r.constraint_residual <= cfg.shift_tol,
             static_cast<double>(r.constraint_residual), static_cast<double>(cfg.shift_tol));
  const Scalar spread = r.eigenfunction.maxCoeff() - r.eigenfunction.minCoeff();
  const Scalar max_abs = r.eigenfunction.cwiseAbs().maxCoeff();
  report.add("nonconstant_" + tag, spread > Scalar(1e-8) * max_abs,
             static_cast<double>(spread / max_abs), 1e-8);
  if (r.regime == Regime::nehari) {
    const Scalar reduced = (spec.q - spec.p) / (spec.p * spec.q) * parts.jp;
    const Scalar rel = abs(r.energy - reduced) / abs(r.energy);
    report.add("nehari_energy_" + tag, r.energy > 0 && rel <= Scalar(1e-10),
               static_cast<double>(rel), 1e-10);
    report.add("nehari_gap_" + tag, *r.nehari_gap <= Scalar(1e-9) * scale,
               static_cast<double>(*r.nehari_gap / scale), 1e-9);
  } else {
    report.add("negative_energy_" + tag, r.energy < 0, static_cast<double>(r.energy), 0.0);
  }
}

} // namespace detail

/// Probes solve below and above the computed lambda_1 and at lambda = 0.
/// Failures, including invalid problems, are recorded rather than thrown.
template <typename Scalar>
VerificationReport check_spectrum_structure(const Mesh<Scalar>& mesh,
                                            const ProblemSpec<Scalar>& spec,
                                            const SolverConfig<Scalar>& cfg,
                                            const VerifyOptions& opt = {})
{
  VerificationReport report;
  try {
    if (spec.p == spec.q)
      raise(ErrorKind::unsupported, "p = q is excluded by hypothesis h_pq");
    validate_problem(mesh, spec);
  } catch (const Error& err) {
    report.add("problem_valid", false, {}, {},
               std::string(to_string(err.kind())) + ": " + err.what());
    return report;
  }
  report.add("problem_valid", true);

  const auto l1 = compute_lambda1(mesh, spec.quotient_part(), cfg);
  const Scalar lambda1 = l1.lambda1;
  report.add("lambda1_converged", l1.converged, static_cast<double>(lambda1));

  {
    const auto r = solve(mesh, spec, Scalar(0), cfg);
    const bool constant = (r.eigenfunction.array() == r.eigenfunction[0]).all() &&
                          r.eigenfunction[0] != 0;
    report.add("lambda_zero_constant", r.converged && constant && r.weak_residual == 0,
               static_cast<double>(r.weak_residual), 0.0);
  }
  for (double f : opt.below) {
    const auto r = solve(mesh, spec, static_cast<Scalar>(f) * lambda1, cfg);
    const bool rejected = r.status == SolveStatus::infeasible || r.status == SolveStatus::not_found;
    report.add("below_threshold_" + detail::format_factor(f), rejected,
               static_cast<double>(f * lambda1), {}, std::string(to_string(r.status)));
  }
  for (double f : opt.above) {
    const auto r = solve(mesh, spec, static_cast<Scalar>(f) * lambda1, cfg);
    const std::string tag = detail::format_factor(f);
    report.add("above_threshold_" + tag, r.converged && r.weak_residual <= cfg.residual_tol,
               static_cast<double>(r.weak_residual), static_cast<double>(cfg.residual_tol),
               std::string(to_string(r.status)));
    if (r.converged) detail::check_eigenpair(report, tag, mesh, spec, r, cfg);
  }
  if (spec.p > spec.q)
    report.skip("lambda1_dominates_lambda1q",
                "the P1 discretization cannot separate lambda_1 from the pure q threshold");
  return report;
}

/// Evaluates the lambda-tilde quotient along t u* for the lambda_1 minimizer u*
/// (t growing when p < q, shrinking when p > q) and checks the t^(p-q) approach.
template <typename Scalar>
VerificationReport check_lambda_tilde_equality(const Mesh<Scalar>& mesh,
                                               const ProblemSpec<Scalar>& spec,
                                               const Lambda1Result<Scalar>& l1,
                                               const VerifyOptions& opt = {})
{
  using std::abs;
  using std::pow;
  VerificationReport report;
  const Scalar lambda1 = l1.lambda1;
  const Field<Scalar>& u = l1.minimizer;
  const Scalar jp = grad_energy(mesh, u, spec.p);
  const Scalar b = weighted_qnorm(mesh, spec.quotient_part(), u);
  const Scalar base = spec.p < spec.q ? Scalar(10) : Scalar(0.1);

  std::vector<Scalar> gaps;
  for (int k = 0; k <= opt.tilde_decades; ++k) {
    const Scalar t = pow(base, Scalar(k));
    const Field<Scalar> v = t * u;
    gaps.push_back(lambda_tilde_quotient(mesh, spec, v) - lambda1);
  }
  const Scalar floor = Scalar(1e-9) * std::max(Scalar(1), abs(lambda1));
  report.add("tilde_dominates_at_1", gaps.front() >= -floor, static_cast<double>(gaps.front()),
             static_cast<double>(-floor));

  bool monotone = true;
  for (std::size_t k = 1; k < gaps.size(); ++k)
    monotone = monotone && gaps[k] <= gaps[k - 1] + Scalar(1e-14) * abs(lambda1);
  report.add("monotone_approach", monotone);

  const Scalar t_last = pow(base, Scalar(opt.tilde_decades));
  const Scalar bound = std::max(Scalar(1e-8) * lambda1,
                                pow(t_last, spec.p - spec.q) * (spec.q / spec.p) * jp / b * 10);
  report.add("terminal_gap", abs(gaps.back()) <= bound, static_cast<double>(gaps.back()),
             static_cast<double>(bound));

  // Per-decade ratio, only where both gaps sit well above rounding.
  const double expected = std::pow(10.0, std::abs(static_cast<double>(spec.p - spec.q)));
  const Scalar resolvable = Scalar(1e-11) * abs(lambda1);
  double worst = 0;
  int decades = 0;
  for (std::size_t k = 1; k < gaps.size(); ++k) {
    if (!(gaps[k] > resolvable) || !(gaps[k - 1] > resolvable)) continue;
    const double ratio = static_cast<double>(gaps[k - 1] / gaps[k]);
    worst = std::max(worst, std::abs(ratio / expected - 1));
    ++decades;
  }
  if (decades == 0)
    report.skip("gap_ratio_per_decade", "gaps below rounding resolution");
  else
    report.add("gap_ratio_per_decade", worst <= opt.gap_ratio_tolerance, worst,
               opt.gap_ratio_tolerance);
  return report;
}

template <typename Scalar>
VerificationReport check_lambda_tilde_equality(const Mesh<Scalar>& mesh,
                                               const ProblemSpec<Scalar>& spec,
                                               const SolverConfig<Scalar>& cfg,
                                               const VerifyOptions& opt = {})
{
  return check_lambda_tilde_equality(mesh, spec, compute_lambda1(mesh, spec.quotient_part(), cfg),
                                     opt);
}

/// lambda_1 never reads p; checks it is bit-identical across p_list and that
/// the threshold behaves the same for every p.
template <typename Scalar>
VerificationReport check_p_independence(const Mesh<Scalar>& mesh,
                                        const QuotientProblem<Scalar>& weights,
                                        const std::vector<Scalar>& p_list,
                                        const SolverConfig<Scalar>& cfg,
                                        const VerifyOptions& opt = {})
{
  VerificationReport report;
  std::optional<Scalar> reference;
  bool identical = true;
  for (Scalar p : p_list) {
    const std::string tag = "p=" + detail::format_factor(static_cast<double>(p));
    if (!(p > 1 && p < weights.q)) {
      report.add("p_in_range_" + tag, false, static_cast<double>(p), {}, "p must lie in (1, q)");
      continue;
    }
    ProblemSpec<Scalar> spec;
    static_cast<QuotientProblem<Scalar>&>(spec) = weights;
    spec.p = p;
    const Scalar lambda1 = compute_lambda1(mesh, spec.quotient_part(), cfg).lambda1;
    if (!reference) reference = lambda1;
    identical = identical && std::memcmp(&lambda1, &*reference, sizeof(Scalar)) == 0;

    const auto hi = solve(mesh, spec, static_cast<Scalar>(opt.p_success_factor) * lambda1, cfg);
    report.add("converges_above_" + tag, hi.converged, static_cast<double>(hi.weak_residual),
               static_cast<double>(cfg.residual_tol), std::string(to_string(hi.status)));
    const auto lo = solve(mesh, spec, static_cast<Scalar>(opt.p_infeasible_factor) * lambda1, cfg);
    report.add("infeasible_below_" + tag, lo.status == SolveStatus::infeasible,
               static_cast<double>(opt.p_infeasible_factor * lambda1), {},
               std::string(to_string(lo.status)));
  }
  if (reference) report.add("lambda1_bit_identical", identical, static_cast<double>(*reference));
  return report;
}

} // namespace pqlap
