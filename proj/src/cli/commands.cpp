// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"
#include "output.hpp"

#include <cmath>
#include <ostream>

namespace pqlap::cli {
namespace fs = std::filesystem;
using nlohmann::json;

void apply(const Overrides& o, RunConfig& rc)
{
  if (o.out) rc.output.directory = *o.out;
  if (o.seed) rc.solver.seed = *o.seed;
  if (o.threads) rc.solver.threads = *o.threads;
}

int exit_code_for(const Error& e)
{
  switch (e.kind()) {
    case ErrorKind::invalid_argument:
    case ErrorKind::invalid_problem:
    case ErrorKind::unsupported:
    case ErrorKind::io:
      return usage_error;
    default:
      return not_converged;
  }
}

int run_guarded(const fs::path& config, const Overrides& o, std::ostream& err,
                const std::function<int(const RunConfig&)>& body)
{
  try {
    RunConfig rc = load_config(config);
    apply(o, rc);
    rc.solver.validate();
    return body(rc);
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return usage_error;
  }
}

namespace {

fs::path prepare(const RunConfig& rc)
{
  std::error_code ec;
  fs::create_directories(rc.output.directory, ec);
  if (ec) raise(ErrorKind::io, "cannot create " + rc.output.directory.string());
  return rc.output.directory;
}

json problem_json(const RunConfig& rc)
{
  json j;
  j["p"] = rc.problem.p;
  j["q"] = rc.problem.q;
  j["mesh"] = {{"kind", rc.mesh_section.kind},
               {"dim", rc.mesh.dim()},
               {"nodes", rc.mesh.num_nodes()},
               {"elements", rc.mesh.num_elements()},
               {"facets", rc.mesh.num_facets()}};
  j["seed"] = rc.solver.seed;
  j["n_restarts"] = rc.solver.n_restarts;
  return j;
}

int status_code(SolveStatus s)
{
  switch (s) {
    case SolveStatus::converged: return ok;
    case SolveStatus::infeasible:
    case SolveStatus::not_found: return infeasible;
    default: return not_converged;
  }
}

std::string csv_number(double x) { return std::isfinite(x) ? shortest(x) : "nan"; }

} // namespace

int cmd_lambda1(const RunConfig& rc, std::ostream& log)
{
  const fs::path dir = prepare(rc);
  const auto r = compute_lambda1(rc.mesh, rc.problem.quotient_part(), rc.solver);
  json j = to_json(r);
  j["problem"] = problem_json(rc);
  if (rc.output.field_dump) {
    write_atomic(dir / "lambda1_minimizer.txt", field_dump(rc.mesh, r.minimizer));
    j["field_dump"] = "lambda1_minimizer.txt";
  }
  write_atomic(dir / "lambda1.json", dump(j));
  log << "lambda1 = " << shortest(r.lambda1) << (r.converged ? "" : " (not converged)") << '\n';
  return r.converged ? ok : not_converged;
}

int cmd_solve(const RunConfig& rc, double lambda, std::ostream& log)
{
  if (!(lambda >= 0) || !std::isfinite(lambda))
    raise(ErrorKind::invalid_argument, "--lambda must be a finite nonnegative number");
  const fs::path dir = prepare(rc);
  const auto r = solve(rc.mesh, rc.problem, lambda, rc.solver);
  const std::string stem = "eigen_" + shortest(lambda);
  json j = to_json(r);
  j["problem"] = problem_json(rc);
  if (rc.output.field_dump) {
    write_atomic(dir / (stem + ".txt"), field_dump(rc.mesh, r.eigenfunction));
    j["field_dump"] = stem + ".txt";
  }
  write_atomic(dir / (stem + ".json"), dump(j));
  log << "lambda = " << shortest(lambda) << ": " << to_string(r.status) << '\n';
  return status_code(r.status);
}

int cmd_sweep(const RunConfig& rc, double lambda_min, double lambda_max, int count,
              std::ostream& log)
{
  if (!(lambda_min >= 0) || !std::isfinite(lambda_max) || lambda_min > lambda_max)
    raise(ErrorKind::invalid_argument, "sweep needs 0 <= min <= max");
  if (count < 1) raise(ErrorKind::invalid_argument, "sweep count must be at least 1");
  const fs::path dir = prepare(rc);
  std::string csv = "lambda,status,energy,weak_residual,J_p,J_q,B\n";
  for (int i = 0; i < count; ++i) {
    const double lambda =
        count == 1 ? lambda_min : lambda_min + (lambda_max - lambda_min) * i / (count - 1);
    const auto r = solve(rc.mesh, rc.problem, lambda, rc.solver);
    csv += shortest(lambda) + ',' + std::string(to_string(r.status)) + ',' +
           csv_number(r.energy) + ',' + csv_number(r.weak_residual) + ',' +
           csv_number(r.parts.jp) + ',' + csv_number(r.parts.jq) + ',' + csv_number(r.parts.b) +
           '\n';
    log << shortest(lambda) << ' ' << to_string(r.status) << '\n';
  }
  write_atomic(dir / "sweep.csv", csv);
  return ok;
}

int cmd_verify(const RunConfig& rc, std::ostream& log)
{
  const fs::path dir = prepare(rc);
  VerificationReport report;
  report.append(check_spectrum_structure(rc.mesh, rc.problem, rc.solver, rc.verify));
  for (auto& c : check_lambda_tilde_equality(rc.mesh, rc.problem, rc.solver, rc.verify).checks) {
    c.name = "lambda_tilde." + c.name;
    report.checks.push_back(std::move(c));
  }
  if (!rc.p_list.empty()) {
    for (auto& c :
         check_p_independence(rc.mesh, rc.problem.quotient_part(), rc.p_list, rc.solver, rc.verify)
             .checks) {
      c.name = "p_independence." + c.name;
      report.checks.push_back(std::move(c));
    }
  }
  json j = to_json(report);
  j["problem"] = problem_json(rc);
  write_atomic(dir / "report.json", dump(j));
  for (const auto& c : report.checks) log << to_string(c.status) << "  " << c.name << '\n';
  log << (report.overall() ? "verification passed" : "verification FAILED") << '\n';
  return report.overall() ? ok : not_converged;
}

} // namespace pqlap::cli
