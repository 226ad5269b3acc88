// SPDX-License-Identifier: Apache-2.0
#include "config.hpp"

#include <fstream>
#include <set>

namespace pqlap::cli {
namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& msg) { raise(ErrorKind::invalid_argument, "config: " + msg); }

const json& require_object(const json& j, const std::string& where)
{
  if (!j.is_object()) bad(where + " must be an object");
  return j;
}

void reject_unknown(const json& j, const std::string& where, std::set<std::string> allowed)
{
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) bad("unknown key '" + key + "' in " + where);
}

double number(const json& j, const std::string& key)
{
  if (!j.is_number()) bad("'" + key + "' must be a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& key)
{
  if (!j.is_number_integer()) bad("'" + key + "' must be an integer");
  return j.get<int>();
}

template <typename T, typename Get>
void maybe(const json& section, const char* key, T& target, Get get)
{
  if (auto it = section.find(key); it != section.end()) target = get(*it, key);
}

Field<double> weight_field(const json& j, const std::string& key, Index count)
{
  if (j.is_number()) return Field<double>::Constant(count, j.get<double>());
  if (!j.is_array()) bad("'" + key + "' must be a number or an array");
  if (static_cast<Index>(j.size()) != count)
    bad("'" + key + "' has " + std::to_string(j.size()) + " entries, expected " +
        std::to_string(count));
  Field<double> out(count);
  for (Index i = 0; i < count; ++i) out[i] = number(j[i], key);
  return out;
}

std::vector<double> number_list(const json& j, const std::string& key)
{
  if (!j.is_array()) bad("'" + key + "' must be an array");
  std::vector<double> out;
  for (const auto& x : j) out.push_back(number(x, key));
  return out;
}

Mesh<double> build_mesh(const MeshSection& m)
{
  if (m.kind == "interval") {
    if (!(m.length > 0)) bad("mesh length must be positive");
    return generate_interval<double>(m.elements, m.length);
  }
  if (m.kind == "unit_square") return generate_unit_square<double>(m.n_per_side);
  if (m.kind == "file") return read_mesh<double>(m.path.string());
  bad("mesh kind must be interval, unit_square or file");
}

void parse_solver(const json& s, SolverConfig<double>& cfg)
{
  require_object(s, "solver");
  reject_unknown(s, "solver",
                 {"n_restarts", "seed", "threads", "rel_tol", "patience", "max_iterations",
                  "lambda1_max_iterations", "initial_step", "armijo_c1", "armijo_shrink",
                  "max_backtracks", "residual_tol", "shift_tol", "handoff_tol",
                  "newton_max_iterations", "feasibility_margin", "collapse_ratio", "smoothing"});
  maybe(s, "n_restarts", cfg.n_restarts, integer);
  if (auto it = s.find("seed"); it != s.end()) {
    const bool negative = it->is_number_integer() && !it->is_number_unsigned() && it->get<std::int64_t>() < 0;
    if (!it->is_number_integer() || negative)
      bad("'seed' must be a nonnegative integer");
    cfg.seed = it->get<std::uint64_t>();
  }
  maybe(s, "threads", cfg.threads, integer);
  maybe(s, "rel_tol", cfg.rel_tol, number);
  maybe(s, "patience", cfg.patience, integer);
  maybe(s, "max_iterations", cfg.max_iterations, integer);
  maybe(s, "lambda1_max_iterations", cfg.lambda1_max_iterations, integer);
  maybe(s, "initial_step", cfg.initial_step, number);
  maybe(s, "armijo_c1", cfg.armijo.c1, number);
  maybe(s, "armijo_shrink", cfg.armijo.shrink, number);
  maybe(s, "max_backtracks", cfg.armijo.max_backtracks, integer);
  maybe(s, "residual_tol", cfg.residual_tol, number);
  maybe(s, "shift_tol", cfg.shift_tol, number);
  maybe(s, "handoff_tol", cfg.handoff_tol, number);
  maybe(s, "newton_max_iterations", cfg.newton_max_iterations, integer);
  maybe(s, "feasibility_margin", cfg.feasibility_margin, number);
  maybe(s, "collapse_ratio", cfg.collapse_ratio, number);
  if (auto it = s.find("smoothing"); it != s.end()) {
    const json& sm = require_object(*it, "solver.smoothing");
    reject_unknown(sm, "solver.smoothing", {"epsilon", "continuation_factor", "epsilon_min"});
    maybe(sm, "epsilon", cfg.smoothing.epsilon, number);
    maybe(sm, "continuation_factor", cfg.smoothing.continuation_factor, number);
    maybe(sm, "epsilon_min", cfg.smoothing.epsilon_min, number);
  }
}

void parse_verify(const json& v, RunConfig& rc)
{
  require_object(v, "verify");
  reject_unknown(v, "verify",
                 {"below", "above", "tilde_decades", "gap_ratio_tolerance", "p_list",
                  "p_success_factor", "p_infeasible_factor"});
  maybe(v, "below", rc.verify.below, number_list);
  maybe(v, "above", rc.verify.above, number_list);
  maybe(v, "tilde_decades", rc.verify.tilde_decades, integer);
  maybe(v, "gap_ratio_tolerance", rc.verify.gap_ratio_tolerance, number);
  maybe(v, "p_list", rc.p_list, number_list);
  maybe(v, "p_success_factor", rc.verify.p_success_factor, number);
  maybe(v, "p_infeasible_factor", rc.verify.p_infeasible_factor, number);
  if (rc.verify.tilde_decades < 1) bad("verify.tilde_decades must be at least 1");
  if (!(rc.verify.gap_ratio_tolerance > 0)) bad("verify.gap_ratio_tolerance must be positive");
  for (double f : rc.verify.below)
    if (!(f >= 0)) bad("verify.below factors must be nonnegative");
  for (double f : rc.verify.above)
    if (!(f > 0)) bad("verify.above factors must be positive");
}

} // namespace

RunConfig parse_config(const json& doc, const std::filesystem::path& base_dir)
{
  require_object(doc, "config");
  reject_unknown(doc, "config", {"mesh", "problem", "solver", "verify", "output"});
  if (!doc.contains("mesh")) bad("missing 'mesh' section");
  if (!doc.contains("problem")) bad("missing 'problem' section");

  MeshSection ms;
  const json& m = require_object(doc.at("mesh"), "mesh");
  reject_unknown(m, "mesh", {"kind", "elements", "length", "n_per_side", "path"});
  if (!m.contains("kind") || !m.at("kind").is_string()) bad("mesh.kind must be a string");
  ms.kind = m.at("kind").get<std::string>();
  maybe(m, "elements", ms.elements, integer);
  maybe(m, "length", ms.length, number);
  maybe(m, "n_per_side", ms.n_per_side, integer);
  if (auto it = m.find("path"); it != m.end()) {
    if (!it->is_string()) bad("mesh.path must be a string");
    std::filesystem::path p = it->get<std::string>();
    ms.path = p.is_absolute() ? p : base_dir / p;
  } else if (ms.kind == "file") {
    bad("mesh.path is required for kind 'file'");
  }
  RunConfig rc{ms, build_mesh(ms)};

  const json& p = require_object(doc.at("problem"), "problem");
  reject_unknown(p, "problem", {"p", "q", "a", "b"});
  for (const char* key : {"p", "q", "a", "b"})
    if (!p.contains(key)) bad(std::string("missing problem.") + key);
  rc.problem.p = number(p.at("p"), "p");
  rc.problem.q = number(p.at("q"), "q");
  rc.problem.a = weight_field(p.at("a"), "a", rc.mesh.num_elements());
  rc.problem.b = weight_field(p.at("b"), "b", rc.mesh.num_facets());
  if (rc.problem.p == rc.problem.q)
    raise(ErrorKind::invalid_problem, "hypothesis h_pq violated: p and q must differ");
  validate_problem(rc.mesh, rc.problem);

  if (auto it = doc.find("solver"); it != doc.end()) parse_solver(*it, rc.solver);
  rc.solver.validate();
  if (auto it = doc.find("verify"); it != doc.end()) parse_verify(*it, rc);

  rc.output.directory = base_dir;
  if (auto it = doc.find("output"); it != doc.end()) {
    const json& o = require_object(*it, "output");
    reject_unknown(o, "output", {"directory", "field_dump"});
    if (auto d = o.find("directory"); d != o.end()) {
      if (!d->is_string()) bad("output.directory must be a string");
      std::filesystem::path dir = d->get<std::string>();
      rc.output.directory = dir.is_absolute() ? dir : base_dir / dir;
    }
    if (auto f = o.find("field_dump"); f != o.end()) {
      if (!f->is_boolean()) bad("output.field_dump must be a boolean");
      rc.output.field_dump = f->get<bool>();
    }
  }
  return rc;
}

RunConfig load_config(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) raise(ErrorKind::io, "cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    bad(std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc, path.parent_path().empty() ? std::filesystem::path(".")
                                                      : path.parent_path());
}

} // namespace pqlap::cli
