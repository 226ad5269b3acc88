// SPDX-License-Identifier: Apache-2.0
#include "output.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <system_error>

namespace pqlap::cli {

using nlohmann::json;

void write_atomic(const std::filesystem::path& path, const std::string& content)
{
  namespace fs = std::filesystem;
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorKind::io, "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) raise(ErrorKind::io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) raise(ErrorKind::io, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::string shortest(double x)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string field_dump(const Mesh<double>& mesh, const Field<double>& u)
{
  std::string out;
  char buf[64];
  for (Index v = 0; v < mesh.num_nodes(); ++v) {
    for (int k = 0; k < mesh.dim(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g ", mesh.nodes()(v, k));
      out += buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g\n", u[v]);
    out += buf;
  }
  return out;
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json to_json(const Lambda1Result<double>& r)
{
  json j;
  j["lambda1"] = r.lambda1;
  j["converged"] = r.converged;
  j["restarts_used"] = r.restarts_used;
  j["best_restart"] = r.best_restart;
  json values = json::array();
  for (double v : r.restart_values) values.push_back(finite_or_null(v));
  j["restart_values"] = values;
  j["restart_iterations"] = r.restart_iterations;
  j["history"] = r.quotient_history;
  return j;
}

json to_json(const EigenResult<double>& r)
{
  json j;
  j["lambda"] = r.lambda;
  j["status"] = std::string(to_string(r.status));
  j["converged"] = r.converged;
  j["regime"] = std::string(to_string(r.regime));
  j["weak_residual"] = finite_or_null(r.weak_residual);
  j["constraint_residual"] = finite_or_null(r.constraint_residual);
  j["energy"] = finite_or_null(r.energy);
  j["nehari_gap"] = r.nehari_gap ? finite_or_null(*r.nehari_gap) : json(nullptr);
  j["J_p"] = finite_or_null(r.parts.jp);
  j["J_q"] = finite_or_null(r.parts.jq);
  j["B"] = finite_or_null(r.parts.b);
  j["restarts_used"] = r.restarts_used;
  j["restarts_feasible"] = r.restarts_feasible;
  j["best_restart"] = r.best_restart;
  j["descent_iterations"] = r.descent_iterations;
  j["newton_iterations"] = r.newton_iterations;
  return j;
}

json to_json(const VerificationReport& r)
{
  json checks = json::array();
  for (const auto& c : r.checks) {
    json e;
    e["name"] = c.name;
    e["status"] = std::string(to_string(c.status));
    e["measured"] = c.measured ? finite_or_null(*c.measured) : json(nullptr);
    e["tolerance"] = c.tolerance ? finite_or_null(*c.tolerance) : json(nullptr);
    e["detail"] = c.detail;
    checks.push_back(std::move(e));
  }
  json j;
  j["overall"] = r.overall();
  j["checks"] = std::move(checks);
  return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

} // namespace pqlap::cli
