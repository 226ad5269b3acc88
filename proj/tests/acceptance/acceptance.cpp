// SPDX-License-Identifier: Apache-2.0
// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include "../oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#ifndef PQLAP_CLI_PATH
#error "PQLAP_CLI_PATH must name the pqlap executable"
#endif

using namespace pqlap;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what)
  {
    if (!cond) {
      if (!ok) detail << "; ";
      detail << what;
      ok = false;
    }
  }
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double rel_diff(const Field<double>& a, const Field<double>& b)
{
  return (a - b).norm() / std::max(1e-300, std::max(a.norm(), b.norm()));
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double x)
{
  std::ostringstream s;
  s.precision(6);
  s << x;
  return s.str();
}

struct Eigenpair {
  ProblemSpec<double> spec;
  const Mesh<double>* mesh;
  EigenResult<double> result;
};

// Converged pairs found while checking the spectrum; reused by the identity criteria.
std::vector<Eigenpair>& converged_pairs()
{
  static std::vector<Eigenpair> pairs;
  return pairs;
}

const Mesh<double>& interval100()
{
  static const Mesh<double> m = generate_interval<double>(100, 1.0);
  return m;
}

Outcome ac1_boundary_closed_form()
{
  Outcome o;
  const auto& m = interval100();
  for (double q : {1.5, 2.0, 3.0}) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = compute_lambda1(m, make_quotient_problem(m, q, 0.0, 1.0), SolverConfig<double>{});
    const double dt = seconds_since(t0);
    const double expect = oracle::boundary_linear_eigenvalue(q);
    const double err = rel(r.lambda1, expect);
    o.detail << "q=" << q << ": " << num(r.lambda1) << " vs " << num(expect) << " (rel " << num(err)
             << ", " << num(dt) << " s) ";
    o.require(r.converged, "not converged at q=" + num(q));
    o.require(err <= 5e-3, "q=" + num(q) + " off by " + num(err));
    o.require(dt <= 10.0, "q=" + num(q) + " took " + num(dt) + " s");
  }
  return o;
}

Outcome ac2_neumann_oracle()
{
  Outcome o;
  const auto m = generate_interval<double>(200, 1.0);
  const double reference = oracle::neumann_shooting();
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = compute_lambda1(m, make_quotient_problem(m, 2.0, 1.0, 0.0), SolverConfig<double>{});
  const double dt = seconds_since(t0);
  const double err = rel(r.lambda1, reference);
  o.detail << num(r.lambda1) << " vs shooting " << num(reference) << " (rel " << num(err) << ", "
           << num(dt) << " s) ";
  o.require(r.converged, "not converged");
  o.require(err <= 1e-2, "off by " + num(err));
  o.require(dt <= 10.0, "took " + num(dt) + " s");
  return o;
}

Outcome ac3_spectrum_structure()
{
  Outcome o;
  const auto& m = interval100();
  const SolverConfig<double> cfg;
  const auto t0 = std::chrono::steady_clock::now();
  struct Case {
    double p, q, a, b;
  };
  for (const Case c : {Case{2, 3, 1, 0}, Case{3, 2, 1, 0}, Case{2, 3, 0, 1}, Case{3, 2, 0, 1}}) {
    const auto spec = make_problem(m, c.p, c.q, c.a, c.b);
    const std::string tag = "(p=" + num(c.p) + ",q=" + num(c.q) + ",a=" + num(c.a) + ",b=" + num(c.b) + ")";
    const auto l1 = compute_lambda1(m, spec.quotient_part(), cfg);
    o.require(l1.converged, tag + " lambda1 not converged");

    const auto zero = solve(m, spec, 0.0, cfg);
    const bool constant = zero.eigenfunction.maxCoeff() == zero.eigenfunction.minCoeff();
    o.require(zero.converged && constant && zero.weak_residual == 0.0 &&
                  weak_form_residual(m, spec, 0.0, zero.eigenfunction) == 0.0,
              tag + " lambda=0 is not a constant with zero residual");

    const SolveStatus miss = c.p > c.q ? SolveStatus::not_found : SolveStatus::infeasible;
    for (double f : {0.25, 0.5, 0.9}) {
      const auto r = solve(m, spec, f * l1.lambda1, cfg);
      o.require(!r.converged && r.status == miss,
                tag + " " + num(f) + "*lambda1 gave " + std::string(to_string(r.status)));
    }
    for (double f : {1.1, 2.0, 10.0}) {
      const auto r = solve(m, spec, f * l1.lambda1, cfg);
      const bool ok = r.converged && r.weak_residual <= 1e-7;
      o.require(ok, tag + " " + num(f) + "*lambda1 gave " + std::string(to_string(r.status)) +
                        " residual " + num(r.weak_residual));
      if (r.converged) {
        const double oracle_res = weak_form_residual(m, spec, r.lambda, r.eigenfunction);
        o.require(oracle_res <= 1e-7, tag + " weak-form oracle residual " + num(oracle_res));
        const double absolute =
            grad_J_lambda(m, spec, r.lambda, r.eigenfunction, SmoothingConfig<double>::none()).norm();
        o.require(absolute <= 1e-7, tag + " unscaled gradient norm " + num(absolute));
        converged_pairs().push_back({spec, &m, r});
      }
    }
  }
  // Two-dimensional pairs feed the identity criteria as well.
  static const Mesh<double> square = generate_unit_square<double>(10);
  for (auto [p, q] : {std::pair{2.0, 3.0}, {3.0, 2.0}}) {
    const auto spec = make_problem(square, p, q, 1.0, 1.0);
    const double l1 = compute_lambda1(square, spec.quotient_part(), cfg).lambda1;
    const auto r = solve(square, spec, 1.5 * l1, cfg);
    o.require(r.converged, "unit square (p=" + num(p) + ",q=" + num(q) + ") did not converge");
    if (r.converged) converged_pairs().push_back({spec, &square, r});
  }
  const double dt = seconds_since(t0);
  o.detail << (o.ok ? "" : "; ") << "4 specs x 7 lambdas in " << num(dt) << " s";
  o.require(dt <= 120.0, "took " + num(dt) + " s");
  return o;
}

Outcome ac4_nehari_identities()
{
  Outcome o;
  int checked = 0;
  double worst_gap = 0, worst_energy = 0;
  for (const auto& e : converged_pairs()) {
    if (e.spec.p >= e.spec.q) continue;
    const auto& u = e.result.eigenfunction;
    const auto parts = energy_parts(*e.mesh, e.spec, u);
    const double gap = std::abs(L_lambda(*e.mesh, e.spec, e.result.lambda, u)) / (parts.jp + parts.jq);
    const double j = J_lambda(*e.mesh, e.spec, e.result.lambda, u);
    const double reduced = (e.spec.q - e.spec.p) / (e.spec.p * e.spec.q) * parts.jp;
    const double energy = std::abs(j - reduced) / std::abs(j);
    worst_gap = std::max(worst_gap, gap);
    worst_energy = std::max(worst_energy, energy);
    o.require(gap <= 1e-9, "Nehari gap " + num(gap) + " at lambda " + num(e.result.lambda));
    o.require(energy <= 1e-10, "reduced energy mismatch " + num(energy) + " at lambda " + num(e.result.lambda));
    ++checked;
  }
  o.require(checked > 0, "no p<q eigenpairs to check");
  o.detail << (o.ok ? "" : "; ") << checked << " pairs, max |L|/(Jp+Jq) " << num(worst_gap)
           << ", max energy defect " << num(worst_energy);
  return o;
}

Outcome ac5_energy_identity()
{
  Outcome o;
  int checked = 0;
  double worst = 0;
  for (const auto& e : converged_pairs()) {
    const auto parts = energy_parts(*e.mesh, e.spec, e.result.eigenfunction);
    const double d = std::abs(parts.jp + parts.jq - e.result.lambda * parts.b) / (parts.jp + parts.jq);
    worst = std::max(worst, d);
    o.require(d <= 1e-9, "identity defect " + num(d) + " at lambda " + num(e.result.lambda));
    ++checked;
  }
  o.require(checked > 0, "no eigenpairs to check");
  o.detail << (o.ok ? "" : "; ") << checked << " pairs, max defect " << num(worst);
  return o;
}

Outcome ac6_gradients()
{
  Outcome o;
  SmoothingConfig<double> s;
  s.epsilon = 1e-8;
  s.epsilon_min = 1e-8;
  std::mt19937_64 gen(606);
  double worst = 0;
  const auto m1 = generate_interval<double>(12, 1.0);
  const auto m2 = generate_unit_square<double>(3);
  for (auto [p, q] : {std::pair{1.5, 3.0}, {3.0, 1.5}, {2.0, 3.0}, {3.0, 2.0}, {1.3, 1.8}}) {
    for (int t = 0; t < 10; ++t) {
      const Mesh<double>& m = t % 2 ? m2 : m1;
      const auto spec = make_problem(m, p, q, 1.0, 0.7);
      const auto& quot = spec.quotient_part();
      const Field<double> u = oracle::random_field(m.num_nodes(), gen);
      const double lambda = 1.7;
      const double dj = rel_diff(grad_J_lambda(m, spec, lambda, u, s),
                                 oracle::fd_gradient([&](const Field<double>& v) {
                                   return J_lambda(m, spec, lambda, v);
                                 }, u));
      double de = 0;
      for (double r : {p, q})
        de = std::max(de, rel_diff(grad_grad_energy(m, u, r, s),
                                   oracle::fd_gradient([&](const Field<double>& v) {
                                     return grad_energy(m, v, r);
                                   }, u)));
      const double db = rel_diff(grad_weighted_qnorm(m, quot, u),
                                 oracle::fd_gradient([&](const Field<double>& v) {
                                   return weighted_qnorm(m, quot, v);
                                 }, u));
      worst = std::max({worst, dj, de, db});
      o.require(dj <= 1e-5 && de <= 1e-5 && db <= 1e-5,
                "(p=" + num(p) + ",q=" + num(q) + ") field " + std::to_string(t) + ": " + num(dj) + " " +
                    num(de) + " " + num(db));
    }
  }
  o.detail << (o.ok ? "" : "; ") << "5 pairs x 10 fields, max rel diff " << num(worst);
  return o;
}

Outcome ac7_homogeneity_and_cone()
{
  Outcome o;
  std::mt19937_64 gen(707);
  std::uniform_real_distribution<double> tdist(0.05, 20), cdist(-3, 3);
  const auto m = generate_unit_square<double>(6);
  int fields = 0;
  for (double q : {1.5, 2.0, 3.0}) {
    const auto prob = make_quotient_problem(m, q, 1.0, 0.5);
    const double wsum = nodal_weights(m, prob).sum();
    for (int k = 0; k < 100; ++k, ++fields) {
      const Field<double> u = oracle::random_field(m.num_nodes(), gen);
      const double t = tdist(gen), c = cdist(gen);
      const std::string tag = "q=" + num(q) + " field " + std::to_string(k);

      const Field<double> tu = t * u;
      const double ru = rayleigh_quotient(m, prob, u);
      o.require(rel(rayleigh_quotient(m, prob, tu), ru) <= 1e-12, tag + " quotient not scale invariant");

      const double i = constraint_value(m, prob, u);
      o.require(constraint_value(m, prob, Field<double>(-u)) == -i, tag + " constraint not odd");

      const auto shifted = shift_to_cone(m, prob, u);
      o.require(shifted.residual <= shifted.tolerance, tag + " shift residual above tolerance");
      const Field<double> scaled = t * shifted.shifted;
      const double scale = wsum * std::pow(shifted.shifted.cwiseAbs().maxCoeff(), q - 1);
      o.require(std::abs(constraint_value(m, prob, scaled)) <= std::pow(t, q - 1) * 1e-11 * scale,
                tag + " cone not closed under scaling");

      const Field<double> uc = u.array() + c;
      const auto sc = shift_to_cone(m, prob, uc);
      o.require(std::abs(sc.shift - (shifted.shift - c)) <= 1e-9 * (1 + std::abs(c)),
                tag + " shift not translation equivariant");
    }
  }
  o.detail << (o.ok ? "" : "; ") << fields << " random fields";
  return o;
}

Outcome ac8_lambda_tilde()
{
  Outcome o;
  const auto& m = interval100();
  for (auto [p, q] : {std::pair{2.0, 3.0}, {3.0, 2.0}, {2.2, 2.5}}) {
    const auto spec = make_problem(m, p, q, 0.0, 1.0);
    const auto l1 = compute_lambda1(m, spec.quotient_part(), SolverConfig<double>{});
    // The gap closes as t grows when p < q and as t shrinks when p > q.
    const double step = p < q ? 10.0 : 0.1;
    const double expect = std::pow(10.0, std::abs(p - q));
    double t = 1, worst = 0, previous = 0;
    for (int k = 0; k <= 6; ++k, t *= step) {
      const Field<double> tu = t * l1.minimizer;
      const double gap = lambda_tilde_quotient(m, spec, tu) - l1.lambda1;
      o.require(gap >= -1e-9 * l1.lambda1, "lambda tilde below lambda1 at t=" + num(t));
      if (k > 0) worst = std::max(worst, std::abs(previous / gap - expect) / expect);
      previous = gap;
    }
    o.detail << "(p=" << p << ",q=" << q << ") ratio deviation " << num(worst) << " ";
    o.require(worst <= 0.2, "(p=" + num(p) + ",q=" + num(q) + ") ratio off by " + num(worst));
  }
  return o;
}

Outcome ac9_p_independence()
{
  Outcome o;
  const auto& m = interval100();
  const SolverConfig<double> cfg;
  std::vector<double> values;
  for (double p : {1.3, 1.7, 2.2}) {
    const auto spec = make_problem(m, p, 2.5, 1.0, 0.0);
    const double l1 = compute_lambda1(m, spec.quotient_part(), cfg).lambda1;
    values.push_back(l1);
    const auto above = solve(m, spec, 1.2 * l1, cfg);
    const auto below = solve(m, spec, 0.8 * l1, cfg);
    o.require(above.converged, "p=" + num(p) + " failed at 1.2*lambda1");
    o.require(below.status == SolveStatus::infeasible, "p=" + num(p) + " not infeasible at 0.8*lambda1");
  }
  for (double v : values)
    o.require(std::memcmp(&v, &values.front(), sizeof v) == 0, "lambda1 differs across p");
  o.detail << (o.ok ? "" : "; ") << "lambda1 = " << num(values.front()) << " for p in {1.3, 1.7, 2.2}";
  return o;
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome ac10_determinism()
{
  Outcome o;
  const fs::path root = fs::temp_directory_path() / "pqlap_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path config = root / "config.json";
  std::ofstream(config) << R"({
  "mesh": {"kind": "interval", "elements": 80},
  "problem": {"p": 3, "q": 2, "a": 1, "b": 1},
  "solver": {"n_restarts": 6, "seed": 11},
  "verify": {"p_list": [1.4, 1.8]}
})";
  const std::vector<std::string> commands = {"lambda1", "solve --lambda 30", "sweep --min 5 --max 40 --count 4",
                                             "verify"};
  const std::vector<std::string> runs = {"a", "b", "c"};
  for (const auto& run : runs) {
    // The third run uses several worker threads; results must not depend on scheduling.
    const std::string threads = run == "c" ? " --threads 4" : " --threads 1";
    for (const auto& cmd : commands) {
      const std::string line = std::string("\"") + PQLAP_CLI_PATH + "\" --config \"" + config.string() +
                               "\" --out \"" + (root / run).string() + "\"" + threads + " " + cmd +
                               " > /dev/null 2>&1";
      const int rc = std::system(line.c_str());
      o.require(rc == 0, "'" + cmd + "' exited with " + std::to_string(rc));
    }
  }
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    const auto name = entry.path().filename();
    for (const auto& other : {"b", "c"}) {
      const fs::path twin = root / other / name;
      o.require(fs::exists(twin) && slurp(entry.path()) == slurp(twin),
                name.string() + " differs in run " + other);
    }
    ++files;
  }
  o.require(files >= 6, "only " + std::to_string(files) + " output files");
  o.detail << (o.ok ? "" : "; ") << files << " files identical across 3 runs";
  if (o.ok) fs::remove_all(root);
  return o;
}

Outcome ac11_dual_assembly()
{
  Outcome o;
  std::mt19937_64 gen(1111);
  const auto m1 = generate_interval<double>(40, 1.0);
  const auto m2 = generate_unit_square<double>(7);
  const std::vector<std::pair<double, double>> exps = {{3, 2}, {2, 3}, {1.5, 2.5}, {2.5, 1.4}, {1.3, 1.8}};
  double worst = 0;
  for (int k = 0; k < 50; ++k) {
    const Mesh<double>& m = k % 2 ? m2 : m1;
    const auto [p, q] = exps[k % exps.size()];
    const auto spec = make_problem(m, p, q, 0.8, 1.2);
    const Field<double> u = oracle::random_field(m.num_nodes(), gen);
    const double lambda = 0.5 + k * 0.3;
    const Field<double> g = grad_J_lambda(m, spec, lambda, u, SmoothingConfig<double>::none());
    const auto [defect, lhs] = weak_form_defect(m, spec, lambda, u);
    const double d_norm = rel(defect.norm(), g.norm());
    const double d_rel = rel(weak_form_residual(m, spec, lambda, u), detail::relative_residual(m, spec, lambda, u));
    worst = std::max({worst, d_norm, d_rel});
    o.require(d_norm <= 1e-12 && d_rel <= 1e-12,
              "field " + std::to_string(k) + ": " + num(d_norm) + " " + num(d_rel));
  }
  o.detail << (o.ok ? "" : "; ") << "50 fields, max rel disagreement " << num(worst);
  return o;
}

} // namespace

int main()
{
  struct Criterion {
    const char* id;
    const char* title;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"AC1", "closed-form boundary eigenvalue", ac1_boundary_closed_form},
      {"AC2", "Neumann shooting oracle", ac2_neumann_oracle},
      {"AC3", "spectrum structure", ac3_spectrum_structure},
      {"AC4", "Nehari identities", ac4_nehari_identities},
      {"AC5", "energy identity", ac5_energy_identity},
      {"AC6", "gradient correctness", ac6_gradients},
      {"AC7", "homogeneity and cone properties", ac7_homogeneity_and_cone},
      {"AC8", "lambda tilde equals lambda1", ac8_lambda_tilde},
      {"AC9", "p-independence of lambda1", ac9_p_independence},
      {"AC10", "determinism", ac10_determinism},
      {"AC11", "dual-assembly oracle", ac11_dual_assembly},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail << "exception: " << e.what();
    }
    if (!o.ok) ++failures;
    std::cout << (o.ok ? "PASS " : "FAIL ") << c.id << " " << c.title << ": " << o.detail.str() << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
