// SPDX-License-Identifier: Apache-2.0
// pqlap: lambda_1, eigenfunctions, sweeps and verification for the (p,q)-Laplacian.
#include "commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
  using namespace pqlap::cli;
  CLI::App app{"(p,q)-Laplacian eigenvalue solver"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int threads = 0;
  app.add_option("--config", config, "run configuration (JSON)")->required();
  auto* out_opt = app.add_option("--out", out, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "base seed for restarts");
  auto* threads_opt =
      app.add_option("--threads", threads, "worker threads for restarts")->check(CLI::PositiveNumber);

  auto* lambda1 = app.add_subcommand("lambda1", "compute the threshold eigenvalue lambda_1");
  auto* solve = app.add_subcommand("solve", "eigenfunction for one lambda");
  double lambda = 0;
  solve->add_option("--lambda", lambda, "eigenvalue parameter")->required();
  auto* sweep = app.add_subcommand("sweep", "solve on an evenly spaced lambda grid");
  double lo = 0, hi = 0;
  int count = 0;
  sweep->add_option("--min", lo)->required();
  sweep->add_option("--max", hi)->required();
  sweep->add_option("--count", count)->required();
  auto* verify = app.add_subcommand("verify", "run the verification suite");
  for (auto* sub : {lambda1, solve, sweep, verify}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : usage_error;
  }

  Overrides o;
  if (*out_opt) o.out = out;
  if (*seed_opt) o.seed = seed;
  if (*threads_opt) o.threads = threads;

  return run_guarded(config, o, std::cerr, [&](const RunConfig& rc) {
    if (*lambda1) return cmd_lambda1(rc, std::cout);
    if (*solve) return cmd_solve(rc, lambda, std::cout);
    if (*sweep) return cmd_sweep(rc, lo, hi, count, std::cout);
    return cmd_verify(rc, std::cout);
  });
}
