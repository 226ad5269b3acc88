// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "config.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>

namespace pqlap::cli {

/// Exit codes shared by all subcommands.
enum ExitCode : int { ok = 0, usage_error = 1, infeasible = 2, not_converged = 3 };

/// Command-line overrides applied on top of the config file.
struct Overrides {
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

void apply(const Overrides& o, RunConfig& rc);

int exit_code_for(const Error& e);

int cmd_lambda1(const RunConfig& rc, std::ostream& log);
int cmd_solve(const RunConfig& rc, double lambda, std::ostream& log);
int cmd_sweep(const RunConfig& rc, double lambda_min, double lambda_max, int count,
              std::ostream& log);
int cmd_verify(const RunConfig& rc, std::ostream& log);

/// Loads the config, applies overrides and runs `body`; errors become exit codes.
int run_guarded(const std::filesystem::path& config, const Overrides& o, std::ostream& err,
                const std::function<int(const RunConfig&)>& body);

} // namespace pqlap::cli
