// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <pqlap/pqlap.hpp>

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pqlap::cli {

struct MeshSection {
  std::string kind{"interval"}; ///< interval | unit_square | file
  int elements{100};            ///< interval
  double length{1.0};           ///< interval
  int n_per_side{16};           ///< unit_square
  std::filesystem::path path;   ///< file, resolved against the config directory
};

struct OutputSection {
  std::filesystem::path directory{"."};
  bool field_dump{true};
};

struct RunConfig {
  RunConfig(MeshSection section, Mesh<double> m)
    : mesh_section(std::move(section)), mesh(std::move(m))
  {}

  MeshSection mesh_section;
  Mesh<double> mesh;
  ProblemSpec<double> problem;
  SolverConfig<double> solver;
  VerifyOptions verify;
  std::vector<double> p_list; ///< extra p values for the p-independence check
  OutputSection output;
};

/// Parses and validates a configuration document. Unknown keys are rejected;
/// invalid problems raise pqlap::Error naming the violated hypothesis.
RunConfig parse_config(const nlohmann::json& doc,
                       const std::filesystem::path& base_dir = std::filesystem::path("."));

RunConfig load_config(const std::filesystem::path& path);

} // namespace pqlap::cli
