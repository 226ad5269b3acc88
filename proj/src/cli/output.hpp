// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <pqlap/pqlap.hpp>

#include <json.hpp>

#include <filesystem>
#include <string>

namespace pqlap::cli {

/// Writes `content` to a temporary sibling and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Shortest decimal string that reads back to the same double.
std::string shortest(double x);

/// One line per node: coordinates then value, 17 significant digits.
std::string field_dump(const Mesh<double>& mesh, const Field<double>& u);

/// Number, or null when not finite.
nlohmann::json finite_or_null(double x);

nlohmann::json to_json(const Lambda1Result<double>& r);
nlohmann::json to_json(const EigenResult<double>& r);
nlohmann::json to_json(const VerificationReport& r);

std::string dump(const nlohmann::json& j);

} // namespace pqlap::cli
