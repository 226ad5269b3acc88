// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pqlap {

enum class ErrorKind {
  invalid_argument,
  invalid_problem,
  singular_gradient,
  degenerate_direction,
  generation_failure,
  no_feasible_start,
  infeasible_direction,
  unsupported,
  io,
};

inline std::string_view to_string(ErrorKind kind)
{
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::invalid_problem: return "invalid-problem";
    case ErrorKind::singular_gradient: return "singular-gradient";
    case ErrorKind::degenerate_direction: return "degenerate-direction";
    case ErrorKind::generation_failure: return "generation-failure";
    case ErrorKind::no_feasible_start: return "no-feasible-start";
    case ErrorKind::infeasible_direction: return "infeasible-direction";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
  {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& what)
{
  throw Error(kind, what);
}

} // namespace pqlap
