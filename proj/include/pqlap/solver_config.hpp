// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <pqlap/functionals.hpp>
#include <pqlap/line_search.hpp>

#include <cstdint>

namespace pqlap {

template <typename Scalar>
struct SolverConfig {
  int n_restarts{8};
  std::uint64_t seed{1};
  int threads{1};

  // Stopping rule: relative decrease below rel_tol over `patience` accepted steps.
  Scalar rel_tol{1e-8};
  int patience{25};
  int lambda1_max_iterations{20000};
  int max_iterations{5000};

  ArmijoOptions<Scalar> armijo{};
  Scalar initial_step{1.0};
  SmoothingConfig<Scalar> smoothing{};

  Scalar residual_tol{1e-7}; ///< relative weak-form residual accepted as converged
  Scalar shift_tol{1e-12};   ///< cone shift tolerance, relative to the field max-norm

  Scalar handoff_tol{1e-5}; ///< descent hands over to Newton below this relative residual
  int newton_max_iterations{50};
  Scalar feasibility_margin{1e-8};
  Scalar collapse_ratio{1e-8}; ///< max-norm ratio at which descent has collapsed onto 0

  void validate() const
  {
    if (n_restarts < 1) raise(ErrorKind::invalid_argument, "n_restarts must be at least 1");
    if (threads < 1) raise(ErrorKind::invalid_argument, "threads must be at least 1");
    if (patience < 1 || lambda1_max_iterations < 1 || max_iterations < 1 ||
        newton_max_iterations < 0)
      raise(ErrorKind::invalid_argument, "iteration limits must be positive");
    for (Scalar t : {rel_tol, residual_tol, shift_tol, handoff_tol, initial_step, collapse_ratio})
      if (!(t > 0)) raise(ErrorKind::invalid_argument, "tolerances and steps must be positive");
    if (!(feasibility_margin >= 0))
      raise(ErrorKind::invalid_argument, "feasibility margin must be nonnegative");
    if (!(armijo.c1 > 0 && armijo.c1 < 1) || !(armijo.shrink > 0 && armijo.shrink < 1))
      raise(ErrorKind::invalid_argument, "Armijo parameters must lie in (0, 1)");
    smoothing.validate();
  }
};

} // namespace pqlap
