// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <pqlap/functionals.hpp>

#include <cmath>
#include <cstdint>
#include <random>

namespace pqlap {

template <typename Scalar>
struct ShiftResult {
  Field<Scalar> shifted; ///< input + shift * 1
  Scalar shift{0};
  int iterations{0};
  Scalar residual{0};  ///< |I(shifted)|
  Scalar tolerance{0}; ///< absolute tolerance the residual was measured against
};

namespace detail {

template <typename Scalar>
struct ShiftedConstraint {
  const Field<Scalar>& u;
  const Field<Scalar>& w;
  Scalar q;

  Scalar operator()(Scalar s) const
  {
    Scalar sum = 0;
    for (Index v = 0; v < u.size(); ++v)
      if (w[v] != 0) sum += w[v] * signed_power(u[v] + s, q - 1);
    return sum;
  }

  // d/ds, or NaN where it is unbounded (q < 2 near a nodal zero).
  Scalar derivative(Scalar s) const
  {
    using std::abs;
    using std::pow;
    Scalar sum = 0;
    for (Index v = 0; v < u.size(); ++v) {
      if (w[v] == 0) continue;
      const Scalar x = abs(u[v] + s);
      if (q < 2 && x < Scalar(1e-12)) return std::numeric_limits<Scalar>::quiet_NaN();
      sum += w[v] * (q == 2 ? Scalar(1) : pow(x, q - 2));
    }
    return (q - 1) * sum;
  }
};

} // namespace detail

/// Finds the unique constant s with I(u + s) = 0. The map s -> I(u + s) is
/// strictly increasing and changes sign on [-max u, -min u].
template <typename Scalar>
ShiftResult<Scalar> shift_to_cone(const Mesh<Scalar>& mesh, const QuotientProblem<Scalar>& prob,
                                  const Field<Scalar>& u, Scalar tol = Scalar(1e-12))
{
  using std::abs;
  using std::pow;
  check_field(mesh, u);
  if (!(tol > 0)) raise(ErrorKind::invalid_argument, "shift tolerance must be positive");
  const Field<Scalar> w = nodal_weights(mesh, prob);
  if (!(w.sum() > 0))
    raise(ErrorKind::invalid_problem, "hypothesis h_ab violated: all weights vanish");

  const detail::ShiftedConstraint<Scalar> I{u, w, prob.q};
  Scalar lo = -u.maxCoeff();
  Scalar hi = -u.minCoeff();
  const Scalar stop_width = Scalar(1e-14) * (1 + (hi - lo));
  int iterations = 0;
  Scalar root = lo;
  bool exact = false;

  auto bisect_until = [&](auto&& keep_going) {
    while (!exact && keep_going()) {
      const Scalar mid = lo + (hi - lo) / 2;
      if (mid <= lo || mid >= hi) break;
      ++iterations;
      const Scalar fm = I(mid);
      if (fm == 0) {
        root = mid;
        exact = true;
      } else if (fm < 0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
  };

  auto best_of_bracket = [&] {
    const Scalar flo = abs(I(lo)), fhi = abs(I(hi));
    return flo <= fhi ? lo : hi;
  };

  if (lo == hi) {
    exact = true;
    root = lo;
  }
  bisect_until([&] { return hi - lo > stop_width; });

  if (!exact) {
    root = lo + (hi - lo) / 2;
    const Scalar f0 = I(root);
    const Scalar d = I.derivative(root);
    if (std::isfinite(static_cast<double>(d)) && d > 0) {
      const Scalar polished = root - f0 / d;
      ++iterations;
      if (abs(I(polished)) < abs(f0)) root = polished;
    } else {
      // No usable slope (a node sits at the root for q < 2): bisect to machine resolution.
      bisect_until([] { return true; });
      if (!exact) root = best_of_bracket();
    }
  }

  auto magnitude_scale = [&](Scalar s) {
    const Scalar m = (u.array() + s).abs().maxCoeff();
    return w.sum() * pow(m, prob.q - 1);
  };

  ShiftResult<Scalar> out;
  out.tolerance = tol * magnitude_scale(root);
  if (!exact && abs(I(root)) > out.tolerance) {
    // Steep root (q < 2 with a node at the root): refine to machine resolution.
    bisect_until([] { return true; });
    if (!exact) {
      const Scalar candidate = best_of_bracket();
      if (abs(I(candidate)) < abs(I(root))) root = candidate;
    }
    out.tolerance = tol * magnitude_scale(root);
  }

  out.shift = root;
  out.shifted = u.array() + root;
  out.iterations = iterations;
  out.residual = abs(constraint_value(mesh, prob, out.shifted));
  return out;
}

/// Scales a cone element onto the slice B = 1.
template <typename Scalar>
Field<Scalar> normalize_to_C1(const Mesh<Scalar>& mesh, const QuotientProblem<Scalar>& prob,
                              const Field<Scalar>& u)
{
  using std::pow;
  const Scalar b = weighted_qnorm(mesh, prob, u);
  if (!(b > 0))
    raise(ErrorKind::degenerate_direction, "weighted q-norm vanishes; the quotient is infinite");
  return u / pow(b, Scalar(1) / prob.q);
}

/// Deterministic seed of restart `index` derived from a base seed.
inline std::uint64_t restart_seed(std::uint64_t base, int index)
{
  return base + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(index + 1);
}

/// Uniform random nodal values in [-1, 1], shifted into the cone and normalized.
template <typename Scalar>
Field<Scalar> random_cone_point(const Mesh<Scalar>& mesh, const QuotientProblem<Scalar>& prob,
                                std::uint64_t seed, Scalar tol = Scalar(1e-12))
{
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  constexpr int max_attempts = 100;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Field<Scalar> u(mesh.num_nodes());
    for (Index v = 0; v < u.size(); ++v) u[v] = static_cast<Scalar>(dist(gen));
    const auto shifted = shift_to_cone(mesh, prob, u, tol);
    if (!(weighted_qnorm(mesh, prob, shifted.shifted) > 0)) continue;
    return normalize_to_C1(mesh, prob, shifted.shifted);
  }
  raise(ErrorKind::generation_failure, "no nondegenerate cone point after 100 draws");
}

} // namespace pqlap
