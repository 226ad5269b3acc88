// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <pqlap/mesh.hpp>

#include <cmath>
#include <sstream>

namespace pqlap {

/// Data of the q-Rayleigh quotient: the exponent q and the piecewise-constant
/// weights (a per element, b per boundary facet). Deliberately carries no p.
template <typename Scalar>
struct QuotientProblem {
  Scalar q{2};
  Field<Scalar> a;
  Field<Scalar> b;
};

/// Full (p,q) problem.
template <typename Scalar>
struct ProblemSpec : QuotientProblem<Scalar> {
  Scalar p{2};

  const QuotientProblem<Scalar>& quotient_part() const noexcept { return *this; }
};

template <typename Scalar>
ProblemSpec<Scalar> make_problem(const Mesh<Scalar>& mesh, Scalar p, Scalar q, Scalar a_const,
                                 Scalar b_const)
{
  ProblemSpec<Scalar> spec;
  spec.p = p;
  spec.q = q;
  spec.a = Field<Scalar>::Constant(mesh.num_elements(), a_const);
  spec.b = Field<Scalar>::Constant(mesh.num_facets(), b_const);
  return spec;
}

template <typename Scalar>
QuotientProblem<Scalar> make_quotient_problem(const Mesh<Scalar>& mesh, Scalar q, Scalar a_const,
                                              Scalar b_const)
{
  return make_problem(mesh, Scalar(2), q, a_const, b_const).quotient_part();
}

/// Checks h_ab: nonnegative weights whose integrals do not both vanish.
template <typename Scalar>
void validate_weights(const Mesh<Scalar>& mesh, const QuotientProblem<Scalar>& prob)
{
  if (!(prob.q > 1) || !std::isfinite(static_cast<double>(prob.q)))
    raise(ErrorKind::invalid_problem, "hypothesis h_pq violated: q must lie in (1, inf)");
  if (prob.a.size() != mesh.num_elements() || prob.b.size() != mesh.num_facets())
    raise(ErrorKind::invalid_problem, "weight arrays do not match the mesh (a per element, b per boundary facet)");
  if (!prob.a.allFinite() || !prob.b.allFinite() || (prob.a.size() && prob.a.minCoeff() < 0) ||
      (prob.b.size() && prob.b.minCoeff() < 0))
    raise(ErrorKind::invalid_problem, "hypothesis h_ab violated: weights a and b must be finite and nonnegative");
  const Scalar total = prob.a.dot(mesh.element_measures()) + prob.b.dot(mesh.facet_measures());
  if (!(total > 0))
    raise(ErrorKind::invalid_problem,
          "hypothesis h_ab violated: the integral of a over the domain plus the integral of b over "
          "the boundary must be positive");
}

/// Checks h_pq and h_ab.
template <typename Scalar>
void validate_problem(const Mesh<Scalar>& mesh, const ProblemSpec<Scalar>& spec)
{
  if (!(spec.p > 1) || !(spec.q > 1) || spec.p == spec.q ||
      !std::isfinite(static_cast<double>(spec.p)) || !std::isfinite(static_cast<double>(spec.q))) {
    std::ostringstream msg;
    msg << "hypothesis h_pq violated: p and q must lie in (1, inf) with p != q (got p = " << spec.p
        << ", q = " << spec.q << ")";
    raise(ErrorKind::invalid_problem, msg.str());
  }
  validate_weights(mesh, spec.quotient_part());
}

} // namespace pqlap
