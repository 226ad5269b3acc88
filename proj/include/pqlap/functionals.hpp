// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <pqlap/problem.hpp>

#include <Eigen/SparseCore>

#include <cmath>
#include <limits>
#include <vector>

namespace pqlap {

/// Regularization of |grad u|^(r-2) for exponents r < 2, used only inside gradients.
template <typename Scalar>
struct SmoothingConfig {
  Scalar epsilon{1e-4};
  Scalar continuation_factor{0.1};
  Scalar epsilon_min{1e-10};

  static SmoothingConfig none() { return {Scalar(0), Scalar(0.1), Scalar(0)}; }

  void validate() const
  {
    if (!(epsilon_min >= 0) || !(epsilon >= epsilon_min))
      raise(ErrorKind::invalid_argument, "smoothing requires epsilon >= epsilon_min >= 0");
    if (!(continuation_factor > 0 && continuation_factor < 1))
      raise(ErrorKind::invalid_argument, "smoothing continuation factor must lie in (0, 1)");
  }
};

/// With `q_only` the p-gradient term is dropped, giving the pure q functional.
enum class EnergyMode { full, q_only };

/// What to do with |G|^(r-2) G at G = 0 when r < 2 and no smoothing is active.
enum class ZeroGradientPolicy { error, extend };

/// sign(x) |x|^e, extended by 0 at x = 0.
template <typename Scalar>
Scalar signed_power(Scalar x, Scalar e)
{
  using std::abs;
  using std::pow;
  if (x == 0) return Scalar(0);
  const Scalar m = pow(abs(x), e);
  return x > 0 ? m : -m;
}

namespace detail {

// |G|^(r-2), or its smoothed version, from |G|^2.
template <typename Scalar>
Scalar flux_coefficient(Scalar norm2, Scalar r, Scalar epsilon,
                        ZeroGradientPolicy policy = ZeroGradientPolicy::error)
{
  using std::pow;
  if (r < 2) {
    if (epsilon > 0) return pow(norm2 + epsilon * epsilon, (r - 2) / 2);
    if (norm2 == 0) {
      if (policy == ZeroGradientPolicy::extend) return Scalar(0);
      raise(ErrorKind::singular_gradient,
            "exponent below 2 with zero element gradient and no smoothing");
    }
  }
  if (r == 2) return Scalar(1);
  return pow(norm2, (r - 2) / 2);
}

inline void check_exponent(double r)
{
  if (!(r > 1)) raise(ErrorKind::invalid_argument, "gradient exponent must exceed 1");
}

} // namespace detail

/// Exact P1 value of the integral of |grad u|^r.
template <typename Scalar>
Scalar grad_energy(const Mesh<Scalar>& mesh, const Field<Scalar>& u, Scalar r)
{
  detail::check_exponent(static_cast<double>(r));
  check_field(mesh, u);
  using std::pow;
  Scalar sum = 0;
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const Scalar n2 = element_gradient(mesh, u, e).squaredNorm();
    if (n2 > 0) sum += mesh.element_measures()[e] * pow(n2, r / 2);
  }
  return sum;
}

/// Derivative of grad_energy with respect to the nodal values.
template <typename Scalar>
Field<Scalar> grad_grad_energy(const Mesh<Scalar>& mesh, const Field<Scalar>& u, Scalar r,
                               const SmoothingConfig<Scalar>& smoothing)
{
  detail::check_exponent(static_cast<double>(r));
  check_field(mesh, u);
  Field<Scalar> g = Field<Scalar>::Zero(mesh.num_nodes());
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const Point<Scalar> G = element_gradient(mesh, u, e);
    const Scalar c = r * mesh.element_measures()[e] *
                     detail::flux_coefficient(G.squaredNorm(), r, smoothing.epsilon);
    for (int i = 0; i <= mesh.dim(); ++i)
      g[mesh.element_node(e, i)] += c * G.dot(mesh.basis_gradient(e, i));
  }
  return g;
}

/// Vertex-lumped quadrature weights: each element passes a|K|/(dim+1) to its
/// vertices and each boundary facet passes b|F|/dim to its vertices.
template <typename Scalar>
Field<Scalar> nodal_weights(const Mesh<Scalar>& mesh, const QuotientProblem<Scalar>& prob)
{
  Field<Scalar> w = Field<Scalar>::Zero(mesh.num_nodes());
  const int dim = mesh.dim();
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const Scalar share = prob.a[e] * mesh.element_measures()[e] / Scalar(dim + 1);
    for (int i = 0; i <= dim; ++i) w[mesh.element_node(e, i)] += share;
  }
  for (Index f = 0; f < mesh.num_facets(); ++f) {
    const Scalar share = prob.b[f] * mesh.facet_measures()[f] / Scalar(dim);
    for (int i = 0; i < dim; ++i) w[mesh.facet_node(f, i)] += share;
  }
  return w;
}

/// B(u): lumped integral of a|u|^q over the domain plus b|u|^q over the boundary.
template <typename Scalar>
Scalar weighted_qnorm(const Mesh<Scalar>& mesh, const QuotientProblem<Scalar>& prob,
                      const Field<Scalar>& u)
{
  check_field(mesh, u);
  using std::abs;
  using std::pow;
  const Field<Scalar> w = nodal_weights(mesh, prob);
  Scalar sum = 0;
  for (Index v = 0; v < u.size(); ++v)
    if (w[v] != 0 && u[v] != 0) sum += w[v] * pow(abs(u[v]), prob.q);
  return sum;
}

template <typename Scalar>
Field<Scalar> grad_weighted_qnorm(const Mesh<Scalar>& mesh, const QuotientProblem<Scalar>& prob,
                                  const Field<Scalar>& u)
{
  check_field(mesh, u);
  const Field<Scalar> w = nodal_weights(mesh, prob);
  Field<Scalar> g(u.size());
  for (Index v = 0; v < u.size(); ++v) g[v] = prob.q * w[v] * signed_power(u[v], prob.q - 1);
  return g;
}

/// I(u): lumped integral of a|u|^(q-2)u plus b|u|^(q-2)u; the cone is I = 0.
template <typename Scalar>
Scalar constraint_value(const Mesh<Scalar>& mesh, const QuotientProblem<Scalar>& prob,
                        const Field<Scalar>& u)
{
  check_field(mesh, u);
  const Field<Scalar> w = nodal_weights(mesh, prob);
  Scalar sum = 0;
  for (Index v = 0; v < u.size(); ++v)
    if (w[v] != 0) sum += w[v] * signed_power(u[v], prob.q - 1);
  return sum;
}

/// The three integrals every energy is built from.
template <typename Scalar>
struct EnergyParts {
  Scalar jp{0}; ///< integral of |grad u|^p
  Scalar jq{0}; ///< integral of |grad u|^q
  Scalar b{0};  ///< weighted q-norm B(u)
};

template <typename Scalar>
EnergyParts<Scalar> energy_parts(const Mesh<Scalar>& mesh, const ProblemSpec<Scalar>& spec,
                                 const Field<Scalar>& u)
{
  return {grad_energy(mesh, u, spec.p), grad_energy(mesh, u, spec.q),
          weighted_qnorm(mesh, spec.quotient_part(), u)};
}

/// J_lambda(u) = J_p/p + J_q/q - (lambda/q) B; in q_only mode the p term is dropped.
template <typename Scalar>
Scalar J_lambda(const Mesh<Scalar>& mesh, const ProblemSpec<Scalar>& spec, Scalar lambda,
                const Field<Scalar>& u, EnergyMode mode = EnergyMode::full)
{
  const Scalar jq = grad_energy(mesh, u, spec.q);
  const Scalar b = weighted_qnorm(mesh, spec.quotient_part(), u);
  const Scalar jp = mode == EnergyMode::full ? grad_energy(mesh, u, spec.p) : Scalar(0);
  return jp / spec.p + jq / spec.q - lambda / spec.q * b;
}

/// The pure q functional (1/q) J_q - (mu/q) B.
template <typename Scalar>
Scalar J_mu(const Mesh<Scalar>& mesh, const ProblemSpec<Scalar>& spec, Scalar mu,
            const Field<Scalar>& u)
{
  return J_lambda(mesh, spec, mu, u, EnergyMode::q_only);
}

namespace detail {

// Nodal vector of the gradient terms (|G|^(p-2) + |G|^(q-2)) G . grad(phi_v).
template <typename Scalar>
Field<Scalar> assemble_flux(const Mesh<Scalar>& mesh, const ProblemSpec<Scalar>& spec,
                            const Field<Scalar>& u, Scalar epsilon, EnergyMode mode,
                            ZeroGradientPolicy policy)
{
  Field<Scalar> g = Field<Scalar>::Zero(mesh.num_nodes());
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const Point<Scalar> G = element_gradient(mesh, u, e);
    const Scalar n2 = G.squaredNorm();
    Scalar c = flux_coefficient(n2, spec.q, epsilon, policy);
    if (mode == EnergyMode::full) c += flux_coefficient(n2, spec.p, epsilon, policy);
    c *= mesh.element_measures()[e];
    for (int i = 0; i <= mesh.dim(); ++i)
      g[mesh.element_node(e, i)] += c * G.dot(mesh.basis_gradient(e, i));
  }
  return g;
}

// Nodal vector w_v |u_v|^(q-2) u_v.
template <typename Scalar>
Field<Scalar> assemble_source(const Field<Scalar>& weights, const Field<Scalar>& u, Scalar q)
{
  Field<Scalar> s(u.size());
  for (Index v = 0; v < u.size(); ++v) s[v] = weights[v] * signed_power(u[v], q - 1);
  return s;
}

} // namespace detail

/// Gradient of J_lambda with respect to the nodal values.
template <typename Scalar>
Field<Scalar> grad_J_lambda(const Mesh<Scalar>& mesh, const ProblemSpec<Scalar>& spec,
                            Scalar lambda, const Field<Scalar>& u,
                            const SmoothingConfig<Scalar>& smoothing,
                            EnergyMode mode = EnergyMode::full)
{
  check_field(mesh, u);
  const Field<Scalar> w = nodal_weights(mesh, spec.quotient_part());
  return detail::assemble_flux(mesh, spec, u, smoothing.epsilon, mode, ZeroGradientPolicy::error) -
         lambda * detail::assemble_source(w, u, spec.q);
}

/// L_lambda(u) = -J_p - J_q + lambda B; zero exactly on the Nehari set.
template <typename Scalar>
Scalar L_lambda(const Mesh<Scalar>& mesh, const ProblemSpec<Scalar>& spec, Scalar lambda,
                const Field<Scalar>& u)
{
  const auto parts = energy_parts(mesh, spec, u);
  return -parts.jp - parts.jq + lambda * parts.b;
}

/// Hessian of J_lambda. Gradient singularities for exponents below 2 are
/// regularized with `epsilon`, and |u_v|^(q-2) is floored at `value_floor`.
template <typename Scalar>
Eigen::SparseMatrix<Scalar> hessian_J_lambda(const Mesh<Scalar>& mesh,
                                             const ProblemSpec<Scalar>& spec, Scalar lambda,
                                             const Field<Scalar>& u, Scalar epsilon,
                                             Scalar value_floor)
{
  using std::abs;
  using std::pow;
  const int dim = mesh.dim();
  std::vector<Eigen::Triplet<Scalar>> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.num_elements() * (dim + 1) * (dim + 1) +
                                            mesh.num_nodes()));
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, 0, 2, 2> M(dim, dim);
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const Point<Scalar> G = element_gradient(mesh, u, e);
    const Scalar n2 = G.squaredNorm();
    M.setZero();
    for (Scalar r : {spec.p, spec.q}) {
      // d/dG of |G|^(r-2) G = s^(r-2) I + (r-2) s^(r-4) G G^T, with s^2 = |G|^2 (+ eps^2 if r < 2)
      const Scalar s2 = r < 2 ? n2 + epsilon * epsilon : n2;
      if (s2 == 0) {
        if (r == 2) M.diagonal().array() += Scalar(1);
        continue;
      }
      const Scalar base = pow(s2, (r - 2) / 2);
      M.diagonal().array() += base;
      M.noalias() += ((r - 2) * base / s2) * (G * G.transpose());
    }
    const Scalar measure = mesh.element_measures()[e];
    for (int i = 0; i <= dim; ++i) {
      const Point<Scalar> gi = M * mesh.basis_gradient(e, i);
      for (int j = 0; j <= dim; ++j)
        triplets.emplace_back(mesh.element_node(e, i), mesh.element_node(e, j),
                              measure * gi.dot(mesh.basis_gradient(e, j)));
    }
  }
  const Field<Scalar> w = nodal_weights(mesh, spec.quotient_part());
  for (Index v = 0; v < mesh.num_nodes(); ++v) {
    if (w[v] == 0) continue;
    const Scalar mag = std::max(abs(u[v]), value_floor);
    const Scalar d = spec.q == 2 ? Scalar(1) : pow(mag, spec.q - 2);
    triplets.emplace_back(v, v, -lambda * (spec.q - 1) * w[v] * d);
  }
  Eigen::SparseMatrix<Scalar> H(mesh.num_nodes(), mesh.num_nodes());
  H.setFromTriplets(triplets.begin(), triplets.end());
  return H;
}

} // namespace pqlap
