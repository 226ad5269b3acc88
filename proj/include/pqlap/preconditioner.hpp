// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <pqlap/mesh.hpp>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <vector>

namespace pqlap {

/// Discrete H1 Riesz map (P1 stiffness plus lumped mass). Descent directions
/// are computed in this metric, which makes step sizes insensitive to the mesh size.
template <typename Scalar>
class H1Preconditioner {
public:
  explicit H1Preconditioner(const Mesh<Scalar>& mesh)
  {
    const int dim = mesh.dim();
    std::vector<Eigen::Triplet<Scalar>> triplets;
    for (Index e = 0; e < mesh.num_elements(); ++e) {
      const Scalar measure = mesh.element_measures()[e];
      for (int i = 0; i <= dim; ++i) {
        const auto gi = mesh.basis_gradient(e, i);
        triplets.emplace_back(mesh.element_node(e, i), mesh.element_node(e, i),
                              measure / Scalar(dim + 1));
        for (int j = 0; j <= dim; ++j)
          triplets.emplace_back(mesh.element_node(e, i), mesh.element_node(e, j),
                                measure * gi.dot(mesh.basis_gradient(e, j)));
      }
    }
    matrix_.resize(mesh.num_nodes(), mesh.num_nodes());
    matrix_.setFromTriplets(triplets.begin(), triplets.end());
    solver_.compute(matrix_);
    if (solver_.info() != Eigen::Success)
      raise(ErrorKind::invalid_argument, "H1 preconditioner factorization failed");
  }

  Field<Scalar> solve(const Field<Scalar>& g) const { return solver_.solve(g); }

  const Eigen::SparseMatrix<Scalar>& matrix() const noexcept { return matrix_; }

private:
  Eigen::SparseMatrix<Scalar> matrix_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<Scalar>> solver_;
};

} // namespace pqlap
