// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <pqlap/error.hpp>

#include <Eigen/Core>
#include <Eigen/LU>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace pqlap {

using Index = Eigen::Index;

template <typename Scalar>
using Field = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Spatial vector of a 1D or 2D mesh; fixed storage, no heap allocation.
template <typename Scalar>
using Point = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, Eigen::ColMajor, 2, 1>;

using Connectivity = Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Simplicial mesh of an interval or a polygonal domain with P1 geometry data.
///
/// Immutable after construction. Element gradients are stored row-wise:
/// row `e` holds the (dim+1) local basis gradients, each of length dim.
/// In 1D the boundary facets are points and carry unit measure.
template <typename Scalar>
class Mesh {
public:
  using Coordinates = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Vector = Field<Scalar>;

  Mesh(int dim, Coordinates nodes, Connectivity elements, Connectivity boundary_facets)
    : dim_(dim), nodes_(std::move(nodes)), elements_(std::move(elements)),
      facets_(std::move(boundary_facets))
  {
    if (dim_ != 1 && dim_ != 2)
      raise(ErrorKind::invalid_argument, "mesh dimension must be 1 or 2");
    if (nodes_.cols() != dim_ || elements_.cols() != dim_ + 1 || facets_.cols() != dim_)
      raise(ErrorKind::invalid_argument, "mesh arrays do not match the dimension");
    if (elements_.rows() == 0)
      raise(ErrorKind::invalid_argument, "mesh has no elements");
    check_indices(elements_);
    check_indices(facets_);
    compute_geometry();
    check_boundary();
  }

  int dim() const noexcept { return dim_; }
  Index num_nodes() const noexcept { return nodes_.rows(); }
  Index num_elements() const noexcept { return elements_.rows(); }
  Index num_facets() const noexcept { return facets_.rows(); }

  const Coordinates& nodes() const noexcept { return nodes_; }
  const Connectivity& elements() const noexcept { return elements_; }
  const Connectivity& boundary_facets() const noexcept { return facets_; }
  const Vector& element_measures() const noexcept { return element_measures_; }
  const Vector& facet_measures() const noexcept { return facet_measures_; }

  Index element_node(Index e, int local) const { return elements_(e, local); }
  Index facet_node(Index f, int local) const { return facets_(f, local); }

  /// Gradient of the local basis function `local` on element `e`.
  Point<Scalar> basis_gradient(Index e, int local) const
  {
    Point<Scalar> g(dim_);
    for (int k = 0; k < dim_; ++k) g[k] = gradients_(e, local * dim_ + k);
    return g;
  }

  Scalar domain_measure() const { return element_measures_.sum(); }
  Scalar boundary_measure() const { return facet_measures_.sum(); }

private:
  void check_indices(const Connectivity& c) const
  {
    if (c.size() > 0 && (c.minCoeff() < 0 || c.maxCoeff() >= num_nodes()))
      raise(ErrorKind::invalid_argument, "mesh connectivity references a missing node");
  }

  void compute_geometry()
  {
    const Index ne = num_elements();
    element_measures_.resize(ne);
    gradients_.resize(ne, (dim_ + 1) * dim_);
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, 0, 2, 2> jac(dim_, dim_);
    for (Index e = 0; e < ne; ++e) {
      const auto x0 = nodes_.row(elements_(e, 0));
      for (int k = 0; k < dim_; ++k)
        jac.col(k) = (nodes_.row(elements_(e, k + 1)) - x0).transpose();
      const Scalar det = jac.determinant();
      const Scalar measure = std::abs(det) / (dim_ == 1 ? Scalar(1) : Scalar(2));
      if (!(measure > 0))
        raise(ErrorKind::invalid_argument, "degenerate element " + std::to_string(e));
      element_measures_[e] = measure;
      // Rows of the inverse Jacobian are the gradients of barycentric coordinates 1..dim.
      const auto inv = jac.inverse().eval();
      for (int k = 0; k < dim_; ++k) {
        Scalar g0 = 0;
        for (int i = 1; i <= dim_; ++i) {
          gradients_(e, i * dim_ + k) = inv(i - 1, k);
          g0 -= inv(i - 1, k);
        }
        gradients_(e, k) = g0;
      }
    }

    facet_measures_.resize(num_facets());
    for (Index f = 0; f < num_facets(); ++f) {
      Scalar measure = 1;
      if (dim_ == 2) measure = (nodes_.row(facets_(f, 1)) - nodes_.row(facets_(f, 0))).norm();
      if (!(measure > 0))
        raise(ErrorKind::invalid_argument, "degenerate boundary facet " + std::to_string(f));
      facet_measures_[f] = measure;
    }
  }

  void check_boundary() const
  {
    using Key = std::array<Index, 2>;
    auto key = [this](auto&& nodes) {
      Key k{nodes[0], dim_ == 2 ? nodes[1] : Index(-1)};
      if (k[1] >= 0 && k[1] < k[0]) std::swap(k[0], k[1]);
      return k;
    };
    std::map<Key, int> faces;
    std::array<Index, 2> tmp{};
    for (Index e = 0; e < num_elements(); ++e) {
      for (int drop = 0; drop <= dim_; ++drop) {
        int n = 0;
        for (int i = 0; i <= dim_; ++i)
          if (i != drop) tmp[n++] = elements_(e, i);
        ++faces[key(tmp)];
      }
    }
    for (Index f = 0; f < num_facets(); ++f) {
      for (int i = 0; i < dim_; ++i) tmp[i] = facets_(f, i);
      auto it = faces.find(key(tmp));
      if (it == faces.end() || it->second != 1)
        raise(ErrorKind::invalid_argument,
              "boundary facet " + std::to_string(f) + " is not a face of exactly one element");
    }
  }

  int dim_;
  Coordinates nodes_;
  Connectivity elements_;
  Connectivity facets_;
  Vector element_measures_;
  Vector facet_measures_;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> gradients_;
};

/// Uniform partition of (0, length).
template <typename Scalar = double>
Mesh<Scalar> generate_interval(Index n_elements, Scalar length)
{
  if (n_elements < 2) raise(ErrorKind::invalid_argument, "interval mesh needs at least 2 elements");
  if (!(length > 0)) raise(ErrorKind::invalid_argument, "interval length must be positive");
  typename Mesh<Scalar>::Coordinates nodes(n_elements + 1, 1);
  for (Index i = 0; i <= n_elements; ++i)
    nodes(i, 0) = length * Scalar(i) / Scalar(n_elements);
  Connectivity elements(n_elements, 2);
  for (Index e = 0; e < n_elements; ++e) elements.row(e) << e, e + 1;
  Connectivity facets(2, 1);
  facets << 0, n_elements;
  return Mesh<Scalar>(1, std::move(nodes), std::move(elements), std::move(facets));
}

/// Structured triangulation of the unit square, every grid cell cut along its diagonal.
template <typename Scalar = double>
Mesh<Scalar> generate_unit_square(Index n_per_side)
{
  if (n_per_side < 2) raise(ErrorKind::invalid_argument, "square mesh needs at least 2 cells per side");
  const Index n = n_per_side;
  const Index stride = n + 1;
  auto id = [stride](Index i, Index j) { return j * stride + i; };

  typename Mesh<Scalar>::Coordinates nodes(stride * stride, 2);
  for (Index j = 0; j <= n; ++j)
    for (Index i = 0; i <= n; ++i)
      nodes.row(id(i, j)) << Scalar(i) / Scalar(n), Scalar(j) / Scalar(n);

  Connectivity elements(2 * n * n, 3);
  Index e = 0;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      elements.row(e++) << id(i, j), id(i + 1, j), id(i + 1, j + 1);
      elements.row(e++) << id(i, j), id(i + 1, j + 1), id(i, j + 1);
    }
  }

  Connectivity facets(4 * n, 2);
  Index f = 0;
  for (Index i = 0; i < n; ++i) {
    facets.row(f++) << id(i, 0), id(i + 1, 0);
    facets.row(f++) << id(n, i), id(n, i + 1);
    facets.row(f++) << id(i + 1, n), id(i, n);
    facets.row(f++) << id(0, i + 1), id(0, i);
  }
  return Mesh<Scalar>(2, std::move(nodes), std::move(elements), std::move(facets));
}

template <typename Scalar>
void check_field(const Mesh<Scalar>& mesh, const Field<Scalar>& u)
{
  if (u.size() != mesh.num_nodes())
    raise(ErrorKind::invalid_argument, "field length does not match the mesh node count");
  if (!u.allFinite()) raise(ErrorKind::invalid_argument, "field has non-finite entries");
}

// Unchecked element gradient, used in the hot loops.
template <typename Scalar, typename Derived>
Point<Scalar> element_gradient(const Mesh<Scalar>& mesh, const Eigen::MatrixBase<Derived>& u, Index e)
{
  const int dim = mesh.dim();
  Point<Scalar> g = Point<Scalar>::Zero(dim);
  for (int i = 0; i <= dim; ++i) g += u[mesh.element_node(e, i)] * mesh.basis_gradient(e, i);
  return g;
}

/// Constant gradient of the P1 interpolant of `u` on element `element_index`.
template <typename Scalar>
Point<Scalar> p1_gradient(const Mesh<Scalar>& mesh, const Field<Scalar>& u, Index element_index)
{
  if (element_index < 0 || element_index >= mesh.num_elements())
    raise(ErrorKind::invalid_argument, "element index out of range");
  check_field(mesh, u);
  return element_gradient(mesh, u, element_index);
}

/// Interpolates a function of the node coordinates.
template <typename Scalar, typename Fn>
Field<Scalar> interpolate(const Mesh<Scalar>& mesh, Fn&& fn)
{
  Field<Scalar> u(mesh.num_nodes());
  for (Index v = 0; v < mesh.num_nodes(); ++v) {
    Point<Scalar> x = mesh.nodes().row(v).transpose();
    u[v] = fn(x);
  }
  return u;
}

/// Relabels nodes: old node `i` becomes node `perm[i]`.
template <typename Scalar>
Mesh<Scalar> permute_nodes(const Mesh<Scalar>& mesh, std::span<const Index> perm)
{
  if (static_cast<Index>(perm.size()) != mesh.num_nodes())
    raise(ErrorKind::invalid_argument, "permutation length does not match node count");
  std::vector<bool> seen(perm.size(), false);
  for (Index p : perm) {
    if (p < 0 || p >= mesh.num_nodes() || seen[p])
      raise(ErrorKind::invalid_argument, "not a permutation");
    seen[p] = true;
  }
  typename Mesh<Scalar>::Coordinates nodes(mesh.num_nodes(), mesh.dim());
  for (Index i = 0; i < mesh.num_nodes(); ++i) nodes.row(perm[i]) = mesh.nodes().row(i);
  auto relabel = [&](const Connectivity& c) {
    Connectivity out = c;
    for (Index k = 0; k < out.size(); ++k) out.data()[k] = perm[c.data()[k]];
    return out;
  };
  return Mesh<Scalar>(mesh.dim(), std::move(nodes), relabel(mesh.elements()),
                      relabel(mesh.boundary_facets()));
}

/// Reads the plain-text mesh format: a header line `dim N_v N_e N_f`, then
/// N_v coordinate lines, N_e element lines and N_f facet lines (0-based indices).
template <typename Scalar = double>
Mesh<Scalar> read_mesh(const std::string& path)
{
  std::ifstream in(path);
  if (!in) raise(ErrorKind::io, "cannot open mesh file " + path);
  int dim = 0;
  Index nv = 0, ne = 0, nf = 0;
  if (!(in >> dim >> nv >> ne >> nf) || nv <= 0 || ne <= 0 || nf < 0)
    raise(ErrorKind::invalid_argument, "malformed mesh header in " + path);
  if (dim != 1 && dim != 2) raise(ErrorKind::invalid_argument, "mesh dimension must be 1 or 2");
  typename Mesh<Scalar>::Coordinates nodes(nv, dim);
  Connectivity elements(ne, dim + 1);
  Connectivity facets(nf, dim);
  auto fail = [&] { raise(ErrorKind::invalid_argument, "truncated mesh file " + path); };
  for (Index k = 0; k < nodes.size(); ++k) {
    long double x;
    if (!(in >> x)) fail();
    nodes.data()[k] = static_cast<Scalar>(x);
  }
  for (Index k = 0; k < elements.size(); ++k)
    if (!(in >> elements.data()[k])) fail();
  for (Index k = 0; k < facets.size(); ++k)
    if (!(in >> facets.data()[k])) fail();
  return Mesh<Scalar>(dim, std::move(nodes), std::move(elements), std::move(facets));
}

template <typename Scalar>
void write_mesh(const Mesh<Scalar>& mesh, std::ostream& out)
{
  out << mesh.dim() << ' ' << mesh.num_nodes() << ' ' << mesh.num_elements() << ' '
      << mesh.num_facets() << '\n';
  out << std::setprecision(17);
  auto write_rows = [&out](const auto& m) {
    for (Index r = 0; r < m.rows(); ++r) {
      for (Index c = 0; c < m.cols(); ++c) out << (c ? " " : "") << m(r, c);
      out << '\n';
    }
  };
  write_rows(mesh.nodes());
  write_rows(mesh.elements());
  write_rows(mesh.boundary_facets());
}

} // namespace pqlap
