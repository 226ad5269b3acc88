// SPDX-License-Identifier: Apache-2.0
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

using namespace pqlap;

TEST(Interval, TwoElements)
{
  const auto m = generate_interval<double>(2, 1.0);
  EXPECT_EQ(m.dim(), 1);
  ASSERT_EQ(m.num_nodes(), 3);
  EXPECT_DOUBLE_EQ(m.nodes()(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(m.nodes()(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(m.nodes()(2, 0), 1.0);
  EXPECT_DOUBLE_EQ(m.element_measures()[0], 0.5);
  EXPECT_DOUBLE_EQ(m.element_measures()[1], 0.5);
  ASSERT_EQ(m.num_facets(), 2);
  EXPECT_DOUBLE_EQ(m.facet_measures()[0], 1.0);
  EXPECT_DOUBLE_EQ(m.facet_measures()[1], 1.0);
}

TEST(Interval, LengthTwo)
{
  const auto m = generate_interval<double>(4, 2.0);
  EXPECT_EQ(m.num_nodes(), 5);
  for (Index e = 0; e < m.num_elements(); ++e) EXPECT_DOUBLE_EQ(m.element_measures()[e], 0.5);
}

TEST(Interval, RejectsSingleElement)
{
  try {
    generate_interval<double>(1, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_argument);
  }
}

TEST(UnitSquare, Counts)
{
  const auto m2 = generate_unit_square<double>(2);
  EXPECT_EQ(m2.num_nodes(), 9);
  EXPECT_EQ(m2.num_elements(), 8);
  EXPECT_EQ(m2.num_facets(), 8);
  for (Index e = 0; e < 8; ++e) EXPECT_NEAR(m2.element_measures()[e], 0.125, 1e-15);
  for (Index f = 0; f < 8; ++f) EXPECT_NEAR(m2.facet_measures()[f], 0.5, 1e-15);

  const auto m4 = generate_unit_square<double>(4);
  EXPECT_EQ(m4.num_nodes(), 25);
  EXPECT_EQ(m4.num_elements(), 32);
  EXPECT_NEAR(m4.element_measures().sum(), 1.0, 1e-12);

  const auto m3 = generate_unit_square<double>(3);
  EXPECT_EQ(m3.num_nodes(), 16);
  EXPECT_EQ(m3.num_elements(), 18);
  EXPECT_EQ(m3.num_facets(), 12);
}

TEST(UnitSquare, RejectsTooCoarse)
{
  EXPECT_THROW(generate_unit_square<double>(1), Error);
}

TEST(P1Gradient, Examples)
{
  const auto m = generate_interval<double>(2, 1.0);
  Field<double> u(3);
  u << 0, 0.5, 1;
  EXPECT_DOUBLE_EQ(p1_gradient(m, u, 0)[0], 1.0);
  EXPECT_DOUBLE_EQ(p1_gradient(m, u, 1)[0], 1.0);
  EXPECT_EQ(p1_gradient(m, oracle::filled(3, 2.0), 1)[0], 0.0);
  EXPECT_THROW(p1_gradient(m, u, 2), Error);
  EXPECT_THROW(p1_gradient(m, u, -1), Error);

  const auto sq = generate_unit_square<double>(2);
  const Field<double> x = interpolate(sq, [](const auto& p) { return p[0]; });
  for (Index e = 0; e < sq.num_elements(); ++e) {
    const auto g = p1_gradient(sq, x, e);
    EXPECT_NEAR(g[0], 1.0, 1e-12);
    EXPECT_NEAR(g[1], 0.0, 1e-12);
  }
}

TEST(MeshProperties, AffineInterpolantHasExactGradient)
{
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> d(-3, 3);
  const auto sq = generate_unit_square<double>(7);
  const auto iv = generate_interval<double>(13, 2.5);
  for (int trial = 0; trial < 20; ++trial) {
    const double c0 = d(gen), c1 = d(gen), c = d(gen);
    const Field<double> u = interpolate(sq, [&](const auto& p) { return c0 * p[0] + c1 * p[1] + c; });
    for (Index e = 0; e < sq.num_elements(); ++e) {
      const auto g = p1_gradient(sq, u, e);
      EXPECT_NEAR(g[0], c0, 1e-12);
      EXPECT_NEAR(g[1], c1, 1e-12);
    }
    const Field<double> w = interpolate(iv, [&](const auto& p) { return c0 * p[0] + c; });
    for (Index e = 0; e < iv.num_elements(); ++e) EXPECT_NEAR(p1_gradient(iv, w, e)[0], c0, 1e-12);
  }
}

TEST(MeshProperties, BasisGradientsSumToZero)
{
  for (const auto& m : {generate_unit_square<double>(5), generate_interval<double>(9, 1.0)}) {
    for (Index e = 0; e < m.num_elements(); ++e) {
      Point<double> s = Point<double>::Zero(m.dim());
      for (int i = 0; i <= m.dim(); ++i) s += m.basis_gradient(e, i);
      EXPECT_LT(s.norm(), 1e-12);
    }
  }
}

TEST(MeshProperties, RefinementPreservesMeasures)
{
  for (int n : {2, 3, 8, 17, 40}) {
    const auto sq = generate_unit_square<double>(n);
    EXPECT_NEAR(sq.element_measures().sum(), 1.0, 1e-12);
    EXPECT_NEAR(sq.facet_measures().sum(), 4.0, 1e-12);
    const auto iv = generate_interval<double>(n, 3.0);
    EXPECT_NEAR(iv.element_measures().sum(), 3.0, 1e-12);
    EXPECT_NEAR(iv.facet_measures().sum(), 2.0, 1e-12);
  }
}

TEST(MeshProperties, BoundaryFacetsLieOnBoundary)
{
  const auto sq = generate_unit_square<double>(6);
  for (Index f = 0; f < sq.num_facets(); ++f) {
    for (int i = 0; i < 2; ++i) {
      const auto x = sq.nodes().row(sq.facet_node(f, i));
      const double dist = std::min({x[0], 1 - x[0], x[1], 1 - x[1]});
      EXPECT_LT(std::abs(dist), 1e-12);
    }
  }
  const auto iv = generate_interval<double>(5, 2.0);
  EXPECT_DOUBLE_EQ(iv.nodes()(iv.facet_node(0, 0), 0), 0.0);
  EXPECT_DOUBLE_EQ(iv.nodes()(iv.facet_node(1, 0), 0), 2.0);
}

TEST(MeshValidation, RejectsBadInput)
{
  Mesh<double>::Coordinates nodes(3, 1);
  nodes << 0, 0.5, 1;
  Connectivity elements(2, 2);
  elements << 0, 1, 1, 2;
  Connectivity facets(2, 1);
  facets << 0, 2;
  EXPECT_NO_THROW(Mesh<double>(1, nodes, elements, facets));

  Connectivity bad_index = elements;
  bad_index(1, 1) = 3;
  EXPECT_THROW(Mesh<double>(1, nodes, bad_index, facets), Error);

  Mesh<double>::Coordinates degenerate = nodes;
  degenerate(1, 0) = 0;
  EXPECT_THROW(Mesh<double>(1, degenerate, elements, facets), Error);

  Connectivity interior_facet(1, 1);
  interior_facet << 1;
  EXPECT_THROW(Mesh<double>(1, nodes, elements, interior_facet), Error);

  EXPECT_THROW(Mesh<double>(3, nodes, elements, facets), Error);
}

TEST(MeshIO, RoundTrip)
{
  const auto sq = generate_unit_square<double>(3);
  const std::string path = ::testing::TempDir() + "pqlap_mesh_roundtrip.txt";
  {
    std::ofstream out(path);
    write_mesh(sq, out);
  }
  const auto back = read_mesh<double>(path);
  std::remove(path.c_str());
  EXPECT_EQ(back.dim(), 2);
  EXPECT_EQ(back.nodes(), sq.nodes());
  EXPECT_EQ(back.elements(), sq.elements());
  EXPECT_EQ(back.boundary_facets(), sq.boundary_facets());
}

TEST(MeshIO, RejectsMissingAndTruncated)
{
  EXPECT_THROW(read_mesh<double>("/nonexistent/mesh.txt"), Error);
  const std::string path = ::testing::TempDir() + "pqlap_mesh_truncated.txt";
  {
    std::ofstream out(path);
    out << "1 3 2 2\n0\n0.5\n1\n0 1\n";
  }
  EXPECT_THROW(read_mesh<double>(path), Error);
  std::remove(path.c_str());
}

TEST(MeshPermutation, RelabelsConsistently)
{
  const auto sq = generate_unit_square<double>(4);
  std::vector<Index> perm(sq.num_nodes());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 gen(3);
  std::shuffle(perm.begin(), perm.end(), gen);
  const auto pm = permute_nodes(sq, perm);
  for (Index v = 0; v < sq.num_nodes(); ++v)
    EXPECT_EQ(pm.nodes().row(perm[v]), sq.nodes().row(v));
  EXPECT_NEAR(pm.element_measures().sum(), 1.0, 1e-12);
}
