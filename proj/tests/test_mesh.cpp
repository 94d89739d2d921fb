#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "afferentsim/mesh.hpp"
#include "afferentsim/quad4.hpp"

using namespace afferentsim;

namespace {

GeometrySpec unit_square_spec() {
  GeometrySpec s;
  s.domain_width_mm = 1.0;
  s.layer_thickness_mm = {1.0};
  s.surface_element_mm = 0.5;
  s.coarsening = 1.0;
  s.afferent_depth_mm = {{AfferentType::SA, 0.5}, {AfferentType::RA, 0.5}, {AfferentType::PC, 1.0}};
  return s;
}

std::vector<MaterialLayer> one_layer(double thickness) {
  return stack_layers({{"solid", 1.0, 0.3, 0.0, 0.0}}, {thickness});
}

}  // namespace

TEST(Mesh, UnitSquareHasFourElementsNineNodes) {
  const Mesh m = build_mesh(unit_square_spec(), one_layer(1.0));
  EXPECT_EQ(m.num_elements(), 4);
  EXPECT_EQ(m.num_nodes(), 9);
  for (int mat : m.element_material) EXPECT_EQ(mat, 0);
}

TEST(Mesh, ElementsAreCounterclockwiseWithDistinctNodes) {
  const Mesh m = build_mesh(GeometrySpec{}, default_skin_layers());
  for (int e = 0; e < m.num_elements(); ++e) {
    const auto& el = m.elements[e];
    for (int a = 0; a < 4; ++a) {
      EXPECT_GE(el[a], 0);
      EXPECT_LT(el[a], m.num_nodes());
      for (int b = a + 1; b < 4; ++b) EXPECT_NE(el[a], el[b]);
    }
    const auto xy = m.element_coordinates(e);
    double area2 = 0.0;
    for (int a = 0; a < 4; ++a) {
      const int b = (a + 1) % 4;
      area2 += xy(a, 0) * xy(b, 1) - xy(b, 0) * xy(a, 1);
    }
    EXPECT_GT(area2, 0.0) << "element " << e;
  }
}

TEST(Mesh, JacobiansPositiveAtEveryGaussPoint) {
  const Mesh m = build_mesh(GeometrySpec{}, default_skin_layers());
  for (int e = 0; e < m.num_elements(); ++e) {
    EXPECT_GT(quad4::min_gauss_jacobian<double>(m.element_coordinates(e)), 0.0);
  }
  EXPECT_NO_THROW(check_element_jacobians(m));
}

TEST(Mesh, InvertedElementIsRejected) {
  Mesh m = build_mesh(unit_square_spec(), one_layer(1.0));
  // Pull the center node past its neighbours.
  m.nodes(4, 0) = 2.0;
  EXPECT_THROW(check_element_jacobians(m), NumericalError);
}

TEST(Mesh, SixLayerMaterialsMatchCentroidLayer) {
  GeometrySpec s;
  s.layer_thickness_mm = {0.2, 0.5, 1.5, 5.8, 1.0, 0.5};
  const auto layers = stack_layers(fingertip_material_table(), s.layer_thickness_mm);
  const Mesh m = build_mesh(s, layers);
  ASSERT_EQ(m.element_material.size(), m.elements.size());
  for (int e = 0; e < m.num_elements(); ++e) {
    const double depth = -m.centroid(e).y();
    int expected = -1;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      if (depth >= layers[l].top_mm && depth < layers[l].bottom_mm) expected = static_cast<int>(l);
    }
    EXPECT_EQ(m.element_material[e], expected) << "element " << e;
  }
}

TEST(Mesh, EdgeLengthsWithinBoundsAndGradedWithDepth) {
  const GeometrySpec s;
  const Mesh m = build_mesh(s, default_skin_layers());
  const double lo = s.surface_element_mm * (1.0 - 1e-9);
  const double hi = s.surface_element_mm * s.coarsening * (1.0 + 1e-9);
  for (int e = 0; e < m.num_elements(); ++e) {
    const auto xy = m.element_coordinates(e);
    for (int a = 0; a < 4; ++a) {
      const double len = (xy.row((a + 1) % 4) - xy.row(a)).norm();
      EXPECT_GE(len, lo);
      EXPECT_LE(len, hi);
    }
  }
  // Row heights down the left edge never shrink.
  double previous = 0.0;
  for (std::size_t r = 0; r + 1 < m.left_nodes.size(); ++r) {
    const double h = m.nodes(m.left_nodes[r], 1) - m.nodes(m.left_nodes[r + 1], 1);
    EXPECT_GE(h, previous * (1.0 - 1e-9));
    previous = h;
  }
  EXPECT_LE(m.num_elements(), 6000);
}

TEST(Mesh, AfferentNodeNearRequestedDepth) {
  GeometrySpec s;
  s.afferent_depth_mm[AfferentType::SA] = 0.7;
  const Mesh m = build_mesh(s, default_skin_layers());
  const int node = m.afferent_nodes.at(AfferentType::SA);
  // Brute-force nearest node.
  double best = std::numeric_limits<double>::infinity();
  for (int n = 0; n < m.num_nodes(); ++n) {
    best = std::min(best, std::hypot(m.nodes(n, 0) - s.centerline(), m.nodes(n, 1) + 0.7));
  }
  EXPECT_DOUBLE_EQ(std::hypot(m.nodes(node, 0) - s.centerline(), m.nodes(node, 1) + 0.7), best);
  EXPECT_NEAR(m.nodes(node, 1), -0.7, 0.05);
  EXPECT_EQ(m.afferent_nodes.size(), 3u);
}

TEST(Mesh, LocateAtZeroDepthGivesCenterSurfaceNode) {
  const Mesh m = build_mesh(GeometrySpec{}, default_skin_layers());
  const auto found = locate_afferent_nodes(m, {{AfferentType::SA, 0.0}}, 10.0);
  const int n = found.at(AfferentType::SA);
  EXPECT_DOUBLE_EQ(m.nodes(n, 1), 0.0);
  EXPECT_NEAR(m.nodes(n, 0), 10.0, 1e-12);
}

TEST(Mesh, LocateTieGoesToLowestId) {
  const Mesh m = build_mesh(unit_square_spec(), one_layer(1.0));
  // x = 0.25 is equidistant from the nodes at x = 0 and x = 0.5.
  const auto found = locate_afferent_nodes(m, {{AfferentType::RA, 0.0}}, 0.25);
  const int n = found.at(AfferentType::RA);
  int expected = -1;
  for (int i = 0; i < m.num_nodes(); ++i) {
    if (m.nodes(i, 1) == 0.0 && (m.nodes(i, 0) == 0.0 || m.nodes(i, 0) == 0.5)) {
      expected = expected < 0 ? i : std::min(expected, i);
    }
  }
  EXPECT_EQ(n, expected);
}

TEST(Mesh, DepthBelowDomainGivesDeepestCenterlineNode) {
  const GeometrySpec s;
  const Mesh m = build_mesh(s, default_skin_layers());
  const int n = locate_afferent_nodes(m, {{AfferentType::PC, 100.0}}, s.centerline()).at(AfferentType::PC);
  EXPECT_DOUBLE_EQ(m.nodes(n, 1), -s.depth_mm());
  EXPECT_NEAR(m.nodes(n, 0), s.centerline(), 1e-12);
}

TEST(Mesh, ValidationNamesTheField) {
  GeometrySpec s;
  s.domain_width_mm = 0.0;
  try {
    build_mesh(s, default_skin_layers());
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "domain_width_mm");
  }
  GeometrySpec thin;
  thin.layer_thickness_mm = {0.05, 0.65, 1.5, 5.8};
  EXPECT_THROW(build_mesh(thin, stack_layers(fingertip_material_table(), thin.layer_thickness_mm)),
               ValidationError);
}

TEST(Mesh, DeterministicAndRoundTrips) {
  const Mesh a = build_mesh(GeometrySpec{}, default_skin_layers());
  const Mesh b = build_mesh(GeometrySpec{}, default_skin_layers());
  EXPECT_EQ(mesh_to_string(a), mesh_to_string(b));

  std::istringstream in(mesh_to_string(a));
  const Mesh c = read_mesh(in);
  EXPECT_EQ(c.num_nodes(), a.num_nodes());
  EXPECT_EQ(c.elements, a.elements);
  EXPECT_EQ(c.element_material, a.element_material);
  EXPECT_EQ(c.afferent_nodes, a.afferent_nodes);
  EXPECT_EQ(c.surface_nodes, a.surface_nodes);
  EXPECT_TRUE(c.nodes == a.nodes);
  EXPECT_EQ(mesh_to_string(c), mesh_to_string(a));
}
