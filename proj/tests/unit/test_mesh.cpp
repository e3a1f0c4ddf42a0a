#include <gtest/gtest.h>

#include "cda/mesh.hpp"

using namespace cda;

TEST(Mesh, CountsAndDualAreas2x2) {
  const auto m = build_mesh(2, 2, 1.0, 1.0, BoundarySpec::all_dirichlet());
  EXPECT_EQ(m.num_vertices(), 9u);
  EXPECT_EQ(m.num_elements(), 4u);
  const auto cvs = control_volumes(m);
  EXPECT_DOUBLE_EQ(cvs[m.vertex_index(0, 0)].area(), 1.0 / 16.0);
  EXPECT_DOUBLE_EQ(cvs[m.vertex_index(1, 0)].area(), 1.0 / 8.0);
  const auto& c = cvs[m.vertex_index(1, 1)];
  EXPECT_DOUBLE_EQ(c.area(), 0.25);
  EXPECT_DOUBLE_EQ(c.rect.x0, 0.25);
  EXPECT_DOUBLE_EQ(c.rect.x1, 0.75);
  EXPECT_DOUBLE_EQ(c.rect.y0, 0.25);
  EXPECT_DOUBLE_EQ(c.rect.y1, 0.75);
}

TEST(Mesh, AreasPartitionDomain) {
  const auto m = build_mesh(7, 5, 2.5, 1.3, BoundarySpec::dirichlet_left_right());
  double s = 0.0;
  for (const auto& cv : control_volumes(m)) s += cv.area();
  EXPECT_NEAR(s, 2.5 * 1.3, 1e-14 * 2.5 * 1.3);
}

TEST(Mesh, FacesCloseEachControlVolume) {
  const auto m = build_mesh(4, 3, 1.0, 2.0, BoundarySpec::all_neumann());
  for (const auto& cv : control_volumes(m)) {
    double sx = 0.0, sy = 0.0;
    for (const auto& f : cv.faces) {
      sx += f.length * f.normal.x;
      sy += f.length * f.normal.y;
      EXPECT_NE(f.neighbor.has_value(), f.boundary.has_value());
    }
    EXPECT_NEAR(sx, 0.0, 1e-14);
    EXPECT_NEAR(sy, 0.0, 1e-14);
  }
}

TEST(Mesh, InteriorFacesPairWithOppositeNormals) {
  const auto m = build_mesh(3, 3, 1.0, 1.0, BoundarySpec::all_dirichlet());
  const auto cvs = control_volumes(m);
  for (const auto& cv : cvs)
    for (const auto& f : cv.faces) {
      if (!f.neighbor) continue;
      int matches = 0;
      for (const auto& g : cvs[*f.neighbor].faces)
        if (g.neighbor == cv.owner && g.midpoint == f.midpoint) {
          ++matches;
          EXPECT_EQ(g.normal.x, -f.normal.x);
          EXPECT_EQ(g.normal.y, -f.normal.y);
        }
      EXPECT_EQ(matches, 1);
    }
}

TEST(Mesh, Example2Tagging) {
  const auto m = build_mesh(50, 50, 1.0, 1.0, BoundarySpec::dirichlet_left_right());
  EXPECT_TRUE(m.is_dirichlet(m.vertex_index(0, 20)));
  EXPECT_TRUE(m.is_dirichlet(m.vertex_index(50, 0)));
  EXPECT_FALSE(m.is_dirichlet(m.vertex_index(20, 0)));
  EXPECT_FALSE(m.is_dirichlet(m.vertex_index(20, 50)));
  // every boundary vertex carries exactly one tag
  for (std::size_t v = 0; v < m.num_vertices(); ++v)
    if (!m.on_boundary(v)) EXPECT_FALSE(m.is_dirichlet(v));
}

TEST(Mesh, Example1Spacing) {
  const auto m = build_mesh(100, 100, 1.0, 1.0, BoundarySpec::all_dirichlet());
  EXPECT_DOUBLE_EQ(m.hx(), 0.01);
  EXPECT_EQ(m.x_coord(100), 1.0);
}

TEST(Mesh, RejectsBadInput) {
  EXPECT_THROW(build_mesh(0, 2, 1.0, 1.0, {}), std::invalid_argument);
  EXPECT_THROW(build_mesh(2, 2, -1.0, 1.0, {}), std::invalid_argument);
  const auto m = build_mesh(2, 2, 1.0, 1.0, {});
  EXPECT_THROW(m.locate({1.5, 0.5}), OutOfDomain);
}
