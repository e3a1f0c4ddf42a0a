#include <gtest/gtest.h>

#include <random>

#include "cda/fields.hpp"

using namespace cda;

namespace {
StructuredMesh unit(std::size_t n) { return build_mesh(n, n, 1.0, 1.0, {}); }
}

TEST(Fields, PartitionOfUnityAndLinears) {
  const auto m = unit(5);
  const NodalField one(m, 1.0);
  const auto x1 = interpolate(m, [](Point p) { return p.x; });
  for (Point p : {Point{0.13, 0.77}, Point{0.5, 0.5}, Point{1.0, 0.0}, Point{0.999, 0.31}}) {
    EXPECT_NEAR(eval(one, p), 1.0, 1e-15);
    EXPECT_NEAR(eval(x1, p), p.x, 1e-15);
    const auto g = grad(x1, p);
    EXPECT_NEAR(g.x, 1.0, 1e-13);
    EXPECT_NEAR(g.y, 0.0, 1e-13);
    const auto g0 = grad(one, p);
    EXPECT_NEAR(g0.x, 0.0, 1e-14);
    EXPECT_NEAR(g0.y, 0.0, 1e-14);
  }
  EXPECT_EQ(eval(x1, m.vertex(7)), x1[7]);
}

TEST(Fields, CenterIsCornerMean) {
  const auto m = unit(4);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(-1, 1);
  NodalField f(m);
  for (auto& v : f.data()) v = d(rng);
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    const auto c = f.element_values(e);
    EXPECT_NEAR(eval(f, m.element_rect(e).center(), e), 0.25 * (c[0] + c[1] + c[2] + c[3]), 1e-15);
  }
}

TEST(Fields, GradientOfProductAtCenter) {
  const auto m = unit(1);
  const auto f = interpolate(m, [](Point p) { return p.x * p.y; });
  const auto g = grad(f, {0.5, 0.5});
  EXPECT_DOUBLE_EQ(g.x, 0.5);
  EXPECT_DOUBLE_EQ(g.y, 0.5);
}

TEST(Fields, InterpConst) {
  const auto m = unit(2);
  DGField d(m, 0.7);
  for (double c : interp_const(d, 3)) EXPECT_EQ(c, 0.7);
  for (int a = 0; a < 4; ++a) d.at(1, a) = a + 1.0;
  const auto c = interp_const(d, 1);
  for (int a = 0; a < 4; ++a) EXPECT_EQ(c[a], a + 1.0);
  // integral of the quadrant-constant interpolant = (area/4) * sum of corners
  double s = 0.0;
  for (int a = 0; a < 4; ++a) s += c[a] * quadrant_rect(m, 1, a).area();
  EXPECT_DOUBLE_EQ(s, m.element_rect(1).area() / 4.0 * 10.0);
}

TEST(Fields, QuadrantMomentsAreExact) {
  // moments of phi_b over the quadrant of corner a, against 3x3 Gauss
  const auto m = unit(1);
  for (int a = 0; a < 4; ++a) {
    const auto w = quadrant_moments(a);
    for (int b = 0; b < 4; ++b) {
      NodalField phi(m, 0.0);
      phi[m.element_vertices(0)[b]] = 1.0;
      const double exact = integrate(quadrant_rect(m, 0, a), [&](Point p) { return eval(phi, p, 0); },
                                     gauss3x3());
      EXPECT_NEAR(w[b] * 0.25, exact, 1e-15);
    }
  }
}

TEST(Fields, NormsAndCvIntegrals) {
  const auto m = unit(8);
  const auto f = interpolate(m, [](Point p) { return 1.0 + p.x; });
  double s = 0.0;
  for (double v : control_volume_integrals(f)) s += v;
  EXPECT_NEAR(s, 1.5, 1e-14);
  EXPECT_NEAR(l2_norm(NodalField(m, 2.0)), 2.0, 1e-14);
  EXPECT_NEAR(l2_distance(f, [](Point p) { return 1.0 + p.x; }), 0.0, 1e-14);
  EXPECT_THROW(eval(f, {1.2, 0.5}), OutOfDomain);
  EXPECT_THROW(NodalField(m, std::vector<double>(3)), std::invalid_argument);
}
