#pragma once
/// @file pressure.hpp
/// @brief Galerkin pressure problem  <kappa(theta) grad p, grad phi> = <g, phi>
/// on the continuous bilinear space, with Dirichlet data on Gamma_D and zero
/// flux on Gamma_N.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "cda/errors.hpp"
#include "cda/fields.hpp"
#include "cda/linalg.hpp"

namespace cda {

using ScalarFn = std::function<double(Point)>;
using SpaceTimeFn = std::function<double(Point, double)>;
/// kappa(x, theta); theta is clamped to [0, 1] before the call.
using MobilityFn = std::function<double(Point, double)>;

inline double clamp_unit(double theta) { return std::clamp(theta, 0.0, 1.0); }

struct PressureProblem {
  StructuredMesh mesh;
  MobilityFn mobility;
  ScalarFn source;                 // g
  ScalarFn dirichlet = nullptr;    // p on Gamma_D; zero when empty
};

inline double checked_mobility(const MobilityFn& kappa, const Point& x, double theta) {
  const double k = kappa(x, clamp_unit(theta));
  if (!(k > 0.0) || !std::isfinite(k))
    throw CoefficientViolation("mobility kappa = " + std::to_string(k) + " at (" +
                               std::to_string(x.x) + ", " + std::to_string(x.y) +
                               ") is not positive");
  return k;
}

/// Element stiffness K[a][b] = int kappa grad phi_b . grad phi_a (2x2 Gauss,
/// kappa evaluated at the Gauss points from the bilinear concentration) and
/// load F[a] = int g phi_a. The load uses a 2x2 Gauss rule on each of the four
/// corner quadrants; the same points give the quadrant integrals of g, so
/// sum_a F[a] == sum_a quadrant_source[a] up to rounding.
struct ElementPressureData {
  std::array<std::array<double, 4>, 4> stiffness{};
  std::array<double, 4> load{};
  std::array<double, 4> quadrant_source{};
};

inline ElementPressureData element_pressure_data(const PressureProblem& pb,
                                                 const NodalField& theta, std::size_t e) {
  const auto& m = pb.mesh;
  const auto& q = gauss2x2();
  const Rect r = m.element_rect(e);
  const double hx = r.x1 - r.x0, hy = r.y1 - r.y0, area = hx * hy;
  const auto th = theta.element_values(e);
  ElementPressureData out;
  for (std::size_t k = 0; k < q.points.size(); ++k) {
    const double u = q.points[k].x, v = q.points[k].y;
    const Point x{r.x0 + u * hx, r.y0 + v * hy};
    const double w = q.weights[k] * area;
    const double kap = checked_mobility(pb.mobility, x, element_value(th, u, v));
    const auto g = shape::gradients(u, v, hx, hy);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) out.stiffness[a][b] += w * kap * dot(g[a], g[b]);
  }
  if (!pb.source) return out;
  for (int c = 0; c < 4; ++c) {
    const Rect qr = quadrant_ref_rect(c);
    for (std::size_t k = 0; k < q.points.size(); ++k) {
      const double u = qr.x0 + 0.5 * q.points[k].x, v = qr.y0 + 0.5 * q.points[k].y;
      const double w = 0.25 * q.weights[k] * area;
      const double src = w * pb.source({r.x0 + u * hx, r.y0 + v * hy});
      const auto phi = shape::values(u, v);
      out.quadrant_source[c] += src;
      for (int a = 0; a < 4; ++a) out.load[a] += src * phi[a];
    }
  }
  return out;
}

/// Full-size system; Dirichlet rows are identity rows and their columns are
/// eliminated into the right-hand side so the matrix stays SPD.
inline LinearSystem assemble_pressure(const PressureProblem& pb, const NodalField& theta) {
  const auto& m = pb.mesh;
  if (!(theta.mesh() == m)) throw std::invalid_argument("assemble_pressure: mesh mismatch");
  const std::size_t n = m.num_vertices();
  std::vector<Triplet> trip;
  trip.reserve(16 * m.num_elements());
  std::vector<double> rhs(n, 0.0);
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    const auto vs = m.element_vertices(e);
    const auto d = element_pressure_data(pb, theta, e);
    for (int a = 0; a < 4; ++a) {
      rhs[vs[a]] += d.load[a];
      for (int b = 0; b < 4; ++b) trip.push_back({vs[a], vs[b], d.stiffness[a][b]});
    }
  }
  LinearSystem sys{assemble(n, std::move(trip)), std::move(rhs)};
  std::vector<char> fixed(n, 0);
  std::vector<double> value(n, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    if (m.is_dirichlet(v)) {
      fixed[v] = 1;
      value[v] = pb.dirichlet ? pb.dirichlet(m.vertex(v)) : 0.0;
    }
  }
  sys.matrix.constrain(fixed, value, sys.rhs, /*symmetric=*/true);
  return sys;
}

struct PressureSolution {
  NodalField pressure;
  SolveReport report;
};

inline PressureSolution solve_pressure_report(const PressureProblem& pb, const NodalField& theta,
                                              SolverConfig cfg,
                                              const NodalField* initial_guess = nullptr) {
  const auto& m = pb.mesh;
  auto sys = assemble_pressure(pb, theta);
  std::vector<double> x0(m.num_vertices(), 0.0);
  if (initial_guess) x0 = initial_guess->data();
  for (std::size_t v = 0; v < m.num_vertices(); ++v)
    if (m.is_dirichlet(v)) x0[v] = sys.rhs[v];
  cfg.method = SolverMethod::cg;
  auto res = solve(sys.matrix, sys.rhs, cfg, std::move(x0));
  for (std::size_t v = 0; v < m.num_vertices(); ++v)
    if (m.is_dirichlet(v)) res.x[v] = sys.rhs[v];
  return {NodalField(m, std::move(res.x)), std::move(res.report)};
}

inline NodalField solve_pressure(const PressureProblem& pb, const NodalField& theta,
                                 const SolverConfig& cfg) {
  return solve_pressure_report(pb, theta, cfg).pressure;
}

/// Discrete energy (int kappa |grad p|^2)^(1/2) with the assembly quadrature.
inline double pressure_energy_norm(const PressureProblem& pb, const NodalField& theta,
                                   const NodalField& p) {
  double s = 0.0;
  for (std::size_t e = 0; e < pb.mesh.num_elements(); ++e) {
    const auto d = element_pressure_data(pb, theta, e);
    const auto pv = p.element_values(e);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) s += pv[a] * d.stiffness[a][b] * pv[b];
  }
  return std::sqrt(std::max(s, 0.0));
}

} // namespace cda
