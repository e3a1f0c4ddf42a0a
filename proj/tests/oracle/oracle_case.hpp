#pragma once
// One Algorithm-1 coarse step on a 4x4 mesh, computed by the library and by
// the dense oracle. Heterogeneous kappa(x, theta), mixed boundary, source,
// reaction, diffusion and nudging all switched on.

#include <cmath>
#include <vector>

#include "cda/cda.hpp"
#include "oracle.hpp"

namespace oracle {

struct StepComparison {
  double pressure_matrix = 0, pressure_rhs = 0, pressure = 0;
  double psi = 0, segment_flux = 0;
  double transport_matrix = 0, transport_rhs = 0, theta = 0;
  double max() const {
    return std::max({pressure_matrix, pressure_rhs, pressure, psi, segment_flux, transport_matrix,
                     transport_rhs, theta});
  }
};

inline StepComparison compare_coarse_step() {
  using namespace cda;
  const std::size_t N = 4;
  const double lx = 1.0, ly = 1.0;
  const auto mesh = build_mesh(N, N, lx, ly, BoundarySpec::dirichlet_left_right());

  const auto kappa = [](Point x, double th) {
    return (1.0 + 0.5 * std::sin(3.0 * x.x + 1.0) * std::cos(2.0 * x.y)) / (1.0 + th * th);
  };
  const auto g = [](Point x) { return std::exp(-4.0 * ((x.x - 0.4) * (x.x - 0.4) + (x.y - 0.6) * (x.y - 0.6))) - 0.3; };
  const auto pd = [](Point x) { return 1.0 - x.x + 0.2 * x.y; };
  const auto D = [](Point x) { return 0.1 + 0.05 * x.x * x.y; };
  const auto q = [](Point x) { return 0.5 + x.y; };
  const auto f = [](Point x, double t) { return std::cos(x.x + 2.0 * x.y) * (1.0 + t); };
  const auto theta0 = [](Point x) { return 0.2 + 0.6 * x.x * (1.0 - x.y) + 0.1 * x.y; };
  const double mu = 3.0, hbar = 0.5, t0 = 0.1, t1 = 0.15;

  NodalField theta = interpolate(mesh, theta0);
  // the Dirichlet rows of the transport step carry zero
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
    if (mesh.is_dirichlet(v)) theta[v] = 0.0;

  const PressureProblem pb{mesh, kappa, g, pd};
  const auto psys = assemble_pressure(pb, theta);
  const NodalField p(mesh, [&] {
    SolverConfig c{SolverMethod::cg, Preconditioner::jacobi, 1e-15, 1e-15, 0, {}};
    return solve_pressure(pb, theta, c).data();
  }());
  const auto flux = postprocess_flux(pb, p, theta);

  const SparseGrid grid(mesh, hbar);
  ObservationStream obs;
  std::vector<double> y0(grid.num_points()), y1(grid.num_points());
  for (std::size_t i = 0; i < y0.size(); ++i) {
    const Point x = grid.point(i);
    y0[i] = 0.3 + 0.2 * x.x + 0.1 * x.y;
    y1[i] = 0.35 + 0.1 * x.x * x.y;
  }
  obs.append(t0, y0);
  obs.append(t1, y1);
  TransportCoefficients tc{D, q, f, nullptr, mu};
  TransportOperator op(mesh, tc, t1 - t0, &grid);
  op.set_advection(AdvectionField::from_flux(flux));
  const auto tsys = op.system(theta, {t0, t1}, &obs);
  SolverConfig bc{SolverMethod::bicgstab, Preconditioner::jacobi, 1e-15, 1e-16, 0, {}};
  const auto theta_new = op.advance(theta, {t0, t1}, &obs, bc);

  // oracle
  Grid og{static_cast<int>(N), static_cast<int>(N), lx, ly};
  og.dir_bottom = og.dir_top = false;
  auto okappa = [&](P x, double th) { return kappa({x.x, x.y}, th); };
  auto og_g = [&](P x) { return g({x.x, x.y}); };
  auto og_pd = [&](P x) { return pd({x.x, x.y}); };
  const auto& th = theta.data();
  const auto ops = pressure(og, okappa, og_g, og_pd, th);
  const auto ofl = postprocess(og, okappa, og_g, ops.p, th);
  const auto otr = transport(
      og, [&](P x) { return D({x.x, x.y}); }, [&](P x) { return q({x.x, x.y}); },
      [&](P x, double t) { return f({x.x, x.y}, t); }, ofl.face, mu, 2, y0, y1, th, t0, t1);

  StepComparison c;
  auto upd = [](double& m, double a, double b) { m = std::max(m, std::abs(a - b)); };
  const std::size_t n = mesh.num_vertices();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < n; ++k) {
      upd(c.pressure_matrix, psys.matrix.at(r, k), ops.A[r][k]);
      upd(c.transport_matrix, tsys.matrix.at(r, k), otr.lhs[r][k]);
    }
    upd(c.pressure_rhs, psys.rhs[r], ops.b[r]);
    upd(c.pressure, p[r], ops.p[r]);
    upd(c.transport_rhs, tsys.rhs[r], otr.rhs[r]);
    upd(c.theta, theta_new[r], otr.theta_new[r]);
  }
  for (std::size_t e = 0; e < mesh.num_elements(); ++e)
    for (int a = 0; a < 4; ++a) {
      upd(c.psi, flux.psi.at(e, a), ofl.psi[e][a]);
      upd(c.segment_flux, flux.segment_flux[4 * e + a], ofl.face[e][a]);
    }
  return c;
}

} // namespace oracle
