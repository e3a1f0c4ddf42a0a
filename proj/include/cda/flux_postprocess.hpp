#pragma once
/// @file flux_postprocess.hpp
/// @brief Element-local postprocessing of a continuous Galerkin pressure into
/// a discontinuous bilinear potential Psi whose normal flux
/// -kappa grad Psi . n is conservative on every control volume.
///
/// On each element tau and for each corner a the local equation reads
///
///   sum over the two interior faces s of quadrant a of  -kappa grad Psi . n_a |s|
///     =  <{kappa grad p} . n, I phi_a - phi_a>_{boundary of tau}
///      + <g, I phi_a - phi_a>_tau + <kappa grad p, grad phi_a>_tau
///
/// where I phi_a is the indicator of quadrant a and {.} the average of the two
/// one-sided values on an interior edge. Interior-face integrals use the face
/// midpoint; edge integrals use the midpoint of each half-edge; the volume
/// terms reuse the pressure assembly quadrature, which makes the sum of the
/// local equations around a vertex collapse to the global Galerkin equation.
/// On Neumann edges the edge flux is the boundary value, zero.

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "cda/errors.hpp"
#include "cda/fields.hpp"
#include "cda/mesh.hpp"
#include "cda/pressure.hpp"

namespace cda {

struct ConservativeFlux {
  DGField psi;
  /// Four per element, in element_segments order: integral of
  /// -kappa grad Psi . n over the face, n pointing from quadrant `from` to `to`.
  std::vector<double> segment_flux;
  /// Outward flux through the part of each control volume on the domain
  /// boundary (zero on Neumann faces).
  std::vector<double> boundary_outflow;
  /// Outflow minus source integral per control volume; zero for Dirichlet
  /// vertices, which carry no balance equation.
  std::vector<double> cv_residual;
  /// Source integral over each control volume (same quadrature as the balance).
  std::vector<double> cv_source;
  double source_norm = 0.0; // ||g||_L2

  const StructuredMesh& mesh() const { return psi.mesh(); }

  double max_residual() const {
    double r = 0.0;
    for (double v : cv_residual) r = std::max(r, std::abs(v));
    return r;
  }

  /// Tolerance of the balance check: 1e-10 max(1, ||g||).
  double residual_tolerance() const { return 1e-10 * std::max(1.0, source_norm); }
};

namespace detail {

/// 4x4 dense solve with partial pivoting. Returns false if singular.
inline bool solve4(std::array<std::array<double, 4>, 4> A, std::array<double, 4> b,
                   std::array<double, 4>& x) {
  double scale = 0.0;
  for (const auto& row : A)
    for (double v : row) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return false;
  for (int c = 0; c < 4; ++c) {
    int piv = c;
    for (int r = c + 1; r < 4; ++r)
      if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
    if (std::abs(A[piv][c]) <= 1e-13 * scale) return false;
    std::swap(A[piv], A[c]);
    std::swap(b[piv], b[c]);
    for (int r = c + 1; r < 4; ++r) {
      const double f = A[r][c] / A[c][c];
      for (int k = c; k < 4; ++k) A[r][k] -= f * A[c][k];
      b[r] -= f * b[c];
    }
  }
  for (int r = 3; r >= 0; --r) {
    double s = b[r];
    for (int k = r + 1; k < 4; ++k) s -= A[r][k] * x[k];
    x[r] = s / A[r][r];
  }
  return true;
}

// Element edges in local terms: corners (c0, c1) in increasing coordinate
// order, outward normal, and whether the edge is vertical.
struct ElementEdge {
  int c0, c1;
  Vec2 normal;
  bool vertical;
};

inline constexpr std::array<ElementEdge, 4> element_edges{{
    {0, 1, {0.0, -1.0}, false}, // bottom
    {1, 2, {1.0, 0.0}, true},   // right
    {3, 2, {0.0, 1.0}, false},  // top
    {0, 3, {-1.0, 0.0}, true},  // left
}};

/// Averaged flux density {kappa grad p} . e at the two quarter points of every
/// mesh edge, e = +x for vertical edges and +y for horizontal ones. Single
/// valued per edge, so contributions from the two sides cancel exactly.
struct EdgeFluxTable {
  // vertical edge (i, j): x = x_i, y in [y_j, y_j+1]; index j * (nx + 1) + i
  std::vector<std::array<double, 2>> vertical;
  // horizontal edge (i, j): y = y_j, x in [x_i, x_i+1]; index j * nx + i
  std::vector<std::array<double, 2>> horizontal;
};

inline EdgeFluxTable edge_flux_table(const PressureProblem& pb, const NodalField& p,
                                     const NodalField& theta) {
  const auto& m = pb.mesh;
  const std::size_t nx = m.nx(), ny = m.ny();
  const double hx = m.hx(), hy = m.hy();
  const auto& bs = m.boundary();
  EdgeFluxTable t;
  t.vertical.assign((nx + 1) * ny, {0.0, 0.0});
  t.horizontal.assign(nx * (ny + 1), {0.0, 0.0});

  auto one_side = [&](std::size_t e, double u, double v, bool x_component) {
    const auto g = element_gradient(p.element_values(e), u, v, hx, hy);
    return x_component ? g.x : g.y;
  };
  auto kappa_at = [&](std::size_t e, double u, double v) {
    const Rect r = m.element_rect(e);
    const Point x{r.x0 + u * hx, r.y0 + v * hy};
    return checked_mobility(pb.mobility, x, element_value(theta.element_values(e), u, v));
  };

  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i <= nx; ++i) {
      auto& out = t.vertical[j * (nx + 1) + i];
      const bool left_bnd = i == 0, right_bnd = i == nx;
      if ((left_bnd && bs[Side::left] == BoundaryTag::neumann) ||
          (right_bnd && bs[Side::right] == BoundaryTag::neumann))
        continue;
      for (int h = 0; h < 2; ++h) {
        const double v = h == 0 ? 0.25 : 0.75;
        if (left_bnd) {
          const std::size_t e = m.element_index(0, j);
          out[h] = kappa_at(e, 0.0, v) * one_side(e, 0.0, v, true);
        } else if (right_bnd) {
          const std::size_t e = m.element_index(nx - 1, j);
          out[h] = kappa_at(e, 1.0, v) * one_side(e, 1.0, v, true);
        } else {
          const std::size_t el = m.element_index(i - 1, j), er = m.element_index(i, j);
          const double k = kappa_at(el, 1.0, v);
          out[h] = k * 0.5 * (one_side(el, 1.0, v, true) + one_side(er, 0.0, v, true));
        }
      }
    }
  }
  for (std::size_t j = 0; j <= ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      auto& out = t.horizontal[j * nx + i];
      const bool bot = j == 0, top = j == ny;
      if ((bot && bs[Side::bottom] == BoundaryTag::neumann) ||
          (top && bs[Side::top] == BoundaryTag::neumann))
        continue;
      for (int h = 0; h < 2; ++h) {
        const double u = h == 0 ? 0.25 : 0.75;
        if (bot) {
          const std::size_t e = m.element_index(i, 0);
          out[h] = kappa_at(e, u, 0.0) * one_side(e, u, 0.0, false);
        } else if (top) {
          const std::size_t e = m.element_index(i, ny - 1);
          out[h] = kappa_at(e, u, 1.0) * one_side(e, u, 1.0, false);
        } else {
          const std::size_t eb = m.element_index(i, j - 1), et = m.element_index(i, j);
          const double k = kappa_at(eb, u, 1.0);
          out[h] = k * 0.5 * (one_side(eb, u, 1.0, false) + one_side(et, u, 0.0, false));
        }
      }
    }
  }
  return t;
}

/// {kappa grad p} . e at the quarter points of local edge `k` of element e.
inline std::array<double, 2> edge_values(const StructuredMesh& m, const EdgeFluxTable& t,
                                         std::size_t e, int k) {
  const std::size_t i = m.element_i(e), j = m.element_j(e), nx = m.nx();
  switch (k) {
  case 0: return t.horizontal[j * nx + i];
  case 1: return t.vertical[j * (nx + 1) + i + 1];
  case 2: return t.horizontal[(j + 1) * nx + i];
  default: return t.vertical[j * (nx + 1) + i];
  }
}

} // namespace detail

/// Local system of one element: matrix rows are the corner balances, the
/// right-hand side the postprocessing functional.
struct LocalFluxSystem {
  std::array<std::array<double, 4>, 4> matrix{};
  std::array<double, 4> rhs{};
  std::array<double, 4> segment_coeff_kappa{}; // kappa * |s| at each face midpoint
};

inline LocalFluxSystem local_flux_system(const PressureProblem& pb, const NodalField& p,
                                         const NodalField& theta,
                                         const detail::EdgeFluxTable& table, std::size_t e) {
  const auto& m = pb.mesh;
  const double hx = m.hx(), hy = m.hy();
  const Rect r = m.element_rect(e);
  const auto th = theta.element_values(e);
  LocalFluxSystem L;

  // Interior faces: flux of basis function b across face s is
  // -kappa |s| grad phi_b(mid) . n_s; quadrant `from` loses it, `to` gains it.
  for (std::size_t s = 0; s < element_segments.size(); ++s) {
    const auto& seg = element_segments[s];
    const Point x{r.x0 + seg.mid_u * hx, r.y0 + seg.mid_v * hy};
    const double kl = checked_mobility(pb.mobility, x, element_value(th, seg.mid_u, seg.mid_v)) *
                      segment_length(m, seg);
    L.segment_coeff_kappa[s] = kl;
    const auto g = shape::gradients(seg.mid_u, seg.mid_v, hx, hy);
    for (int b = 0; b < 4; ++b) {
      const double fb = -kl * dot(g[b], seg.normal);
      L.matrix[seg.from][b] += fb;
      L.matrix[seg.to][b] -= fb;
    }
  }

  // Edge term <{kappa grad p}.n, I phi_a - phi_a>: midpoint of each half edge.
  for (int k = 0; k < 4; ++k) {
    const auto& ed = detail::element_edges[k];
    const auto vals = detail::edge_values(m, table, e, k);
    const double sign = (ed.normal.x + ed.normal.y) > 0 ? 1.0 : -1.0;
    const double half = 0.5 * (ed.vertical ? hy : hx);
    for (int h = 0; h < 2; ++h) {
      const double flux_n = sign * vals[h] * half;
      const double t = h == 0 ? 0.25 : 0.75; // position along the edge from c0
      const int near = h == 0 ? ed.c0 : ed.c1;
      // I phi_a - phi_a at the half-edge midpoint
      L.rhs[ed.c0] += flux_n * ((near == ed.c0 ? 1.0 : 0.0) - (1.0 - t));
      L.rhs[ed.c1] += flux_n * ((near == ed.c1 ? 1.0 : 0.0) - t);
    }
  }

  // Volume terms.
  const auto d = element_pressure_data(pb, theta, e);
  const auto pv = p.element_values(e);
  for (int a = 0; a < 4; ++a) {
    double kp = 0.0;
    for (int b = 0; b < 4; ++b) kp += d.stiffness[a][b] * pv[b];
    L.rhs[a] += d.quadrant_source[a] - d.load[a] + kp;
  }
  return L;
}

/// Solve the element-local problems and record the control-volume balance.
/// The one-dimensional kernel (constants) of each local system is fixed by
/// matching the element mean of Psi to that of p.
inline ConservativeFlux postprocess_flux(const PressureProblem& pb, const NodalField& pressure,
                                         const NodalField& theta) {
  const auto& m = pb.mesh;
  if (!(pressure.mesh() == m) || !(theta.mesh() == m))
    throw std::invalid_argument("postprocess_flux: mesh mismatch");
  const auto table = detail::edge_flux_table(pb, pressure, theta);

  ConservativeFlux out;
  out.psi = DGField(m);
  out.segment_flux.assign(4 * m.num_elements(), 0.0);
  out.boundary_outflow.assign(m.num_vertices(), 0.0);
  out.cv_residual.assign(m.num_vertices(), 0.0);
  out.cv_source.assign(m.num_vertices(), 0.0);

  std::vector<double> outflow(m.num_vertices(), 0.0);
  double g2 = 0.0;
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    const auto L = local_flux_system(pb, pressure, theta, table, e);
    const auto pv = pressure.element_values(e);
    auto A = L.matrix;
    auto b = L.rhs;
    A[3] = {1.0, 1.0, 1.0, 1.0};
    b[3] = pv[0] + pv[1] + pv[2] + pv[3];
    std::array<double, 4> psi{};
    if (!detail::solve4(A, b, psi))
      throw ElementSingular(e, "flux postprocess: singular local system on element " +
                                   std::to_string(e));
    for (int a = 0; a < 4; ++a) out.psi.at(e, a) = psi[a];

    const auto vs = m.element_vertices(e);
    for (std::size_t s = 0; s < element_segments.size(); ++s) {
      const auto& seg = element_segments[s];
      const auto g = element_gradient(psi, seg.mid_u, seg.mid_v, m.hx(), m.hy());
      const double f = -L.segment_coeff_kappa[s] * dot(g, seg.normal);
      out.segment_flux[4 * e + s] = f;
      outflow[vs[seg.from]] += f;
      outflow[vs[seg.to]] -= f;
    }

    const auto d = element_pressure_data(pb, theta, e);
    for (int a = 0; a < 4; ++a) out.cv_source[vs[a]] += d.quadrant_source[a];

    // boundary outflow with the same half-edge values
    for (int k = 0; k < 4; ++k) {
      const auto& ed = detail::element_edges[k];
      const bool on_bnd = (k == 0 && m.element_j(e) == 0) ||
                          (k == 1 && m.element_i(e) + 1 == m.nx()) ||
                          (k == 2 && m.element_j(e) + 1 == m.ny()) ||
                          (k == 3 && m.element_i(e) == 0);
      if (!on_bnd) continue;
      const auto vals = detail::edge_values(m, table, e, k);
      const double sign = (ed.normal.x + ed.normal.y) > 0 ? 1.0 : -1.0;
      const double half = 0.5 * (ed.vertical ? m.hy() : m.hx());
      out.boundary_outflow[vs[ed.c0]] -= sign * vals[0] * half;
      out.boundary_outflow[vs[ed.c1]] -= sign * vals[1] * half;
    }
  }
  if (pb.source) g2 = l2_norm(m, pb.source);
  out.source_norm = g2;

  for (std::size_t v = 0; v < m.num_vertices(); ++v) {
    if (m.is_dirichlet(v)) continue;
    out.cv_residual[v] = outflow[v] + out.boundary_outflow[v] - out.cv_source[v];
  }
  return out;
}

/// Normal Darcy velocity on an interior control-volume face (flux / length),
/// positive from quadrant `from` to `to` of element_segments[segment].
inline double face_velocity(const ConservativeFlux& flux, std::size_t element, int segment) {
  return flux.segment_flux[4 * element + static_cast<std::size_t>(segment)] /
         segment_length(flux.mesh(), element_segments[static_cast<std::size_t>(segment)]);
}

/// Control-volume balance of the raw Galerkin flux -kappa grad p . n (face
/// midpoints, zero on Neumann faces). Contrast for the postprocessed flux.
inline std::vector<double> raw_fem_cv_residual(const PressureProblem& pb,
                                               const NodalField& pressure,
                                               const NodalField& theta) {
  const auto& m = pb.mesh;
  std::vector<double> out(m.num_vertices(), 0.0);
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    const auto vs = m.element_vertices(e);
    const auto th = theta.element_values(e);
    const auto pv = pressure.element_values(e);
    const Rect r = m.element_rect(e);
    for (const auto& seg : element_segments) {
      const Point x{r.x0 + seg.mid_u * m.hx(), r.y0 + seg.mid_v * m.hy()};
      const double k = checked_mobility(pb.mobility, x, element_value(th, seg.mid_u, seg.mid_v));
      const auto g = element_gradient(pv, seg.mid_u, seg.mid_v, m.hx(), m.hy());
      const double f = -k * dot(g, seg.normal) * segment_length(m, seg);
      out[vs[seg.from]] += f;
      out[vs[seg.to]] -= f;
    }
    const auto d = element_pressure_data(pb, theta, e);
    for (int a = 0; a < 4; ++a) out[vs[a]] -= d.quadrant_source[a];
  }
  for (std::size_t v = 0; v < m.num_vertices(); ++v)
    if (m.is_dirichlet(v)) out[v] = 0.0;
  return out;
}

} // namespace cda
