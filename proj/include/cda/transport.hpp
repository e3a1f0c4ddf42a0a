#pragma once
/// @file transport.hpp
/// @brief One trapezoidal finite volume element step for
///
///   theta_t - div(D grad theta - u theta) + q theta = f - mu P_hbar(theta - theta_obs)
///
/// on the dual control volumes. The trial space is the continuous bilinear
/// space, so the accumulation term uses the exact consistent CV mass
/// M[zeta][xi] = int_{omega_zeta} phi_xi. Diffusive fluxes use the bilinear
/// gradient at CV face midpoints; advective fluxes use the upwind vertex value
/// times the integrated face flux of the advecting field.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cda/errors.hpp"
#include "cda/fields.hpp"
#include "cda/flux_postprocess.hpp"
#include "cda/linalg.hpp"
#include "cda/mesh.hpp"
#include "cda/observation.hpp"
#include "cda/pressure.hpp"

namespace cda {

struct TransportCoefficients {
  ScalarFn diffusion;             // D(x)
  ScalarFn reaction = nullptr;    // q(x); zero when empty
  SpaceTimeFn source = nullptr;   // f(x, t); zero when empty
  SpaceTimeFn dirichlet = nullptr; // theta on Gamma_D; zero when empty
  double mu = 0.0;
};

/// Integrated normal flux through the four interior CV segments of every
/// element, oriented as in element_segments (from quadrant `from` to `to`).
struct AdvectionField {
  std::vector<double> segment_flux;

  static AdvectionField zero(const StructuredMesh& m) {
    return {std::vector<double>(4 * m.num_elements(), 0.0)};
  }

  static AdvectionField from_flux(const ConservativeFlux& flux) { return {flux.segment_flux}; }

  /// Prescribed velocity sampled at the segment midpoints.
  static AdvectionField from_velocity(const StructuredMesh& m,
                                      const std::function<Vec2(Point)>& velocity) {
    AdvectionField a{std::vector<double>(4 * m.num_elements())};
    for (std::size_t e = 0; e < m.num_elements(); ++e)
      for (int s = 0; s < 4; ++s) {
        const auto& seg = element_segments[s];
        a.segment_flux[4 * e + s] =
            dot(velocity(segment_midpoint(m, e, seg)), seg.normal) * segment_length(m, seg);
      }
    return a;
  }
};

struct TransportStep {
  double t_old = 0.0;
  double t_new = 0.0;
  double dt() const { return t_new - t_old; }
};

/// Per-step mass audit over the free (non-Dirichlet) control volumes:
/// accumulation + dt * avg(outflow) - dt * avg(sources) = residual.
/// relative() scales by the largest balance term or the mass inventory
/// sum |int_omega theta_new|, whichever is larger.
struct MassBalance {
  double accumulation = 0.0;
  double outflow = 0.0; // time integral of the flux leaving the free region
  double sources = 0.0; // time integral of f - q theta - mu P(theta - obs)
  double inventory = 0.0;
  double residual = 0.0;
  double relative() const {
    const double s = std::max({std::abs(accumulation), std::abs(outflow), std::abs(sources), inventory});
    return s > 0.0 ? std::abs(residual) / s : std::abs(residual);
  }
};

/// Step matrices for a fixed time step, cached between calls. The static
/// part (mass, diffusion, reaction, nudging) is built once; set_advection
/// rebuilds only the upwind part and the combined matrices.
class TransportOperator {
public:
  TransportOperator(const StructuredMesh& mesh, TransportCoefficients coeffs, double dt,
                    const SparseGrid* grid = nullptr)
      : mesh_(mesh), coeffs_(std::move(coeffs)), dt_(dt), grid_(grid) {
    if (!(dt > 0.0)) throw std::invalid_argument("transport: dt must be positive");
    if (coeffs_.mu < 0.0) throw std::invalid_argument("transport: mu must be nonnegative");
    if (coeffs_.mu > 0.0 && !grid_)
      throw std::invalid_argument("transport: nudging needs an observation grid");
    if (grid_ && !(grid_->mesh() == mesh_))
      throw std::invalid_argument("transport: observation grid on a different mesh");
    fixed_.assign(mesh_.num_vertices(), 0);
    for (std::size_t v = 0; v < mesh_.num_vertices(); ++v) fixed_[v] = mesh_.is_dirichlet(v);
    build_static();
    set_advection(AdvectionField::zero(mesh_));
  }

  const StructuredMesh& mesh() const { return mesh_; }
  const TransportCoefficients& coefficients() const { return coeffs_; }
  double dt() const { return dt_; }

  const SparseMatrix& mass() const { return mass_; }
  /// Spatial operator L (diffusion + advection + reaction + implicit nudging)
  /// in outflow-positive form: M theta' + L theta = F.
  const SparseMatrix& spatial() const { return spatial_; }

  void set_advection(const AdvectionField& adv) {
    if (adv.segment_flux.size() != 4 * mesh_.num_elements())
      throw std::invalid_argument("transport: advection field size mismatch");
    advection_ = adv;
    std::vector<Triplet> trip;
    trip.reserve(8 * mesh_.num_elements());
    for (std::size_t e = 0; e < mesh_.num_elements(); ++e) {
      const auto vs = mesh_.element_vertices(e);
      for (int s = 0; s < 4; ++s) {
        const auto& seg = element_segments[s];
        const double u = adv.segment_flux[4 * e + s];
        const std::size_t a = vs[seg.from], b = vs[seg.to];
        // outflow of `a` is u * theta_up; `b` receives the same amount
        if (u > 0.0) {
          trip.push_back({a, a, u});
          trip.push_back({b, a, -u});
        } else if (u < 0.0) {
          trip.push_back({a, b, u});
          trip.push_back({b, b, -u});
        }
      }
    }
    const auto adv_m = assemble(mesh_.num_vertices(), std::move(trip));
    spatial_ = linear_combination({{1.0, &static_}, {1.0, &adv_m}});
    lhs_ = linear_combination({{1.0, &mass_}, {0.5 * dt_, &spatial_}});
    explicit_ = linear_combination({{1.0, &mass_}, {-0.5 * dt_, &spatial_}});
    std::vector<double> scratch(mesh_.num_vertices(), 0.0);
    lhs_.constrain(fixed_, scratch, scratch, /*symmetric=*/false);
  }

  /// Forcing F(t) = int_omega f + mu M E y(t), without the Dirichlet rows.
  std::vector<double> forcing(double t, const ObservationStream* obs) const {
    const std::size_t n = mesh_.num_vertices();
    std::vector<double> F(n, 0.0);
    if (coeffs_.source) {
      const auto& q = gauss2x2();
      for (std::size_t e = 0; e < mesh_.num_elements(); ++e) {
        const auto vs = mesh_.element_vertices(e);
        for (int c = 0; c < 4; ++c) {
          const Rect r = quadrant_rect(mesh_, e, c);
          double s = 0.0;
          for (std::size_t k = 0; k < q.points.size(); ++k)
            s += q.weights[k] * coeffs_.source({r.x0 + q.points[k].x * (r.x1 - r.x0),
                                                r.y0 + q.points[k].y * (r.y1 - r.y0)},
                                               t);
          F[vs[c]] += s * r.area();
        }
      }
    }
    if (coeffs_.mu > 0.0) {
      if (!obs) throw ObservationGap("transport: nudging requires an observation stream");
      const auto y = obs->interpolate_in_time(t);
      const auto ey = grid_->prolongation().apply(y);
      const auto mey = mass_ * ey;
      for (std::size_t v = 0; v < n; ++v) F[v] += coeffs_.mu * mey[v];
    }
    return F;
  }

  double boundary_value(std::size_t v, double t) const {
    return coeffs_.dirichlet ? coeffs_.dirichlet(mesh_.vertex(v), t) : 0.0;
  }

  /// Linear system for theta at step.t_new.
  LinearSystem system(const NodalField& theta_old, const TransportStep& step,
                      const ObservationStream* obs) const {
    check_step(theta_old, step);
    const std::size_t n = mesh_.num_vertices();
    auto rhs = explicit_ * theta_old.values();
    const auto f0 = cached_forcing(step.t_old, obs);
    const auto f1 = cached_forcing(step.t_new, obs);
    for (std::size_t v = 0; v < n; ++v) rhs[v] += 0.5 * dt_ * (f0[v] + f1[v]);
    for (std::size_t v = 0; v < n; ++v)
      if (fixed_[v]) rhs[v] = boundary_value(v, step.t_new);
    return {lhs_, std::move(rhs)};
  }

  NodalField advance(const NodalField& theta_old, const TransportStep& step,
                     const ObservationStream* obs, SolverConfig cfg,
                     SolveReport* report = nullptr) const {
    auto sys = system(theta_old, step, obs);
    cfg.method = SolverMethod::bicgstab;
    std::vector<double> x0 = theta_old.data();
    for (std::size_t v = 0; v < x0.size(); ++v)
      if (fixed_[v]) x0[v] = sys.rhs[v];
    auto res = solve(sys.matrix, sys.rhs, cfg, std::move(x0));
    for (std::size_t v = 0; v < res.x.size(); ++v)
      if (fixed_[v]) res.x[v] = sys.rhs[v];
    if (report) *report = std::move(res.report);
    return NodalField(mesh_, std::move(res.x));
  }

  /// Outflow through the boundary of the free region for state theta:
  /// summed face by face, independent of the assembled matrices.
  double free_region_outflow(const NodalField& theta) const {
    double out = 0.0;
    for (std::size_t e = 0; e < mesh_.num_elements(); ++e) {
      const auto vs = mesh_.element_vertices(e);
      const auto th = theta.element_values(e);
      for (int s = 0; s < 4; ++s) {
        const auto& seg = element_segments[s];
        const bool fa = !fixed_[vs[seg.from]], fb = !fixed_[vs[seg.to]];
        if (fa == fb) continue;
        const double flux = face_flux(e, s, th);
        out += fa ? flux : -flux;
      }
    }
    return out;
  }

  MassBalance audit(const NodalField& theta_old, const NodalField& theta_new,
                    const TransportStep& step, const ObservationStream* obs) const {
    const std::size_t n = mesh_.num_vertices();
    MassBalance mb;
    std::vector<double> diff(n);
    for (std::size_t v = 0; v < n; ++v) diff[v] = theta_new[v] - theta_old[v];
    const auto acc = mass_ * diff;
    const auto held = mass_ * theta_new.values();
    const auto f0 = cached_forcing(step.t_old, obs);
    const auto f1 = cached_forcing(step.t_new, obs);
    const auto s0 = sink_(theta_old);
    const auto s1 = sink_(theta_new);
    for (std::size_t v = 0; v < n; ++v) {
      if (fixed_[v]) continue;
      mb.accumulation += acc[v];
      mb.inventory += std::abs(held[v]);
      mb.sources += 0.5 * dt_ * (f0[v] + f1[v] - s0[v] - s1[v]);
    }
    mb.outflow = 0.5 * dt_ * (free_region_outflow(theta_old) + free_region_outflow(theta_new));
    mb.residual = mb.accumulation + mb.outflow - mb.sources;
    return mb;
  }

private:
  struct ForcingEntry {
    double t;
    const ObservationStream* obs;
    std::vector<double> values;
  };

  /// Forcing at the two most recent times; a step reuses the previous
  /// step's t_new entry as its t_old. Not thread-safe: one operator per run.
  std::vector<double> cached_forcing(double t, const ObservationStream* obs) const {
    for (const auto& e : forcing_cache_)
      if (e.t == t && e.obs == obs) return e.values;
    if (forcing_cache_.size() == 2) forcing_cache_.erase(forcing_cache_.begin());
    forcing_cache_.push_back({t, obs, forcing(t, obs)});
    return forcing_cache_.back().values;
  }

  void check_step(const NodalField& theta, const TransportStep& step) const {
    if (!(theta.mesh() == mesh_)) throw std::invalid_argument("transport: mesh mismatch");
    if (!(step.t_new > step.t_old)) throw std::invalid_argument("transport: t_new <= t_old");
    if (std::abs(step.dt() - dt_) > 1e-9 * dt_)
      throw std::invalid_argument("transport: step size differs from the operator's dt");
  }

  double diffusion_at(const Point& x) const { return coeffs_.diffusion ? coeffs_.diffusion(x) : 0.0; }

  /// Flux from quadrant `from` to `to` across segment s, for element values th.
  double face_flux(std::size_t e, int s, const std::array<double, 4>& th) const {
    const auto& seg = element_segments[s];
    const double hx = mesh_.hx(), hy = mesh_.hy();
    const double len = segment_length(mesh_, seg);
    const double D = diffusion_at(segment_midpoint(mesh_, e, seg));
    const double diff = -D * len * dot(element_gradient(th, seg.mid_u, seg.mid_v, hx, hy), seg.normal);
    const double u = advection_.segment_flux[4 * e + s];
    const double up = u > 0.0 ? th[seg.from] : (u < 0.0 ? th[seg.to] : 0.5 * (th[seg.from] + th[seg.to]));
    return diff + u * up;
  }

  /// q theta and mu M E R theta per control volume.
  std::vector<double> sink_(const NodalField& theta) const {
    auto s = reaction_ * theta.values();
    if (coeffs_.mu > 0.0) {
      const auto nt = nudge_ * theta.values();
      for (std::size_t v = 0; v < s.size(); ++v) s[v] += nt[v];
    }
    return s;
  }

  void build_static() {
    const std::size_t n = mesh_.num_vertices();
    const double hx = mesh_.hx(), hy = mesh_.hy();
    std::vector<Triplet> mass, diff, reac;
    mass.reserve(16 * mesh_.num_elements());
    diff.reserve(32 * mesh_.num_elements());
    for (std::size_t e = 0; e < mesh_.num_elements(); ++e) {
      const auto vs = mesh_.element_vertices(e);
      const double qarea = 0.25 * hx * hy;
      for (int a = 0; a < 4; ++a) {
        const auto mom = quadrant_moments(a);
        const double qa = coeffs_.reaction ? coeffs_.reaction(quadrant_rect(mesh_, e, a).center()) : 0.0;
        for (int b = 0; b < 4; ++b) {
          mass.push_back({vs[a], vs[b], qarea * mom[b]});
          if (qa != 0.0) reac.push_back({vs[a], vs[b], qa * qarea * mom[b]});
        }
      }
      for (int s = 0; s < 4; ++s) {
        const auto& seg = element_segments[s];
        const double len = segment_length(mesh_, seg);
        const double D = diffusion_at(segment_midpoint(mesh_, e, seg));
        const auto g = shape::gradients(seg.mid_u, seg.mid_v, hx, hy);
        for (int c = 0; c < 4; ++c) {
          const double coef = -D * len * dot(g[c], seg.normal);
          diff.push_back({vs[seg.from], vs[c], coef});
          diff.push_back({vs[seg.to], vs[c], -coef});
        }
      }
    }
    mass_ = assemble(n, std::move(mass));
    reaction_ = assemble(n, std::move(reac));
    const auto diff_m = assemble(n, std::move(diff));
    if (coeffs_.mu > 0.0) {
      // mu M E R, row by row through the sparse factors
      const auto& E = grid_->prolongation();
      const auto& R = grid_->restriction();
      std::vector<Triplet> nud;
      const auto rp = mass_.row_ptr();
      const auto cs = mass_.cols();
      const auto mv = mass_.values();
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t k = rp[r]; k < rp[r + 1]; ++k)
          for (const auto& [i, w] : E.rows[cs[k]])
            for (const auto& [v, rw] : R.rows[i])
              nud.push_back({r, v, coeffs_.mu * mv[k] * w * rw});
      nudge_ = assemble(n, std::move(nud));
      static_ = linear_combination({{1.0, &diff_m}, {1.0, &reaction_}, {1.0, &nudge_}});
    } else {
      nudge_ = assemble(n, {});
      static_ = linear_combination({{1.0, &diff_m}, {1.0, &reaction_}});
    }
  }

  StructuredMesh mesh_;
  TransportCoefficients coeffs_;
  double dt_;
  const SparseGrid* grid_;
  std::vector<char> fixed_;
  AdvectionField advection_;
  SparseMatrix mass_, reaction_, nudge_, static_, spatial_, lhs_, explicit_;
  mutable std::vector<ForcingEntry> forcing_cache_;
};

/// One-shot assembly of the step system (builds a fresh operator).
inline LinearSystem assemble_step(const NodalField& theta_old, const TransportCoefficients& coeffs,
                                  const AdvectionField& advection, const TransportStep& step,
                                  const SparseGrid* grid, const ObservationStream* obs) {
  TransportOperator op(theta_old.mesh(), coeffs, step.dt(), grid);
  op.set_advection(advection);
  return op.system(theta_old, step, obs);
}

inline NodalField transport_step(const NodalField& theta_old, const TransportCoefficients& coeffs,
                                 const AdvectionField& advection, const TransportStep& step,
                                 const SparseGrid* grid, const ObservationStream* obs,
                                 const SolverConfig& cfg) {
  TransportOperator op(theta_old.mesh(), coeffs, step.dt(), grid);
  op.set_advection(advection);
  return op.advance(theta_old, step, obs, cfg);
}

} // namespace cda
