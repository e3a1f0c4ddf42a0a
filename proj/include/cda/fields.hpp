#pragma once
/// @file fields.hpp
/// @brief Continuous (nodal) and discontinuous piecewise-bilinear fields on a
/// StructuredMesh, point evaluation, gradients, quadrature and the
/// per-element piecewise-constant interpolant.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cda/mesh.hpp"

namespace cda {

// ---------------------------------------------------------------------------
// Reference-element shape functions on [0,1]^2, corner order of mesh.hpp.
// ---------------------------------------------------------------------------
namespace shape {

inline std::array<double, 4> values(double u, double v) {
  return {(1 - u) * (1 - v), u * (1 - v), u * v, (1 - u) * v};
}

/// Gradients in reference coordinates (d/du, d/dv).
inline std::array<Vec2, 4> ref_gradients(double u, double v) {
  return {{{-(1 - v), -(1 - u)}, {(1 - v), -u}, {v, u}, {-v, (1 - u)}}};
}

/// Physical gradients for an element of size hx x hy.
inline std::array<Vec2, 4> gradients(double u, double v, double hx, double hy) {
  auto g = ref_gradients(u, v);
  for (auto& d : g) {
    d.x /= hx;
    d.y /= hy;
  }
  return g;
}

} // namespace shape

// ---------------------------------------------------------------------------
// Quadrature. Points in reference coordinates, weights sum to 1 (multiply by
// the physical area).
//   gauss2x2: exact for polynomials of degree <= 3 in each variable.
//   gauss3x3: exact for degree <= 5 in each variable.
// ---------------------------------------------------------------------------
struct Quadrature {
  std::vector<Point> points;
  std::vector<double> weights;
};

inline const Quadrature& gauss2x2() {
  static const Quadrature q = [] {
    const double a = 0.5 - 0.5 / std::sqrt(3.0), b = 0.5 + 0.5 / std::sqrt(3.0);
    return Quadrature{{{a, a}, {b, a}, {b, b}, {a, b}}, {0.25, 0.25, 0.25, 0.25}};
  }();
  return q;
}

inline const Quadrature& gauss3x3() {
  static const Quadrature q = [] {
    const double r = std::sqrt(0.6);
    const std::array<double, 3> x{0.5 * (1 - r), 0.5, 0.5 * (1 + r)};
    const std::array<double, 3> w{5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
    Quadrature out;
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 3; ++i) {
        out.points.push_back({x[i], x[j]});
        out.weights.push_back(w[i] * w[j]);
      }
    return out;
  }();
  return q;
}

// ---------------------------------------------------------------------------
// Fields
// ---------------------------------------------------------------------------

/// Continuous piecewise-bilinear field, one value per vertex.
class NodalField {
public:
  NodalField() = default;
  explicit NodalField(StructuredMesh mesh, double fill = 0.0)
      : mesh_(std::move(mesh)), values_(mesh_.num_vertices(), fill) {}
  NodalField(StructuredMesh mesh, std::vector<double> values)
      : mesh_(std::move(mesh)), values_(std::move(values)) {
    if (values_.size() != mesh_.num_vertices())
      throw std::invalid_argument("NodalField: value count != vertex count");
  }

  const StructuredMesh& mesh() const { return mesh_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t v) const { return values_[v]; }
  double& operator[](std::size_t v) { return values_[v]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  std::vector<double>& data() { return values_; }
  const std::vector<double>& data() const { return values_; }

  std::array<double, 4> element_values(std::size_t e) const {
    const auto vs = mesh_.element_vertices(e);
    return {values_[vs[0]], values_[vs[1]], values_[vs[2]], values_[vs[3]]};
  }

  friend bool operator==(const NodalField&, const NodalField&) = default;

private:
  StructuredMesh mesh_;
  std::vector<double> values_;
};

/// Discontinuous piecewise-bilinear field, four corner values per element.
class DGField {
public:
  DGField() = default;
  explicit DGField(StructuredMesh mesh, double fill = 0.0)
      : mesh_(std::move(mesh)), values_(4 * mesh_.num_elements(), fill) {}

  const StructuredMesh& mesh() const { return mesh_; }
  std::size_t size() const { return values_.size(); }
  double& at(std::size_t e, int corner) { return values_[4 * e + corner]; }
  double at(std::size_t e, int corner) const { return values_[4 * e + corner]; }
  std::span<const double> values() const { return values_; }

  std::array<double, 4> element_values(std::size_t e) const {
    return {values_[4 * e], values_[4 * e + 1], values_[4 * e + 2], values_[4 * e + 3]};
  }

private:
  StructuredMesh mesh_;
  std::vector<double> values_;
};

template <class F>
concept PiecewiseBilinear = requires(const F& f, std::size_t e) {
  { f.mesh() } -> std::convertible_to<const StructuredMesh&>;
  { f.element_values(e) } -> std::same_as<std::array<double, 4>>;
};

namespace detail {

inline std::pair<double, double> reference_coords(const StructuredMesh& m, std::size_t e,
                                                  const Point& x) {
  const Rect r = m.element_rect(e);
  return {(x.x - r.x0) / (r.x1 - r.x0), (x.y - r.y0) / (r.y1 - r.y0)};
}

inline std::size_t resolve_element(const StructuredMesh& m, const Point& x,
                                   std::optional<std::size_t> hint) {
  if (!m.contains(x))
    throw OutOfDomain("evaluation point outside the domain");
  if (hint) {
    if (*hint >= m.num_elements())
      throw std::invalid_argument("element hint out of range");
    const Rect r = m.element_rect(*hint);
    const double tol = 1e-12 * std::max(m.lx(), m.ly());
    if (x.x < r.x0 - tol || x.x > r.x1 + tol || x.y < r.y0 - tol || x.y > r.y1 + tol)
      throw OutOfDomain("evaluation point not inside the hinted element");
    return *hint;
  }
  return m.locate(x);
}

} // namespace detail

/// Bilinear interpolation of corner values on the containing element.
template <PiecewiseBilinear F>
double eval(const F& field, const Point& x, std::optional<std::size_t> hint = std::nullopt) {
  const auto& m = field.mesh();
  const std::size_t e = detail::resolve_element(m, x, hint);
  const auto [u, v] = detail::reference_coords(m, e, x);
  const auto vals = field.element_values(e);
  const auto phi = shape::values(u, v);
  return vals[0] * phi[0] + vals[1] * phi[1] + vals[2] * phi[2] + vals[3] * phi[3];
}

template <PiecewiseBilinear F>
Vec2 grad(const F& field, const Point& x, std::optional<std::size_t> hint = std::nullopt) {
  const auto& m = field.mesh();
  const std::size_t e = detail::resolve_element(m, x, hint);
  const auto [u, v] = detail::reference_coords(m, e, x);
  const auto vals = field.element_values(e);
  const auto g = shape::gradients(u, v, m.hx(), m.hy());
  Vec2 out{};
  for (int a = 0; a < 4; ++a) {
    out.x += vals[a] * g[a].x;
    out.y += vals[a] * g[a].y;
  }
  return out;
}

/// Gradient of the element-local bilinear at reference coordinates (u, v).
inline Vec2 element_gradient(const std::array<double, 4>& vals, double u, double v, double hx,
                             double hy) {
  const auto g = shape::gradients(u, v, hx, hy);
  Vec2 out{};
  for (int a = 0; a < 4; ++a) {
    out.x += vals[a] * g[a].x;
    out.y += vals[a] * g[a].y;
  }
  return out;
}

inline double element_value(const std::array<double, 4>& vals, double u, double v) {
  const auto phi = shape::values(u, v);
  return vals[0] * phi[0] + vals[1] * phi[1] + vals[2] * phi[2] + vals[3] * phi[3];
}

/// Piecewise-constant interpolant on one element: quadrant omega_zeta ∩ tau
/// takes the field's value at corner zeta.
inline std::array<double, 4> interp_const(const DGField& field, std::size_t e) {
  return field.element_values(e);
}

/// Nodal interpolant of a function.
inline NodalField interpolate(const StructuredMesh& mesh, const std::function<double(Point)>& f) {
  NodalField out(mesh);
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) out[v] = f(mesh.vertex(v));
  return out;
}

/// Integral of a function over a rectangle with a tensor rule.
inline double integrate(const Rect& r, const std::function<double(Point)>& f,
                        const Quadrature& q = gauss2x2()) {
  double s = 0.0;
  const double dx = r.x1 - r.x0, dy = r.y1 - r.y0;
  for (std::size_t k = 0; k < q.points.size(); ++k)
    s += q.weights[k] * f({r.x0 + q.points[k].x * dx, r.y0 + q.points[k].y * dy});
  return s * dx * dy;
}

/// Exact moments of the corner shape functions over the quadrant of corner
/// `a`, as fractions of the quadrant area: 9/16 own corner, 3/16 edge
/// neighbours, 1/16 opposite corner.
inline std::array<double, 4> quadrant_moments(int a) {
  std::array<double, 4> w{};
  for (int b = 0; b < 4; ++b) {
    const int d = (b - a + 4) % 4;
    w[b] = d == 0 ? 9.0 / 16.0 : (d == 2 ? 1.0 / 16.0 : 3.0 / 16.0);
  }
  return w;
}

/// Reference-coordinate rectangle of the quadrant of corner a.
inline Rect quadrant_ref_rect(int a) {
  const double u0 = (a == 1 || a == 2) ? 0.5 : 0.0;
  const double v0 = (a == 2 || a == 3) ? 0.5 : 0.0;
  return {u0, v0, u0 + 0.5, v0 + 0.5};
}

inline Rect quadrant_rect(const StructuredMesh& m, std::size_t e, int a) {
  const Rect r = m.element_rect(e);
  const Rect q = quadrant_ref_rect(a);
  const double dx = r.x1 - r.x0, dy = r.y1 - r.y0;
  return {r.x0 + q.x0 * dx, r.y0 + q.y0 * dy, r.x0 + q.x1 * dx, r.y0 + q.y1 * dy};
}

/// Exact integral of a nodal field over each control volume.
inline std::vector<double> control_volume_integrals(const NodalField& f) {
  const auto& m = f.mesh();
  std::vector<double> out(m.num_vertices(), 0.0);
  const double qa = 0.25 * m.hx() * m.hy();
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    const auto vs = m.element_vertices(e);
    const auto vals = f.element_values(e);
    for (int a = 0; a < 4; ++a) {
      const auto w = quadrant_moments(a);
      out[vs[a]] += qa * (w[0] * vals[0] + w[1] * vals[1] + w[2] * vals[2] + w[3] * vals[3]);
    }
  }
  return out;
}

/// L2 norm of a nodal field (exact: 3x3 Gauss on biquadratic integrands).
inline double l2_norm(const NodalField& f) {
  const auto& m = f.mesh();
  const auto& q = gauss3x3();
  const double area = m.hx() * m.hy();
  double s = 0.0;
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    const auto vals = f.element_values(e);
    for (std::size_t k = 0; k < q.points.size(); ++k) {
      const double u = element_value(vals, q.points[k].x, q.points[k].y);
      s += q.weights[k] * u * u;
    }
  }
  return std::sqrt(s * area);
}

inline double l2_distance(const NodalField& a, const NodalField& b) {
  if (!(a.mesh() == b.mesh())) throw std::invalid_argument("l2_distance: mesh mismatch");
  NodalField d(a.mesh());
  for (std::size_t v = 0; v < a.size(); ++v) d[v] = a[v] - b[v];
  return l2_norm(d);
}

/// L2 distance between a nodal field and a function, 3x3 Gauss per element.
inline double l2_distance(const NodalField& a, const std::function<double(Point)>& f) {
  const auto& m = a.mesh();
  const auto& q = gauss3x3();
  double s = 0.0;
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    const Rect r = m.element_rect(e);
    const auto vals = a.element_values(e);
    for (std::size_t k = 0; k < q.points.size(); ++k) {
      const Point p{r.x0 + q.points[k].x * (r.x1 - r.x0), r.y0 + q.points[k].y * (r.y1 - r.y0)};
      const double d = element_value(vals, q.points[k].x, q.points[k].y) - f(p);
      s += q.weights[k] * d * d;
    }
  }
  return std::sqrt(s * m.hx() * m.hy());
}

inline double l2_norm(const StructuredMesh& m, const std::function<double(Point)>& f) {
  return l2_distance(NodalField(m), f);
}

} // namespace cda
