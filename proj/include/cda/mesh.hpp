#pragma once
/// @file mesh.hpp
/// @brief Uniform rectangular primal mesh, its dual control volumes and
/// boundary classification.
///
/// Numbering is row-major with x fastest:
///   vertex  (i, j) -> j * (nx + 1) + i,   0 <= i <= nx, 0 <= j <= ny
///   element (i, j) -> j * nx + i,         0 <= i <  nx, 0 <= j <  ny
/// Local corners of an element are counter-clockwise starting at the
/// lower-left corner: 0 = (i, j), 1 = (i+1, j), 2 = (i+1, j+1), 3 = (i, j+1).

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cda/errors.hpp"

namespace cda {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

using Vec2 = Point;

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }

enum class BoundaryTag { dirichlet, neumann };

enum class Side { left = 0, right = 1, bottom = 2, top = 3 };

/// One tag per side of the rectangle; corners belong to Dirichlet if either
/// incident side is Dirichlet.
struct BoundarySpec {
  std::array<BoundaryTag, 4> sides{BoundaryTag::dirichlet, BoundaryTag::dirichlet,
                                   BoundaryTag::dirichlet, BoundaryTag::dirichlet};

  BoundaryTag operator[](Side s) const { return sides[static_cast<std::size_t>(s)]; }

  static BoundarySpec all_dirichlet() { return {}; }
  static BoundarySpec all_neumann() {
    return {{BoundaryTag::neumann, BoundaryTag::neumann, BoundaryTag::neumann,
             BoundaryTag::neumann}};
  }
  /// Dirichlet on x = 0 and x = Lx, Neumann on y = 0 and y = Ly.
  static BoundarySpec dirichlet_left_right() {
    return {{BoundaryTag::dirichlet, BoundaryTag::dirichlet, BoundaryTag::neumann,
             BoundaryTag::neumann}};
  }

  friend bool operator==(const BoundarySpec&, const BoundarySpec&) = default;
};

struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
  double area() const { return (x1 - x0) * (y1 - y0); }
  Point center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
};

class StructuredMesh {
public:
  StructuredMesh() = default;

  StructuredMesh(std::size_t nx, std::size_t ny, double lx, double ly, BoundarySpec boundary)
      : nx_(nx), ny_(ny), lx_(lx), ly_(ly), boundary_(boundary) {
    if (nx == 0 || ny == 0)
      throw std::invalid_argument("mesh: element counts must be >= 1");
    if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly))
      throw std::invalid_argument("mesh: side lengths must be positive and finite");
  }

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  double lx() const { return lx_; }
  double ly() const { return ly_; }
  double hx() const { return lx_ / static_cast<double>(nx_); }
  double hy() const { return ly_ / static_cast<double>(ny_); }
  const BoundarySpec& boundary() const { return boundary_; }

  std::size_t num_vertices() const { return (nx_ + 1) * (ny_ + 1); }
  std::size_t num_elements() const { return nx_ * ny_; }

  std::size_t vertex_index(std::size_t i, std::size_t j) const { return j * (nx_ + 1) + i; }
  std::size_t element_index(std::size_t i, std::size_t j) const { return j * nx_ + i; }

  std::size_t vertex_i(std::size_t v) const { return v % (nx_ + 1); }
  std::size_t vertex_j(std::size_t v) const { return v / (nx_ + 1); }
  std::size_t element_i(std::size_t e) const { return e % nx_; }
  std::size_t element_j(std::size_t e) const { return e / nx_; }

  // Coordinates are computed from indices, not accumulated, so the last
  // lattice line lands exactly on Lx / Ly.
  double x_coord(std::size_t i) const {
    return i == nx_ ? lx_ : lx_ * static_cast<double>(i) / static_cast<double>(nx_);
  }
  double y_coord(std::size_t j) const {
    return j == ny_ ? ly_ : ly_ * static_cast<double>(j) / static_cast<double>(ny_);
  }

  Point vertex(std::size_t v) const { return {x_coord(vertex_i(v)), y_coord(vertex_j(v))}; }

  std::array<std::size_t, 4> element_vertices(std::size_t e) const {
    const std::size_t i = element_i(e), j = element_j(e);
    return {vertex_index(i, j), vertex_index(i + 1, j), vertex_index(i + 1, j + 1),
            vertex_index(i, j + 1)};
  }

  Rect element_rect(std::size_t e) const {
    const std::size_t i = element_i(e), j = element_j(e);
    return {x_coord(i), y_coord(j), x_coord(i + 1), y_coord(j + 1)};
  }

  bool on_boundary(std::size_t v) const {
    const std::size_t i = vertex_i(v), j = vertex_j(v);
    return i == 0 || j == 0 || i == nx_ || j == ny_;
  }

  bool is_dirichlet(std::size_t v) const {
    const std::size_t i = vertex_i(v), j = vertex_j(v);
    return (i == 0 && boundary_[Side::left] == BoundaryTag::dirichlet) ||
           (i == nx_ && boundary_[Side::right] == BoundaryTag::dirichlet) ||
           (j == 0 && boundary_[Side::bottom] == BoundaryTag::dirichlet) ||
           (j == ny_ && boundary_[Side::top] == BoundaryTag::dirichlet);
  }

  bool contains(const Point& p) const {
    return p.x >= 0.0 && p.x <= lx_ && p.y >= 0.0 && p.y <= ly_;
  }

  /// Element containing p. On shared edges the lowest element id wins.
  std::size_t locate(const Point& p) const {
    if (!contains(p))
      throw OutOfDomain("point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                        ") outside the domain");
    return element_index(locate_axis(p.x, nx_, lx_), locate_axis(p.y, ny_, ly_));
  }

  /// Dual cell of a vertex: half-cell box around it, clipped to the domain.
  Rect dual_rect(std::size_t v) const {
    const std::size_t i = vertex_i(v), j = vertex_j(v);
    const double hx2 = 0.5 * hx(), hy2 = 0.5 * hy();
    const double x = x_coord(i), y = y_coord(j);
    return {i == 0 ? 0.0 : x - hx2, j == 0 ? 0.0 : y - hy2, i == nx_ ? lx_ : x + hx2,
            j == ny_ ? ly_ : y + hy2};
  }

  friend bool operator==(const StructuredMesh&, const StructuredMesh&) = default;

private:
  static std::size_t locate_axis(double c, std::size_t n, double len) {
    const double s = c / len * static_cast<double>(n);
    auto k = static_cast<std::size_t>(std::ceil(s));
    // ceil - 1 picks the lower cell on an exact lattice line
    return k == 0 ? 0 : std::min(k - 1, n - 1);
  }

  std::size_t nx_ = 1, ny_ = 1;
  double lx_ = 1.0, ly_ = 1.0;
  BoundarySpec boundary_{};
};

inline StructuredMesh build_mesh(std::size_t nx, std::size_t ny, double lx, double ly,
                                 BoundarySpec boundary = BoundarySpec::all_dirichlet()) {
  return StructuredMesh(nx, ny, lx, ly, boundary);
}

// ---------------------------------------------------------------------------
// Sub-control-volume faces inside one element.
//
// Each element is cut by the two lines through its center into four
// quadrants, one per corner. The four half-lines from the center to the edge
// midpoints are the control-volume faces interior to the element. Face s
// separates quadrant `from` and quadrant `to`, with unit normal pointing from
// `from` into `to`.
// ---------------------------------------------------------------------------
struct ElementSegment {
  int from;
  int to;
  Vec2 normal;
  double mid_u; // midpoint in reference coordinates [0,1]^2
  double mid_v;
  bool vertical; // length hy/2 if vertical, hx/2 otherwise
};

inline constexpr std::array<ElementSegment, 4> element_segments{{
    {0, 1, {1.0, 0.0}, 0.5, 0.25, true},
    {1, 2, {0.0, 1.0}, 0.75, 0.5, false},
    {3, 2, {1.0, 0.0}, 0.5, 0.75, true},
    {0, 3, {0.0, 1.0}, 0.25, 0.5, false},
}};

inline double segment_length(const StructuredMesh& m, const ElementSegment& s) {
  return s.vertical ? 0.5 * m.hy() : 0.5 * m.hx();
}

inline Point segment_midpoint(const StructuredMesh& m, std::size_t e, const ElementSegment& s) {
  const Rect r = m.element_rect(e);
  return {r.x0 + s.mid_u * (r.x1 - r.x0), r.y0 + s.mid_v * (r.y1 - r.y0)};
}

// ---------------------------------------------------------------------------
// Explicit dual mesh.
// ---------------------------------------------------------------------------
struct CvFace {
  Point midpoint;
  Vec2 normal; // outward from the owning control volume
  double length = 0.0;
  std::size_t element = 0;
  std::optional<std::size_t> neighbor; // set for faces interior to the domain
  std::optional<BoundaryTag> boundary; // set for faces on the domain boundary
};

struct ControlVolume {
  std::size_t owner = 0;
  Rect rect;
  std::vector<CvFace> faces;

  double area() const { return rect.area(); }
};

/// One control volume per vertex (Dirichlet vertices included), faces split
/// per element so every face lies inside exactly one element.
inline std::vector<ControlVolume> control_volumes(const StructuredMesh& mesh) {
  std::vector<ControlVolume> cvs(mesh.num_vertices());
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    cvs[v].owner = v;
    cvs[v].rect = mesh.dual_rect(v);
  }

  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto verts = mesh.element_vertices(e);
    for (const auto& s : element_segments) {
      const Point mid = segment_midpoint(mesh, e, s);
      const double len = segment_length(mesh, s);
      const std::size_t a = verts[s.from], b = verts[s.to];
      cvs[a].faces.push_back({mid, s.normal, len, e, b, std::nullopt});
      cvs[b].faces.push_back({mid, {-s.normal.x, -s.normal.y}, len, e, a, std::nullopt});
    }

    // Boundary edges of the element contribute two half-faces, one per corner.
    const std::size_t i = mesh.element_i(e), j = mesh.element_j(e);
    const Rect r = mesh.element_rect(e);
    const double xm = 0.5 * (r.x0 + r.x1), ym = 0.5 * (r.y0 + r.y1);
    const double hx2 = 0.5 * mesh.hx(), hy2 = 0.5 * mesh.hy();
    const auto& bs = mesh.boundary();
    if (j == 0) {
      const BoundaryTag t = bs[Side::bottom];
      cvs[verts[0]].faces.push_back({{0.5 * (r.x0 + xm), r.y0}, {0, -1}, hx2, e, {}, t});
      cvs[verts[1]].faces.push_back({{0.5 * (xm + r.x1), r.y0}, {0, -1}, hx2, e, {}, t});
    }
    if (j + 1 == mesh.ny()) {
      const BoundaryTag t = bs[Side::top];
      cvs[verts[3]].faces.push_back({{0.5 * (r.x0 + xm), r.y1}, {0, 1}, hx2, e, {}, t});
      cvs[verts[2]].faces.push_back({{0.5 * (xm + r.x1), r.y1}, {0, 1}, hx2, e, {}, t});
    }
    if (i == 0) {
      const BoundaryTag t = bs[Side::left];
      cvs[verts[0]].faces.push_back({{r.x0, 0.5 * (r.y0 + ym)}, {-1, 0}, hy2, e, {}, t});
      cvs[verts[3]].faces.push_back({{r.x0, 0.5 * (ym + r.y1)}, {-1, 0}, hy2, e, {}, t});
    }
    if (i + 1 == mesh.nx()) {
      const BoundaryTag t = bs[Side::right];
      cvs[verts[1]].faces.push_back({{r.x1, 0.5 * (r.y0 + ym)}, {1, 0}, hy2, e, {}, t});
      cvs[verts[2]].faces.push_back({{r.x1, 0.5 * (ym + r.y1)}, {1, 0}, hy2, e, {}, t});
    }
  }
  return cvs;
}

} // namespace cda
