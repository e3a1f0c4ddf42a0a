#pragma once
/// @file observation.hpp
/// @brief Sparse measurement operator P_hbar: lattice of measurement points
/// aligned with the fine mesh, measurement functionals, nodal-bilinear
/// reconstruction on the lattice, and the time-indexed measurement store.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cda/errors.hpp"
#include "cda/fields.hpp"
#include "cda/mesh.hpp"

namespace cda {

enum class FunctionalKind {
  point_value,  ///< gamma_i(u) = u(x_i)
  cell_average, ///< mean of u over the lattice dual cell of x_i (side hbar, clipped)
};

/// Rectangular sparse operator stored by rows.
struct SparseRows {
  std::size_t cols = 0;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;

  std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> y(rows.size(), 0.0);
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (const auto& [c, w] : rows[r]) y[r] += w * x[c];
    return y;
  }
};

class SparseGrid {
public:
  SparseGrid() = default;

  /// Lattice with spacing hbar on both axes, anchored at the origin. hbar
  /// must be an integer multiple (>= 1) of the mesh spacing and divide the
  /// domain sides.
  SparseGrid(StructuredMesh mesh, double hbar, FunctionalKind kind = FunctionalKind::point_value)
      : mesh_(std::move(mesh)), hbar_(hbar), kind_(kind) {
    if (!(hbar > 0.0)) throw ConfigError("sparse grid: hbar must be positive");
    stride_x_ = stride_for(hbar, mesh_.hx(), mesh_.nx(), "x");
    stride_y_ = stride_for(hbar, mesh_.hy(), mesh_.ny(), "y");
    cx_ = mesh_.nx() / stride_x_;
    cy_ = mesh_.ny() / stride_y_;
    build_restriction();
    build_prolongation();
  }

  const StructuredMesh& mesh() const { return mesh_; }
  double hbar() const { return hbar_; }
  FunctionalKind kind() const { return kind_; }
  std::size_t stride_x() const { return stride_x_; }
  std::size_t stride_y() const { return stride_y_; }
  std::size_t cells_x() const { return cx_; }
  std::size_t cells_y() const { return cy_; }
  std::size_t num_points() const { return (cx_ + 1) * (cy_ + 1); }

  std::size_t point_vertex(std::size_t i) const {
    const std::size_t ci = i % (cx_ + 1), cj = i / (cx_ + 1);
    return mesh_.vertex_index(ci * stride_x_, cj * stride_y_);
  }
  Point point(std::size_t i) const { return mesh_.vertex(point_vertex(i)); }

  /// Measurement functionals as rows over the fine nodal values.
  const SparseRows& restriction() const { return restriction_; }
  /// Lattice bilinear basis sampled at the fine vertices.
  const SparseRows& prolongation() const { return prolongation_; }

  /// gamma_i applied to a fine field.
  std::vector<double> measure(const NodalField& u) const {
    check_mesh(u);
    return restriction_.apply(u.values());
  }

  /// Lattice-bilinear function with the given point values, on the fine mesh.
  NodalField reconstruct(std::span<const double> measurements) const {
    if (measurements.size() != num_points())
      throw std::invalid_argument("reconstruct: measurement vector has wrong length");
    return NodalField(mesh_, prolongation_.apply(measurements));
  }

private:
  static std::size_t stride_for(double hbar, double h, std::size_t n, const char* axis) {
    const double ratio = hbar / h;
    const double k = std::round(ratio);
    if (ratio < 1.0 - 1e-9)
      throw ConfigError(std::string("sparse grid finer than the mesh along ") + axis);
    if (std::abs(ratio - k) > 1e-8 * std::max(1.0, ratio))
      throw ConfigError(std::string("hbar is not an integer multiple of h along ") + axis);
    const auto s = static_cast<std::size_t>(k);
    if (n % s != 0)
      throw ConfigError(std::string("hbar does not divide the domain along ") + axis);
    return s;
  }

  void check_mesh(const NodalField& u) const {
    if (!(u.mesh() == mesh_)) throw std::invalid_argument("sparse grid: mesh mismatch");
  }

  void build_restriction() {
    restriction_.cols = mesh_.num_vertices();
    restriction_.rows.resize(num_points());
    for (std::size_t i = 0; i < num_points(); ++i) {
      if (kind_ == FunctionalKind::point_value) {
        restriction_.rows[i] = {{point_vertex(i), 1.0}};
        continue;
      }
      const Point c = point(i);
      const Rect w{std::max(0.0, c.x - 0.5 * hbar_), std::max(0.0, c.y - 0.5 * hbar_),
                   std::min(mesh_.lx(), c.x + 0.5 * hbar_), std::min(mesh_.ly(), c.y + 0.5 * hbar_)};
      // A bilinear integrates exactly to area * value at the center of any
      // axis-aligned sub-rectangle.
      const auto lo = [](double a, double h) {
        return static_cast<std::size_t>(std::max(0.0, std::floor(a / h)));
      };
      const std::size_t i0 = lo(w.x0, mesh_.hx()), j0 = lo(w.y0, mesh_.hy());
      const std::size_t i1 = std::min(mesh_.nx(), static_cast<std::size_t>(std::ceil(w.x1 / mesh_.hx())));
      const std::size_t j1 = std::min(mesh_.ny(), static_cast<std::size_t>(std::ceil(w.y1 / mesh_.hy())));
      std::vector<std::pair<std::size_t, double>> acc;
      for (std::size_t ej = j0; ej < j1; ++ej) {
        for (std::size_t ei = i0; ei < i1; ++ei) {
          const std::size_t e = mesh_.element_index(ei, ej);
          const Rect r = mesh_.element_rect(e);
          const Rect ov{std::max(r.x0, w.x0), std::max(r.y0, w.y0), std::min(r.x1, w.x1),
                        std::min(r.y1, w.y1)};
          if (ov.x1 <= ov.x0 || ov.y1 <= ov.y0) continue;
          const Point oc = ov.center();
          const auto phi =
              shape::values((oc.x - r.x0) / (r.x1 - r.x0), (oc.y - r.y0) / (r.y1 - r.y0));
          const auto vs = mesh_.element_vertices(e);
          for (int a = 0; a < 4; ++a) acc.push_back({vs[a], ov.area() * phi[a] / w.area()});
        }
      }
      std::sort(acc.begin(), acc.end());
      for (const auto& [v, wt] : acc) {
        auto& row = restriction_.rows[i];
        if (!row.empty() && row.back().first == v)
          row.back().second += wt;
        else
          row.push_back({v, wt});
      }
    }
  }

  void build_prolongation() {
    prolongation_.cols = num_points();
    prolongation_.rows.resize(mesh_.num_vertices());
    for (std::size_t v = 0; v < mesh_.num_vertices(); ++v) {
      const std::size_t i = mesh_.vertex_i(v), j = mesh_.vertex_j(v);
      const std::size_t ci = std::min(i / stride_x_, cx_ - 1), cj = std::min(j / stride_y_, cy_ - 1);
      const double u = static_cast<double>(i - ci * stride_x_) / static_cast<double>(stride_x_);
      const double w = static_cast<double>(j - cj * stride_y_) / static_cast<double>(stride_y_);
      const auto phi = shape::values(u, w);
      const std::array<std::size_t, 4> pts{cj * (cx_ + 1) + ci, cj * (cx_ + 1) + ci + 1,
                                           (cj + 1) * (cx_ + 1) + ci + 1, (cj + 1) * (cx_ + 1) + ci};
      for (int a = 0; a < 4; ++a)
        if (phi[a] != 0.0) prolongation_.rows[v].push_back({pts[a], phi[a]});
    }
  }

  StructuredMesh mesh_;
  double hbar_ = 0.0;
  FunctionalKind kind_ = FunctionalKind::point_value;
  std::size_t stride_x_ = 1, stride_y_ = 1, cx_ = 1, cy_ = 1;
  SparseRows restriction_;
  SparseRows prolongation_;
};

inline SparseGrid make_sparse_grid(const StructuredMesh& mesh, double hbar,
                                   FunctionalKind kind = FunctionalKind::point_value) {
  return SparseGrid(mesh, hbar, kind);
}

/// P_hbar(u): measure, reconstruct on the lattice, resample on the fine mesh.
inline NodalField apply_Ph(const SparseGrid& grid, const NodalField& source) {
  return grid.reconstruct(grid.measure(source));
}

/// Measurement vector of a reference field.
inline std::vector<double> sample(const SparseGrid& grid, const NodalField& reference) {
  return grid.measure(reference);
}

struct ObservationRecord {
  double t = 0.0;
  std::vector<double> values;
};

/// Append-only store of measurement vectors at strictly increasing times.
class ObservationStream {
public:
  void append(double t, std::vector<double> values) {
    if (!records_.empty()) {
      if (!(t > records_.back().t))
        throw std::invalid_argument("observation stream: times must increase strictly");
      if (values.size() != records_.front().values.size())
        throw std::invalid_argument("observation stream: measurement length changed");
    }
    records_.push_back({t, std::move(values)});
  }

  bool empty() const { return records_.empty(); }
  std::size_t size() const { return records_.size(); }
  const std::vector<ObservationRecord>& records() const { return records_; }
  const ObservationRecord& operator[](std::size_t k) const { return records_[k]; }

  /// Componentwise linear interpolation between the bracketing records;
  /// returns stored vectors exactly at record times.
  std::vector<double> interpolate_in_time(double s) const {
    if (records_.empty()) throw ObservationGap("observation stream is empty");
    const double span = records_.back().t - records_.front().t;
    const double tol = 1e-12 * std::max({1.0, std::abs(records_.back().t), span});
    if (s < records_.front().t - tol || s > records_.back().t + tol)
      throw ObservationGap("no measurements cover t = " + std::to_string(s));
    auto it = std::lower_bound(records_.begin(), records_.end(), s,
                               [](const ObservationRecord& r, double t) { return r.t < t; });
    if (it != records_.end() && std::abs(it->t - s) <= tol) return it->values;
    if (it == records_.begin()) return it->values;
    if (it == records_.end()) return records_.back().values;
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    if (std::abs(lo.t - s) <= tol) return lo.values;
    const double w = (s - lo.t) / (hi.t - lo.t);
    std::vector<double> out(lo.values.size());
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = (1.0 - w) * lo.values[i] + w * hi.values[i];
    return out;
  }

  /// CSV: header "t,gamma_0,...,gamma_N", one row per record, %.17g values.
  void write_csv(std::ostream& os) const {
    const std::size_t n = records_.empty() ? 0 : records_.front().values.size();
    os << "t";
    for (std::size_t i = 0; i < n; ++i) os << ",gamma_" << i;
    os << '\n' << std::setprecision(17);
    for (const auto& r : records_) {
      os << r.t;
      for (double v : r.values) os << ',' << v;
      os << '\n';
    }
  }

  static ObservationStream read_csv(std::istream& is) {
    ObservationStream s;
    std::string line;
    if (!std::getline(is, line)) throw InputError("observation csv: missing header");
    const auto header = split(line);
    if (header.empty() || header[0] != "t") throw InputError("observation csv: bad header");
    for (std::size_t i = 1; i < header.size(); ++i)
      if (header[i] != "gamma_" + std::to_string(i - 1))
        throw InputError("observation csv: bad column name '" + header[i] + "'");
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      const auto cells = split(line);
      if (cells.size() != header.size()) throw InputError("observation csv: ragged row");
      std::vector<double> vals;
      for (std::size_t i = 1; i < cells.size(); ++i) vals.push_back(parse(cells[i]));
      s.append(parse(cells[0]), std::move(vals));
    }
    return s;
  }

private:
  static std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const auto b = cell.find_first_not_of(" \t\r");
      const auto e = cell.find_last_not_of(" \t\r");
      out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    return out;
  }
  static double parse(const std::string& s) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw InputError("observation csv: bad number '" + s + "'");
      return v;
    } catch (const std::logic_error&) {
      throw InputError("observation csv: bad number '" + s + "'");
    }
  }

  std::vector<ObservationRecord> records_;
};

} // namespace cda
