#pragma once
/// @file raster.hpp
/// @brief Cell-centred scalar rasters (permeability, source and initial
/// profiles, field snapshots).
///
/// Text format: a header line `nx ny Lx Ly`, then nx*ny values in row-major
/// order, row 0 at y = 0. Value (i, j) sits at the cell centre
/// ((i + 1/2) Lx/nx, (j + 1/2) Ly/ny). Lookup is bilinear between cell centres
/// and constant beyond the outermost centres.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "cda/errors.hpp"
#include "cda/fields.hpp"
#include "cda/mesh.hpp"

namespace cda {

class Raster {
public:
  Raster() = default;
  Raster(std::size_t nx, std::size_t ny, double lx, double ly, std::vector<double> values)
      : nx_(nx), ny_(ny), lx_(lx), ly_(ly), values_(std::move(values)) {
    if (nx == 0 || ny == 0 || !(lx > 0.0) || !(ly > 0.0))
      throw InputError("raster: bad header");
    if (values_.size() != nx * ny) throw InputError("raster: expected nx*ny values");
    for (double v : values_)
      if (!std::isfinite(v)) throw InputError("raster: non-finite value");
  }

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  double lx() const { return lx_; }
  double ly() const { return ly_; }
  const std::vector<double>& values() const { return values_; }
  double at(std::size_t i, std::size_t j) const { return values_[j * nx_ + i]; }
  Point cell_center(std::size_t i, std::size_t j) const {
    return {(static_cast<double>(i) + 0.5) * lx_ / static_cast<double>(nx_),
            (static_cast<double>(j) + 0.5) * ly_ / static_cast<double>(ny_)};
  }

  double min() const { return *std::min_element(values_.begin(), values_.end()); }
  double max() const { return *std::max_element(values_.begin(), values_.end()); }

  double operator()(const Point& p) const {
    const auto axis = [](double c, double len, std::size_t n, std::size_t& i0, double& w) {
      const double s = c / len * static_cast<double>(n) - 0.5;
      if (s <= 0.0 || n == 1) {
        i0 = 0;
        w = 0.0;
      } else if (s >= static_cast<double>(n - 1)) {
        i0 = n - 2;
        w = 1.0;
      } else {
        i0 = static_cast<std::size_t>(std::floor(s));
        w = s - static_cast<double>(i0);
      }
    };
    std::size_t i0, j0;
    double wx, wy;
    axis(p.x, lx_, nx_, i0, wx);
    axis(p.y, ly_, ny_, j0, wy);
    const std::size_t i1 = std::min(i0 + 1, nx_ - 1), j1 = std::min(j0 + 1, ny_ - 1);
    return (1 - wx) * (1 - wy) * at(i0, j0) + wx * (1 - wy) * at(i1, j0) +
           (1 - wx) * wy * at(i0, j1) + wx * wy * at(i1, j1);
  }

  /// Map log(values) affinely so that the range becomes [lo, hi] (both > 0).
  Raster rescaled_log(double lo, double hi) const {
    const double a = std::log(min()), b = std::log(max());
    std::vector<double> out(values_.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
      const double s = b > a ? (std::log(values_[k]) - a) / (b - a) : 0.0;
      out[k] = std::exp(std::log(lo) + s * (std::log(hi) - std::log(lo)));
    }
    out[static_cast<std::size_t>(std::min_element(values_.begin(), values_.end()) - values_.begin())] = lo;
    out[static_cast<std::size_t>(std::max_element(values_.begin(), values_.end()) - values_.begin())] = hi;
    return Raster(nx_, ny_, lx_, ly_, std::move(out));
  }

  Raster with_extent(double lx, double ly) const { return Raster(nx_, ny_, lx, ly, values_); }

  void write(std::ostream& os) const {
    char buf[64];
    os << nx_ << ' ' << ny_ << ' ';
    std::snprintf(buf, sizeof buf, "%.17g %.17g", lx_, ly_);
    os << buf << '\n';
    for (std::size_t j = 0; j < ny_; ++j) {
      for (std::size_t i = 0; i < nx_; ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", at(i, j));
        os << (i ? " " : "") << buf;
      }
      os << '\n';
    }
  }

  static Raster read(std::istream& is) {
    std::size_t nx = 0, ny = 0;
    double lx = 0, ly = 0;
    if (!(is >> nx >> ny >> lx >> ly)) throw InputError("raster: unreadable header");
    std::vector<double> v;
    v.reserve(nx * ny);
    double x;
    while (v.size() < nx * ny && is >> x) v.push_back(x);
    if (v.size() != nx * ny)
      throw InputError("raster: expected " + std::to_string(nx * ny) + " values, got " +
                       std::to_string(v.size()));
    return Raster(nx, ny, lx, ly, std::move(v));
  }

  static Raster load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("raster: cannot open " + path.string());
    return read(in);
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw InputError("raster: cannot write " + path.string());
    write(out);
  }

private:
  std::size_t nx_ = 0, ny_ = 0;
  double lx_ = 1.0, ly_ = 1.0;
  std::vector<double> values_;
};

using PermeabilityRaster = Raster;

/// Snapshot of a nodal field: one value per element, the mean of its corners
/// (exact element average of the bilinear field).
inline Raster snapshot_raster(const NodalField& f) {
  const auto& m = f.mesh();
  std::vector<double> v(m.num_elements());
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    const auto c = f.element_values(e);
    v[e] = 0.25 * (c[0] + c[1] + c[2] + c[3]);
  }
  return Raster(m.nx(), m.ny(), m.lx(), m.ly(), std::move(v));
}

} // namespace cda
