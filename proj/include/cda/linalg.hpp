#pragma once
/// @file linalg.hpp
/// @brief Compressed-row sparse matrices, triplet assembly and Krylov solvers
/// (CG for the SPD pressure system, BiCGStab for the upwinded transport
/// system), with optional Jacobi preconditioning.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <utility>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace cda {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

class SparseMatrix {
public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t n, std::vector<std::size_t> row_ptr, std::vector<std::size_t> cols,
               std::vector<double> vals)
      : n_(n), row_ptr_(std::move(row_ptr)), cols_(std::move(cols)), vals_(std::move(vals)) {}

  std::size_t size() const { return n_; }
  std::size_t nonzeros() const { return vals_.size(); }

  std::span<const std::size_t> row_ptr() const { return row_ptr_; }
  std::span<const std::size_t> cols() const { return cols_; }
  std::span<const double> values() const { return vals_; }
  std::span<double> values() { return vals_; }

  /// Entry (r, c); zero if structurally absent.
  double at(std::size_t r, std::size_t c) const {
    const auto b = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
    const auto e = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
    const auto it = std::lower_bound(b, e, c);
    return (it != e && *it == c) ? vals_[static_cast<std::size_t>(it - cols_.begin())] : 0.0;
  }

  void multiply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t r = 0; r < n_; ++r) {
      double s = 0.0;
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += vals_[k] * x[cols_[k]];
      y[r] = s;
    }
  }

  std::vector<double> operator*(std::span<const double> x) const {
    std::vector<double> y(n_);
    multiply(x, y);
    return y;
  }

  std::vector<double> diagonal() const {
    std::vector<double> d(n_, 0.0);
    for (std::size_t r = 0; r < n_; ++r) d[r] = at(r, r);
    return d;
  }

  /// Replace constrained rows by identity rows with rhs = prescribed value.
  /// With `symmetric`, the constrained columns are also eliminated from the
  /// free rows and moved into the right-hand side (keeps SPD matrices SPD).
  void constrain(std::span<const char> is_fixed, std::span<const double> fixed_value,
                 std::span<double> rhs, bool symmetric) {
    for (std::size_t r = 0; r < n_; ++r) {
      if (is_fixed[r]) {
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
          vals_[k] = cols_[k] == r ? 1.0 : 0.0;
        rhs[r] = fixed_value[r];
      } else if (symmetric) {
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
          if (is_fixed[cols_[k]]) {
            rhs[r] -= vals_[k] * fixed_value[cols_[k]];
            vals_[k] = 0.0;
          }
        }
      }
    }
  }

private:
  std::size_t n_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> cols_;
  std::vector<double> vals_;
};

/// Sum duplicate contributions into CSR. Duplicates are summed in (row, col,
/// value) order, so the result does not depend on the order of the input.
inline SparseMatrix assemble(std::size_t n, std::vector<Triplet> contributions) {
  for (const auto& t : contributions)
    if (t.row >= n || t.col >= n)
      throw std::out_of_range("assemble: index (" + std::to_string(t.row) + ", " +
                              std::to_string(t.col) + ") out of range for n = " +
                              std::to_string(n));
  std::sort(contributions.begin(), contributions.end(), [](const Triplet& a, const Triplet& b) {
    return std::tie(a.row, a.col, a.value) < std::tie(b.row, b.col, b.value);
  });
  std::vector<std::size_t> row_ptr(n + 1, 0), cols;
  std::vector<double> vals;
  cols.reserve(contributions.size());
  vals.reserve(contributions.size());
  for (std::size_t k = 0; k < contributions.size();) {
    const auto& t = contributions[k];
    double s = 0.0;
    std::size_t m = k;
    for (; m < contributions.size() && contributions[m].row == t.row &&
           contributions[m].col == t.col;
         ++m)
      s += contributions[m].value;
    cols.push_back(t.col);
    vals.push_back(s);
    ++row_ptr[t.row + 1];
    k = m;
  }
  std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
  return SparseMatrix(n, std::move(row_ptr), std::move(cols), std::move(vals));
}

enum class SolverMethod { cg, bicgstab };
enum class Preconditioner { none, jacobi };

struct SolverConfig {
  SolverMethod method = SolverMethod::cg;
  Preconditioner preconditioner = Preconditioner::none;
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  std::size_t max_iter = 0; // 0 -> 10 n
  /// Called with (iteration, current iterate) after every update.
  std::function<void(std::size_t, std::span<const double>)> on_iterate;
};

struct SolveReport {
  std::size_t iterations = 0;
  double residual = 0.0;
  std::vector<double> residual_history;
};

struct SolveResult {
  std::vector<double> x;
  SolveReport report;
};

class NoConvergence : public std::runtime_error {
public:
  NoConvergence(const std::string& what, std::vector<double> best, SolveReport report)
      : std::runtime_error(what), best_(std::move(best)), report_(std::move(report)) {}
  const std::vector<double>& best_iterate() const { return best_; }
  const SolveReport& report() const { return report_; }

private:
  std::vector<double> best_;
  SolveReport report_;
};

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline std::vector<double> inverse_diagonal(const SparseMatrix& A, Preconditioner p) {
  std::vector<double> d(A.size(), 1.0);
  if (p == Preconditioner::jacobi) {
    d = A.diagonal();
    for (auto& v : d) v = v != 0.0 ? 1.0 / v : 1.0;
  }
  return d;
}

inline SolveResult cg(const SparseMatrix& A, std::span<const double> b, const SolverConfig& cfg,
                      std::vector<double> x, double target, std::size_t max_iter) {
  const std::size_t n = A.size();
  const auto dinv = inverse_diagonal(A, cfg.preconditioner);
  std::vector<double> r(n), z(n), p(n), q(n);
  A.multiply(x, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
  SolveReport rep;
  double rn = norm(r);
  rep.residual_history.push_back(rn);
  if (rn <= target) return {std::move(x), {0, rn, rep.residual_history}};
  for (std::size_t i = 0; i < n; ++i) z[i] = dinv[i] * r[i];
  p = z;
  double rz = dot(r, z);
  std::vector<double> best = x;
  double best_rn = rn;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    A.multiply(p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0) || !std::isfinite(pq)) {
      rep.iterations = it;
      rep.residual = best_rn;
      throw NoConvergence("cg: breakdown (matrix not positive definite?)", best, rep);
    }
    const double alpha = rz / pq;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    rn = norm(r);
    rep.residual_history.push_back(rn);
    if (cfg.on_iterate) cfg.on_iterate(it, x);
    if (rn < best_rn) {
      best_rn = rn;
      best = x;
    }
    if (rn <= target) {
      rep.iterations = it;
      rep.residual = rn;
      return {std::move(x), std::move(rep)};
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = dinv[i] * r[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  rep.iterations = max_iter;
  rep.residual = best_rn;
  throw NoConvergence("cg: max_iter exceeded", best, rep);
}

inline SolveResult bicgstab(const SparseMatrix& A, std::span<const double> b,
                            const SolverConfig& cfg, std::vector<double> x, double target,
                            std::size_t max_iter) {
  const std::size_t n = A.size();
  const auto dinv = inverse_diagonal(A, cfg.preconditioner);
  std::vector<double> r(n), r0(n), p(n, 0.0), v(n, 0.0), s(n), t(n), ph(n), sh(n);
  A.multiply(x, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
  r0 = r;
  SolveReport rep;
  double rn = norm(r);
  rep.residual_history.push_back(rn);
  if (rn <= target) return {std::move(x), {0, rn, rep.residual_history}};
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  std::vector<double> best = x;
  double best_rn = rn;
  auto fail = [&](const char* why, std::size_t it) {
    rep.iterations = it;
    rep.residual = best_rn;
    throw NoConvergence(std::string("bicgstab: ") + why, best, rep);
  };
  for (std::size_t it = 1; it <= max_iter; ++it) {
    const double rho_new = dot(r0, r);
    if (rho_new == 0.0 || !std::isfinite(rho_new)) fail("breakdown (rho = 0)", it);
    const double beta = (rho_new / rho) * (alpha / omega);
    rho = rho_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    for (std::size_t i = 0; i < n; ++i) ph[i] = dinv[i] * p[i];
    A.multiply(ph, v);
    const double r0v = dot(r0, v);
    if (r0v == 0.0 || !std::isfinite(r0v)) fail("breakdown (r0.v = 0)", it);
    alpha = rho / r0v;
    for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    const double sn = norm(s);
    if (sn <= target) {
      for (std::size_t i = 0; i < n; ++i) x[i] += alpha * ph[i];
      rep.residual_history.push_back(sn);
      if (cfg.on_iterate) cfg.on_iterate(it, x);
      rep.iterations = it;
      rep.residual = sn;
      return {std::move(x), std::move(rep)};
    }
    for (std::size_t i = 0; i < n; ++i) sh[i] = dinv[i] * s[i];
    A.multiply(sh, t);
    const double tt = dot(t, t);
    if (tt == 0.0 || !std::isfinite(tt)) fail("breakdown (t = 0)", it);
    omega = dot(t, s) / tt;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * ph[i] + omega * sh[i];
      r[i] = s[i] - omega * t[i];
    }
    rn = norm(r);
    rep.residual_history.push_back(rn);
    if (cfg.on_iterate) cfg.on_iterate(it, x);
    if (rn < best_rn) {
      best_rn = rn;
      best = x;
    }
    if (rn <= target) {
      rep.iterations = it;
      rep.residual = rn;
      return {std::move(x), std::move(rep)};
    }
    if (omega == 0.0) fail("breakdown (omega = 0)", it);
  }
  rep.iterations = max_iter;
  rep.residual = best_rn;
  throw NoConvergence("bicgstab: max_iter exceeded", best, rep);
}

} // namespace detail

/// Solve A x = b. Stops when ||b - A x|| <= max(rel_tol ||b||, abs_tol).
inline SolveResult solve(const SparseMatrix& A, std::span<const double> b,
                         const SolverConfig& cfg, std::vector<double> x0 = {}) {
  const std::size_t n = A.size();
  if (b.size() != n) throw std::invalid_argument("solve: rhs size mismatch");
  if (!(cfg.rel_tol > 0.0) || !(cfg.abs_tol > 0.0))
    throw std::invalid_argument("solve: tolerances must be positive");
  if (x0.empty()) x0.assign(n, 0.0);
  if (x0.size() != n) throw std::invalid_argument("solve: initial guess size mismatch");
  const double target = std::max(cfg.rel_tol * detail::norm(b), cfg.abs_tol);
  const std::size_t max_iter = cfg.max_iter ? cfg.max_iter : 10 * std::max<std::size_t>(n, 1);
  return cfg.method == SolverMethod::cg ? detail::cg(A, b, cfg, std::move(x0), target, max_iter)
                                        : detail::bicgstab(A, b, cfg, std::move(x0), target,
                                                           max_iter);
}

/// sum_k coeff_k * A_k for square matrices of equal size.
inline SparseMatrix linear_combination(
    std::initializer_list<std::pair<double, const SparseMatrix*>> terms) {
  if (terms.size() == 0) return {};
  const std::size_t n = terms.begin()->second->size();
  for (const auto& t : terms)
    if (t.second->size() != n) throw std::invalid_argument("linear_combination: size mismatch");
  std::vector<std::size_t> row_ptr(n + 1, 0), cols;
  std::vector<double> vals;
  std::vector<std::pair<std::size_t, double>> row;
  for (std::size_t r = 0; r < n; ++r) {
    row.clear();
    for (const auto& [c, A] : terms) {
      const auto rp = A->row_ptr();
      const auto cs = A->cols();
      const auto vs = A->values();
      for (std::size_t k = rp[r]; k < rp[r + 1]; ++k) row.push_back({cs[k], c * vs[k]});
    }
    std::stable_sort(row.begin(), row.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t k = 0; k < row.size();) {
      double s = 0.0;
      std::size_t m = k;
      for (; m < row.size() && row[m].first == row[k].first; ++m) s += row[m].second;
      cols.push_back(row[k].first);
      vals.push_back(s);
      k = m;
    }
    row_ptr[r + 1] = cols.size();
  }
  return SparseMatrix(n, std::move(row_ptr), std::move(cols), std::move(vals));
}

/// Linear system produced by the assembly routines.
struct LinearSystem {
  SparseMatrix matrix;
  std::vector<double> rhs;
};

} // namespace cda
