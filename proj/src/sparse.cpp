#include "virecon/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "virecon/errors.hpp"

namespace virecon {

CsrMatrix::CsrMatrix(std::size_t n, std::vector<int> row_ptr, std::vector<int> cols)
    : n_(n), row_ptr_(std::move(row_ptr)), cols_(std::move(cols)), vals_(cols_.size(), 0.0) {
  if (row_ptr_.size() != n_ + 1 || static_cast<std::size_t>(row_ptr_.back()) != cols_.size())
    throw InvalidArgument("inconsistent CSR pattern");
}

CsrMatrix CsrMatrix::identity(std::size_t n) {
  std::vector<double> ones(n, 1.0);
  return diagonal(ones);
}

CsrMatrix CsrMatrix::diagonal(std::span<const double> d) {
  const std::size_t n = d.size();
  std::vector<int> rp(n + 1), cols(n);
  for (std::size_t i = 0; i < n; ++i) {
    rp[i + 1] = static_cast<int>(i + 1);
    cols[i] = static_cast<int>(i);
  }
  CsrMatrix m(n, std::move(rp), std::move(cols));
  std::copy(d.begin(), d.end(), m.vals_.begin());
  return m;
}

int CsrMatrix::find(int i, int j) const {
  const auto begin = cols_.begin() + row_ptr_[i];
  const auto end = cols_.begin() + row_ptr_[i + 1];
  const auto it = std::lower_bound(begin, end, j);
  if (it == end || *it != j) return -1;
  return static_cast<int>(it - cols_.begin());
}

double CsrMatrix::at(int i, int j) const {
  const int p = find(i, j);
  return p < 0 ? 0.0 : vals_[p];
}

void CsrMatrix::add(int i, int j, double v) {
  const int p = find(i, j);
  if (p < 0) throw InvalidArgument("entry outside the sparsity pattern");
  vals_[p] += v;
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) s += vals_[p] * x[cols_[p]];
    y[i] = s;
  }
}

std::vector<double> CsrMatrix::operator*(std::span<const double> x) const {
  std::vector<double> y(n_);
  multiply(x, y);
  return y;
}

void CsrMatrix::multiply_transpose(std::span<const double> x, std::span<double> y) const {
  std::fill(y.begin(), y.end(), 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) y[cols_[p]] += vals_[p] * x[i];
  }
}

std::vector<double> CsrMatrix::diagonal_values() const {
  std::vector<double> d(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) d[i] = at(static_cast<int>(i), static_cast<int>(i));
  return d;
}

std::vector<double> CsrMatrix::row_sums() const {
  std::vector<double> s(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) s[i] += vals_[p];
  }
  return s;
}

CsrMatrix CsrMatrix::axpy(double s, const CsrMatrix& other) const {
  if (other.n_ != n_ || other.cols_ != cols_) throw InvalidArgument("axpy: pattern mismatch");
  CsrMatrix r = *this;
  for (std::size_t p = 0; p < vals_.size(); ++p) r.vals_[p] += s * other.vals_[p];
  return r;
}

CsrMatrix CsrMatrix::scaled(double s) const {
  CsrMatrix r = *this;
  for (double& v : r.vals_) v *= s;
  return r;
}

double CsrMatrix::max_asymmetry() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      worst = std::max(worst, std::abs(vals_[p] - at(cols_[p], static_cast<int>(i))));
    }
  }
  return worst;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

void eliminate_dofs(CsrMatrix& a, std::span<double> b, std::span<const char> fixed,
                    std::span<const double> values) {
  const auto rp = a.row_ptr();
  const auto cols = a.cols();
  auto vals = a.values();
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (fixed[i]) continue;
    for (int p = rp[i]; p < rp[i + 1]; ++p) {
      if (fixed[cols[p]]) {
        b[i] -= vals[p] * values[cols[p]];
        vals[p] = 0.0;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!fixed[i]) continue;
    for (int p = rp[i]; p < rp[i + 1]; ++p) vals[p] = cols[p] == static_cast<int>(i) ? 1.0 : 0.0;
    b[i] = values[i];
  }
}

SolveStats conjugate_gradient(const CsrMatrix& a, std::span<const double> b, std::span<double> x,
                              double rel_tol, std::span<const char> free) {
  const std::size_t n = a.size();
  const bool all_free = free.empty();
  auto is_free = [&](std::size_t i) { return all_free || free[i] != 0; };

  std::size_t nfree = 0;
  for (std::size_t i = 0; i < n; ++i) nfree += is_free(i) ? 1 : 0;

  std::vector<double> inv_diag(n, 0.0);
  {
    const auto d = a.diagonal_values();
    for (std::size_t i = 0; i < n; ++i) {
      if (!is_free(i)) continue;
      if (!(d[i] > 0.0)) throw InvalidArgument("CG needs a positive diagonal on free rows");
      inv_diag[i] = 1.0 / d[i];
    }
  }

  // Right-hand side for the free block: b_F - A_FC x_C.
  std::vector<double> fixed_part(n, 0.0), ax(n), rhs(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) fixed_part[i] = is_free(i) ? 0.0 : x[i];
  a.multiply(fixed_part, ax);
  for (std::size_t i = 0; i < n; ++i) rhs[i] = is_free(i) ? b[i] - ax[i] : 0.0;
  const double rhs_norm = norm2(rhs);

  std::vector<double> xf(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) xf[i] = is_free(i) ? x[i] : 0.0;

  auto residual_into = [&](std::vector<double>& r) {
    a.multiply(xf, ax);
    for (std::size_t i = 0; i < n; ++i) r[i] = is_free(i) ? rhs[i] - ax[i] : 0.0;
  };

  SolveStats stats;
  const double target = rel_tol * rhs_norm;
  if (nfree == 0 || rhs_norm == 0.0) {
    if (rhs_norm == 0.0) {
      for (std::size_t i = 0; i < n; ++i)
        if (is_free(i)) x[i] = 0.0;
    }
    return stats;
  }

  const int cap = static_cast<int>(10 * nfree);
  std::vector<double> r(n), z(n), p(n), q(n);
  residual_into(r);
  double rnorm = norm2(r);
  int it = 0;
  // Restart on the true residual when the recursive one has converged but the
  // true one has drifted above the target.
  bool breakdown = false;
  while (rnorm > target && !breakdown) {
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = dot(r, z);
    while (rnorm > target && it < cap) {
      a.multiply(p, q);
      for (std::size_t i = 0; i < n; ++i)
        if (!is_free(i)) q[i] = 0.0;
      const double pq = dot(p, q);
      if (!(pq > 0.0)) {
        breakdown = true;
        break;
      }
      const double alpha = rz / pq;
      for (std::size_t i = 0; i < n; ++i) {
        xf[i] += alpha * p[i];
        r[i] -= alpha * q[i];
      }
      ++it;
      rnorm = norm2(r);
      for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
      const double rz_new = dot(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    residual_into(r);
    rnorm = norm2(r);
    if ((it >= cap || breakdown) && rnorm > target) {
      std::ostringstream msg;
      msg << "conjugate gradient did not converge in " << cap << " iterations (residual "
          << rnorm << ", target " << target << ")";
      throw ConvergenceFailure(msg.str(), rnorm);
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (is_free(i)) x[i] = xf[i];
  stats.iterations = it;
  stats.residual = rnorm;
  return stats;
}

std::vector<double> solve_spd(const CsrMatrix& a, std::span<const double> b, double rel_tol) {
  std::vector<double> x(a.size(), 0.0);
  conjugate_gradient(a, b, x, rel_tol);
  return x;
}

}  // namespace virecon
