#pragma once

#include <span>
#include <vector>

namespace virecon {

/// Compressed sparse row matrix with sorted column indices per row.
/// Used for the symmetric stiffness/mass operators and PDAS systems.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  /// Takes a sparsity pattern with sorted, duplicate-free column indices.
  CsrMatrix(std::size_t n, std::vector<int> row_ptr, std::vector<int> cols);
  static CsrMatrix identity(std::size_t n);
  static CsrMatrix diagonal(std::span<const double> d);

  std::size_t size() const { return n_; }
  std::size_t nonzeros() const { return cols_.size(); }
  std::span<const int> row_ptr() const { return row_ptr_; }
  std::span<const int> cols() const { return cols_; }
  std::span<const double> values() const { return vals_; }
  std::span<double> values() { return vals_; }

  /// Position of (i, j) in values(), or -1 when outside the pattern.
  int find(int i, int j) const;
  double at(int i, int j) const;
  void add(int i, int j, double v);

  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> operator*(std::span<const double> x) const;
  /// y = A^T x for a (possibly rectangular) matrix; y must be sized to the
  /// number of columns and is overwritten.
  void multiply_transpose(std::span<const double> x, std::span<double> y) const;
  std::vector<double> diagonal_values() const;
  std::vector<double> row_sums() const;

  /// this + s * other; both must share the same pattern.
  CsrMatrix axpy(double s, const CsrMatrix& other) const;
  CsrMatrix scaled(double s) const;

  /// Largest |a_ij - a_ji| over the pattern.
  double max_asymmetry() const;

 private:
  std::size_t n_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> cols_;
  std::vector<double> vals_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);

/// Symmetric elimination of the rows/columns flagged in `fixed`: the matrix
/// rows and columns are zeroed with a unit diagonal, and the right-hand side is
/// corrected so that x_i = values_i on fixed dofs.
void eliminate_dofs(CsrMatrix& a, std::span<double> b, std::span<const char> fixed,
                    std::span<const double> values);

struct SolveStats {
  int iterations = 0;
  double residual = 0.0;  // ||b - A x|| over the free rows
};

/// Jacobi-preconditioned conjugate gradients restricted to the rows with
/// free[i] != 0 (all rows when `free` is empty). Entries of x on non-free rows
/// are kept as given and treated as data. Stops at ||r|| <= rel_tol * ||b_free||
/// where b_free is the right-hand side with the fixed columns moved over.
/// Throws ConvergenceFailure after 10 * (number of free rows) iterations.
SolveStats conjugate_gradient(const CsrMatrix& a, std::span<const double> b, std::span<double> x,
                              double rel_tol = 1e-12, std::span<const char> free = {});

/// Convenience wrapper: zero initial guess, full system.
std::vector<double> solve_spd(const CsrMatrix& a, std::span<const double> b,
                              double rel_tol = 1e-12);

}  // namespace virecon
