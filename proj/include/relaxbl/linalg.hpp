#pragma once

// Small dense real/complex linear algebra for systems with at most a handful
// of unknowns per grid point: eigenpairs, stable/unstable invariant subspaces,
// LU solves and principal angles between subspaces.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "relaxbl/errors.hpp"

namespace relaxbl {

using Complex = std::complex<double>;
using Vector = std::vector<double>;
using CVector = std::vector<Complex>;

/// Row-major dense matrix. Zero-sized blocks (n x 0) are allowed so that empty
/// stable or unstable subspaces compose without special cases.
template <class T>
class BasicMatrix {
 public:
  using value_type = T;

  BasicMatrix() = default;
  BasicMatrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  BasicMatrix(std::initializer_list<std::initializer_list<T>> init);

  static BasicMatrix identity(std::size_t n);
  static BasicMatrix column(std::span<const T> v);
  static BasicMatrix row(std::span<const T> v);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<T> row_span(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const T> row_span(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::vector<T> col(std::size_t j) const;
  std::span<const T> data() const { return data_; }

  BasicMatrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
  void set_block(std::size_t r0, std::size_t c0, const BasicMatrix& b);
  BasicMatrix transpose() const;
  /// Conjugate transpose (plain transpose for real matrices).
  BasicMatrix adjoint() const;
  double max_abs() const;

  BasicMatrix& operator+=(const BasicMatrix& o);
  BasicMatrix& operator-=(const BasicMatrix& o);
  BasicMatrix& operator*=(T s);

  bool operator==(const BasicMatrix& o) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using Matrix = BasicMatrix<double>;
using CMatrix = BasicMatrix<Complex>;

template <class T>
BasicMatrix<T> operator+(BasicMatrix<T> a, const BasicMatrix<T>& b) { return a += b; }
template <class T>
BasicMatrix<T> operator-(BasicMatrix<T> a, const BasicMatrix<T>& b) { return a -= b; }
template <class T>
BasicMatrix<T> operator*(BasicMatrix<T> a, T s) { return a *= s; }
template <class T>
BasicMatrix<T> operator*(T s, BasicMatrix<T> a) { return a *= s; }
template <class T>
BasicMatrix<T> operator*(const BasicMatrix<T>& a, const BasicMatrix<T>& b);
template <class T>
std::vector<T> operator*(const BasicMatrix<T>& a, std::span<const T> x);
template <class T>
std::vector<T> operator*(const BasicMatrix<T>& a, const std::vector<T>& x) {
  return a * std::span<const T>(x);
}

Matrix hstack(const Matrix& a, const Matrix& b);
Matrix vstack(const Matrix& a, const Matrix& b);
CMatrix to_complex(const Matrix& m);

struct EigenPair {
  Complex eigenvalue;
  CVector right_eigenvector;  // unit Euclidean norm
};

/// Paired right/left stable and unstable bases. (l_plus; l_minus) is the
/// inverse of (r_plus, r_minus).
struct SpectralSplit {
  Matrix r_plus;   // n x n_plus, Re(lambda) > 0
  Matrix r_minus;  // n x n_minus, Re(lambda) < 0
  Matrix l_plus;   // n_plus x n
  Matrix l_minus;  // n_minus x n

  std::size_t n_plus() const { return r_plus.cols(); }
  std::size_t n_minus() const { return r_minus.cols(); }
  /// R+ L+ (resp. R- L-): spectral projectors onto the unstable/stable spaces.
  Matrix projector_plus() const { return r_plus * l_plus; }
  Matrix projector_minus() const { return r_minus * l_minus; }
};

/// Coefficients c[0..n] of det(z I - m) = sum_k c[k] z^k (c[n] == 1), from
/// sums of principal minors.
CVector characteristic_polynomial(const CMatrix& m);

/// Roots of sum_k coeffs[k] z^k by Aberth-Ehrlich simultaneous iteration,
/// started from Newton-polygon radii. Throws ConvergenceFailure after 500
/// sweeps.
CVector polynomial_roots(std::span<const Complex> coeffs);

/// All eigenpairs of a square matrix with 1 <= n <= 4.
std::vector<EigenPair> eigen_small(const CMatrix& m);
std::vector<EigenPair> eigen_small(const Matrix& m);

/// Real stable/unstable invariant subspaces of a real matrix. Complex pairs
/// contribute their real and imaginary parts as two real columns; each block
/// is orthonormalized by modified Gram-Schmidt.
SpectralSplit spectral_split(const Matrix& m, double tol_realpart = 1e-10);

/// Orthonormal basis (complex) of the invariant subspace with Re(lambda) > 0.
/// Throws CharacteristicBoundary if some |Re(lambda)| <= tol_realpart * scale.
CMatrix unstable_basis(const CMatrix& m, double tol_realpart = 1e-10);

/// LU factorization with partial pivoting and row equilibration. A pivot of
/// the equilibrated matrix below 1e-14 raises SingularMatrix.
template <class T>
class LuFactorization {
 public:
  explicit LuFactorization(const BasicMatrix<T>& m);
  void solve_in_place(std::span<T> rhs) const;
  std::vector<T> solve(std::span<const T> rhs) const;
  BasicMatrix<T> solve(const BasicMatrix<T>& rhs) const;
  T determinant() const;
  std::size_t size() const { return lu_.rows(); }

 private:
  BasicMatrix<T> lu_;
  std::vector<std::size_t> perm_;
  std::vector<double> row_scale_;
  int sign_ = 1;
};

Vector solve_dense(const Matrix& m, std::span<const double> rhs);
Matrix solve_dense(const Matrix& m, const Matrix& rhs);
Matrix inverse(const Matrix& m);
CMatrix inverse(const CMatrix& m);
double determinant(const Matrix& m);
Complex determinant(const CMatrix& m);

/// Orthonormal basis of the column span (modified Gram-Schmidt with one
/// reorthogonalization pass). Throws InvalidArgument on rank deficiency.
Matrix orthonormalize_columns(const Matrix& a);
CMatrix orthonormalize_columns(const CMatrix& a);

/// Eigenvalues of a real symmetric matrix, ascending.
Vector symmetric_eigenvalues(const Matrix& s);

/// Largest principal angle (radians) between the column spans of a and b.
double subspace_gap(const Matrix& a, const Matrix& b);

}  // namespace relaxbl
