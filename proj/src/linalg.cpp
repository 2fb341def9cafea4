#include "relaxbl/linalg.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace relaxbl {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double abs_value(double x) { return std::abs(x); }
double abs_value(const Complex& x) { return std::abs(x); }
double conj_value(double x) { return x; }
Complex conj_value(const Complex& x) { return std::conj(x); }

template <class T>
void require_square(const BasicMatrix<T>& m, const char* what) {
  if (!m.square() || m.rows() == 0) {
    std::ostringstream os;
    os << what << ": expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
    throw InvalidArgument(os.str());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// BasicMatrix

template <class T>
BasicMatrix<T>::BasicMatrix(std::initializer_list<std::initializer_list<T>> init) {
  rows_ = init.size();
  cols_ = rows_ == 0 ? 0 : init.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : init) {
    if (r.size() != cols_) throw InvalidArgument("ragged matrix initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

template <class T>
BasicMatrix<T> BasicMatrix<T>::identity(std::size_t n) {
  BasicMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
  return m;
}

template <class T>
BasicMatrix<T> BasicMatrix<T>::column(std::span<const T> v) {
  BasicMatrix m(v.size(), 1);
  std::copy(v.begin(), v.end(), m.data_.begin());
  return m;
}

template <class T>
BasicMatrix<T> BasicMatrix<T>::row(std::span<const T> v) {
  BasicMatrix m(1, v.size());
  std::copy(v.begin(), v.end(), m.data_.begin());
  return m;
}

template <class T>
std::vector<T> BasicMatrix<T>::col(std::size_t j) const {
  std::vector<T> c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

template <class T>
BasicMatrix<T> BasicMatrix<T>::block(std::size_t r0, std::size_t c0, std::size_t nr,
                                     std::size_t nc) const {
  if (r0 + nr > rows_ || c0 + nc > cols_) throw InvalidArgument("block out of range");
  BasicMatrix b(nr, nc);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
  return b;
}

template <class T>
void BasicMatrix<T>::set_block(std::size_t r0, std::size_t c0, const BasicMatrix& b) {
  if (r0 + b.rows() > rows_ || c0 + b.cols() > cols_) throw InvalidArgument("block out of range");
  for (std::size_t i = 0; i < b.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) (*this)(r0 + i, c0 + j) = b(i, j);
}

template <class T>
BasicMatrix<T> BasicMatrix<T>::transpose() const {
  BasicMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

template <class T>
BasicMatrix<T> BasicMatrix<T>::adjoint() const {
  BasicMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = conj_value((*this)(i, j));
  return t;
}

template <class T>
double BasicMatrix<T>::max_abs() const {
  double m = 0.0;
  for (const auto& x : data_) m = std::max(m, abs_value(x));
  return m;
}

template <class T>
BasicMatrix<T>& BasicMatrix<T>::operator+=(const BasicMatrix& o) {
  if (o.rows_ != rows_ || o.cols_ != cols_) throw InvalidArgument("matrix sum shape mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

template <class T>
BasicMatrix<T>& BasicMatrix<T>::operator-=(const BasicMatrix& o) {
  if (o.rows_ != rows_ || o.cols_ != cols_) throw InvalidArgument("matrix difference shape mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

template <class T>
BasicMatrix<T>& BasicMatrix<T>::operator*=(T s) {
  for (auto& x : data_) x *= s;
  return *this;
}

template <class T>
BasicMatrix<T> operator*(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
  if (a.cols() != b.rows()) throw InvalidArgument("matrix product shape mismatch");
  BasicMatrix<T> c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const T aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

template <class T>
std::vector<T> operator*(const BasicMatrix<T>& a, std::span<const T> x) {
  if (a.cols() != x.size()) throw InvalidArgument("matrix-vector shape mismatch");
  std::vector<T> y(a.rows(), T{});
  for (std::size_t i = 0; i < a.rows(); ++i) {
    T s{};
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

template class BasicMatrix<double>;
template class BasicMatrix<Complex>;
template Matrix operator*(const Matrix&, const Matrix&);
template CMatrix operator*(const CMatrix&, const CMatrix&);
template Vector operator*(const Matrix&, std::span<const double>);
template CVector operator*(const CMatrix&, std::span<const Complex>);

Matrix hstack(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw InvalidArgument("hstack: row count mismatch");
  Matrix c(a.rows(), a.cols() + b.cols());
  c.set_block(0, 0, a);
  c.set_block(0, a.cols(), b);
  return c;
}

Matrix vstack(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw InvalidArgument("vstack: column count mismatch");
  Matrix c(a.rows() + b.rows(), a.cols());
  c.set_block(0, 0, a);
  c.set_block(a.rows(), 0, b);
  return c;
}

CMatrix to_complex(const Matrix& m) {
  CMatrix c(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) c(i, j) = m(i, j);
  return c;
}

// ---------------------------------------------------------------------------
// LU

template <class T>
LuFactorization<T>::LuFactorization(const BasicMatrix<T>& m) : lu_(m) {
  require_square(m, "LU");
  const std::size_t n = m.rows();
  perm_.resize(n);
  row_scale_.assign(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    perm_[i] = i;
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s = std::max(s, abs_value(lu_(i, j)));
    if (s == 0.0) throw SingularMatrix("LU: zero row " + std::to_string(i));
    row_scale_[i] = 1.0 / s;
    for (std::size_t j = 0; j < n; ++j) lu_(i, j) *= row_scale_[i];
  }
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = abs_value(lu_(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = abs_value(lu_(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (!(best >= 1e-14)) {
      std::ostringstream os;
      os << "LU: pivot " << best << " below 1e-14 at column " << k;
      throw SingularMatrix(os.str());
    }
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));
      std::swap(perm_[k], perm_[p]);
      sign_ = -sign_;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const T f = lu_(i, k) / lu_(k, k);
      lu_(i, k) = f;
      for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
    }
  }
}

template <class T>
void LuFactorization<T>::solve_in_place(std::span<T> rhs) const {
  const std::size_t n = lu_.rows();
  if (rhs.size() != n) throw InvalidArgument("LU solve: rhs size mismatch");
  T buf[8];
  std::vector<T> heap;
  T* y = buf;
  if (n > 8) {
    heap.resize(n);
    y = heap.data();
  }
  for (std::size_t i = 0; i < n; ++i) y[i] = rhs[perm_[i]] * row_scale_[perm_[i]];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) y[i] -= lu_(i, j) * y[j];
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = i + 1; j < n; ++j) y[i] -= lu_(i, j) * y[j];
    y[i] /= lu_(i, i);
  }
  for (std::size_t i = 0; i < n; ++i) rhs[i] = y[i];
}

template <class T>
std::vector<T> LuFactorization<T>::solve(std::span<const T> rhs) const {
  std::vector<T> x(rhs.begin(), rhs.end());
  solve_in_place(x);
  return x;
}

template <class T>
BasicMatrix<T> LuFactorization<T>::solve(const BasicMatrix<T>& rhs) const {
  BasicMatrix<T> x(rhs.rows(), rhs.cols());
  for (std::size_t j = 0; j < rhs.cols(); ++j) {
    auto c = rhs.col(j);
    solve_in_place(c);
    for (std::size_t i = 0; i < rhs.rows(); ++i) x(i, j) = c[i];
  }
  return x;
}

template <class T>
T LuFactorization<T>::determinant() const {
  T d = static_cast<double>(sign_);
  for (std::size_t i = 0; i < lu_.rows(); ++i) d *= lu_(i, i) / row_scale_[i];
  return d;
}

template class LuFactorization<double>;
template class LuFactorization<Complex>;

Vector solve_dense(const Matrix& m, std::span<const double> rhs) {
  return LuFactorization<double>(m).solve(rhs);
}

Matrix solve_dense(const Matrix& m, const Matrix& rhs) {
  return LuFactorization<double>(m).solve(rhs);
}

Matrix inverse(const Matrix& m) {
  return LuFactorization<double>(m).solve(Matrix::identity(m.rows()));
}

CMatrix inverse(const CMatrix& m) {
  return LuFactorization<Complex>(m).solve(CMatrix::identity(m.rows()));
}

namespace {

// Determinant by Gaussian elimination without the singularity threshold, so
// exactly singular minors evaluate to zero instead of throwing.
template <class T>
T raw_determinant(BasicMatrix<T> a) {
  const std::size_t n = a.rows();
  T det = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (abs_value(a(i, k)) > abs_value(a(p, k))) p = i;
    if (abs_value(a(p, k)) == 0.0) return T{0.0};
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      det = -det;
    }
    det *= a(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const T f = a(i, k) / a(k, k);
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
    }
  }
  return det;
}

}  // namespace

double determinant(const Matrix& m) {
  require_square(m, "determinant");
  return raw_determinant(m);
}

Complex determinant(const CMatrix& m) {
  require_square(m, "determinant");
  return raw_determinant(m);
}

// ---------------------------------------------------------------------------
// Gram-Schmidt

namespace {

template <class T>
BasicMatrix<T> mgs(const BasicMatrix<T>& a) {
  const std::size_t n = a.rows();
  const std::size_t k = a.cols();
  BasicMatrix<T> q = a;
  for (std::size_t j = 0; j < k; ++j) {
    double original = 0.0;
    for (std::size_t i = 0; i < n; ++i) original += std::norm(Complex(q(i, j)));
    original = std::sqrt(original);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t p = 0; p < j; ++p) {
        T dot{};
        for (std::size_t i = 0; i < n; ++i) dot += conj_value(q(i, p)) * q(i, j);
        for (std::size_t i = 0; i < n; ++i) q(i, j) -= dot * q(i, p);
      }
    }
    double nrm = 0.0;
    for (std::size_t i = 0; i < n; ++i) nrm += std::norm(Complex(q(i, j)));
    nrm = std::sqrt(nrm);
    if (!(nrm > 1e-12 * original) || nrm == 0.0)
      throw InvalidArgument("orthonormalize: column " + std::to_string(j) +
                            " is linearly dependent on the previous ones");
    for (std::size_t i = 0; i < n; ++i) q(i, j) /= nrm;
  }
  return q;
}

}  // namespace

Matrix orthonormalize_columns(const Matrix& a) { return mgs(a); }
CMatrix orthonormalize_columns(const CMatrix& a) { return mgs(a); }

// ---------------------------------------------------------------------------
// Symmetric eigenvalues (cyclic Jacobi)

Vector symmetric_eigenvalues(const Matrix& s_in) {
  require_square(s_in, "symmetric_eigenvalues");
  Matrix s = s_in;
  const std::size_t n = s.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    double diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      diag += s(i, i) * s(i, i);
      for (std::size_t j = i + 1; j < n; ++j) off += s(i, j) * s(i, j);
    }
    if (off <= kEps * kEps * diag || off == 0.0) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (s(p, q) == 0.0) continue;
        const double theta = (s(q, q) - s(p, p)) / (2.0 * s(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double skp = s(k, p);
          const double skq = s(k, q);
          s(k, p) = c * skp - sn * skq;
          s(k, q) = sn * skp + c * skq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double spk = s(p, k);
          const double sqk = s(q, k);
          s(p, k) = c * spk - sn * sqk;
          s(q, k) = sn * spk + c * sqk;
        }
      }
  }
  Vector ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = s(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

// ---------------------------------------------------------------------------
// Characteristic polynomial and roots

CVector characteristic_polynomial(const CMatrix& m) {
  require_square(m, "characteristic_polynomial");
  const std::size_t n = m.rows();
  if (n > 4) throw InvalidArgument("characteristic_polynomial: n must be <= 4");
  // Coefficient of z^(n-k) is (-1)^k E_k, E_k = sum of k x k principal minors.
  CVector e(n + 1, Complex{0.0});
  e[0] = 1.0;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    const auto k = static_cast<std::size_t>(std::popcount(mask));
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) idx.push_back(i);
    CMatrix minor(k, k);
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) minor(a, b) = m(idx[a], idx[b]);
    e[k] += raw_determinant(minor);
  }
  CVector c(n + 1);
  for (std::size_t k = 0; k <= n; ++k) c[n - k] = (k % 2 == 0 ? 1.0 : -1.0) * e[k];
  return c;
}

namespace {

// Initial approximations on circles whose radii come from the upper convex
// hull of (k, log|c_k|).
CVector newton_polygon_start(const CVector& c) {
  const std::size_t n = c.size() - 1;
  std::vector<std::size_t> pts;
  std::vector<double> logs(n + 1, -std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k <= n; ++k)
    if (std::abs(c[k]) > 0.0) logs[k] = std::log(std::abs(c[k]));
  for (std::size_t k = 0; k <= n; ++k) {
    if (!std::isfinite(logs[k])) continue;
    while (pts.size() >= 2) {
      const std::size_t a = pts[pts.size() - 2];
      const std::size_t b = pts.back();
      const double cross = (static_cast<double>(b) - a) * (logs[k] - logs[a]) -
                           (logs[b] - logs[a]) * (static_cast<double>(k) - a);
      if (cross >= 0.0)
        pts.pop_back();
      else
        break;
    }
    pts.push_back(k);
  }
  CVector z;
  z.reserve(n);
  constexpr double sigma = 0.7;
  for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
    const std::size_t a = pts[s];
    const std::size_t b = pts[s + 1];
    const std::size_t cnt = b - a;
    const double radius = std::exp((logs[a] - logs[b]) / static_cast<double>(cnt));
    for (std::size_t i = 0; i < cnt; ++i) {
      const double ang = 2.0 * std::numbers::pi * static_cast<double>(i) / cnt +
                         2.0 * std::numbers::pi * static_cast<double>(s) / n + sigma;
      z.push_back(std::polar(radius, ang));
    }
  }
  return z;
}

}  // namespace

CVector polynomial_roots(std::span<const Complex> coeffs) {
  CVector c(coeffs.begin(), coeffs.end());
  while (!c.empty() && std::abs(c.back()) == 0.0) c.pop_back();
  if (c.size() < 2) throw InvalidArgument("polynomial_roots: degree must be >= 1");
  CVector roots;
  // Exact zero roots.
  std::size_t lead_zeros = 0;
  while (std::abs(c[lead_zeros]) == 0.0) ++lead_zeros;
  roots.assign(lead_zeros, Complex{0.0});
  c.erase(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(lead_zeros));
  const Complex lead = c.back();
  for (auto& x : c) x /= lead;
  const std::size_t n = c.size() - 1;
  if (n == 0) return roots;
  if (n == 1) {
    roots.push_back(-c[0]);
    return roots;
  }

  CVector z = newton_polygon_start(c);
  std::vector<bool> done(n, false);
  bool all_done = false;
  for (int it = 0; it < 500 && !all_done; ++it) {
    all_done = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (done[i]) continue;
      Complex p = c[n];
      Complex dp = 0.0;
      double bound = std::abs(c[n]);
      const double az = std::abs(z[i]);
      for (std::size_t k = n; k-- > 0;) {
        dp = dp * z[i] + p;
        p = p * z[i] + c[k];
        bound = bound * az + std::abs(c[k]);
      }
      if (std::abs(p) <= 8.0 * n * kEps * bound) {
        done[i] = true;
        continue;
      }
      all_done = false;
      Complex sum = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) sum += 1.0 / (z[i] - z[j]);
      if (std::abs(dp) == 0.0) {
        z[i] += std::polar(1e-8 * (1.0 + az), 1.0 + static_cast<double>(i));
        continue;
      }
      const Complex ratio = p / dp;
      const Complex w = ratio / (1.0 - ratio * sum);
      z[i] -= w;
      if (std::abs(w) <= 2.0 * kEps * std::abs(z[i])) done[i] = true;
    }
  }
  if (!all_done) {
    for (std::size_t i = 0; i < n; ++i)
      if (!done[i])
        throw ConvergenceFailure(
            "polynomial_roots: no convergence within 500 iterations (ill-conditioned input)");
  }
  roots.insert(roots.end(), z.begin(), z.end());
  return roots;
}

// ---------------------------------------------------------------------------
// Eigenpairs

namespace {

struct Cluster {
  Complex value;
  std::size_t multiplicity = 0;
  CMatrix basis;  // n x multiplicity
};

// Null space of a (n x n) of requested dimension via Gaussian elimination
// with complete pivoting: the first n - dim pivots are eliminated and the
// trailing block is required to be negligible.
CMatrix null_space(CMatrix a, std::size_t dim, double scale) {
  const std::size_t n = a.rows();
  const std::size_t rank = n - dim;
  std::vector<std::size_t> colperm(n);
  for (std::size_t j = 0; j < n; ++j) colperm[j] = j;
  for (std::size_t k = 0; k < rank; ++k) {
    std::size_t pr = k;
    std::size_t pc = k;
    double best = -1.0;
    for (std::size_t i = k; i < n; ++i)
      for (std::size_t j = k; j < n; ++j)
        if (std::abs(a(i, j)) > best) {
          best = std::abs(a(i, j));
          pr = i;
          pc = j;
        }
    if (best <= 1e-13 * scale)
      throw ConvergenceFailure("eigenvector extraction: null space larger than the eigenvalue multiplicity");
    for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(pr, j));
    for (std::size_t i = 0; i < n; ++i) std::swap(a(i, k), a(i, pc));
    std::swap(colperm[k], colperm[pc]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const Complex f = a(i, k) / a(k, k);
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
    }
  }
  double rest = 0.0;
  for (std::size_t i = rank; i < n; ++i)
    for (std::size_t j = rank; j < n; ++j) rest = std::max(rest, std::abs(a(i, j)));
  if (rest > 1e-6 * scale)
    throw ConvergenceFailure("eigenvector extraction: defective or inaccurate eigenvalue cluster");

  CMatrix basis(n, dim);
  for (std::size_t f = 0; f < dim; ++f) {
    CVector y(n, Complex{0.0});
    y[rank + f] = 1.0;
    for (std::size_t i = rank; i-- > 0;) {
      Complex s = 0.0;
      for (std::size_t j = i + 1; j < n; ++j) s += a(i, j) * y[j];
      y[i] = -s / a(i, i);
    }
    for (std::size_t i = 0; i < n; ++i) basis(colperm[i], f) = y[i];
  }
  return basis;
}

CVector normalized(CVector v) {
  double nrm = 0.0;
  for (const auto& x : v) nrm += std::norm(x);
  nrm = std::sqrt(nrm);
  for (auto& x : v) x /= nrm;
  return v;
}

// Two steps of inverse iteration with pivot flooring; returns the refined
// unit vector.
CVector inverse_iteration(const CMatrix& m, Complex lambda, CVector v, double scale) {
  const std::size_t n = m.rows();
  for (int step = 0; step < 2; ++step) {
    CMatrix a = m;
    for (std::size_t i = 0; i < n; ++i) a(i, i) -= lambda;
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    CVector y = v;
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t p = k;
      for (std::size_t i = k + 1; i < n; ++i)
        if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
      if (p != k) {
        for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
        std::swap(y[k], y[p]);
      }
      if (std::abs(a(k, k)) < kEps * scale) a(k, k) = kEps * scale;
      for (std::size_t i = k + 1; i < n; ++i) {
        const Complex f = a(i, k) / a(k, k);
        for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
        y[i] -= f * y[k];
      }
    }
    for (std::size_t i = n; i-- > 0;) {
      for (std::size_t j = i + 1; j < n; ++j) y[i] -= a(i, j) * y[j];
      y[i] /= a(i, i);
    }
    bool finite = true;
    for (const auto& x : y) finite = finite && std::isfinite(x.real()) && std::isfinite(x.imag());
    if (!finite) break;
    v = normalized(y);
  }
  return v;
}

Complex rayleigh_quotient(const CMatrix& m, const CVector& v) {
  const CVector mv = m * std::span<const Complex>(v);
  Complex num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    num += std::conj(v[i]) * mv[i];
    den += std::norm(v[i]);
  }
  return num / den;
}

std::vector<Cluster> eigen_clusters(const CMatrix& m, bool real_input) {
  require_square(m, "eigen_small");
  const std::size_t n = m.rows();
  if (n > 4) throw InvalidArgument("eigen_small: n must be <= 4");
  const double scale = std::max(m.max_abs(), std::numeric_limits<double>::min());
  CVector lambdas = polynomial_roots(characteristic_polynomial(m));
  if (real_input) {
    for (auto& l : lambdas)
      if (std::abs(l.imag()) <= 1e-8 * std::max(std::abs(l), 1e-14 * scale)) l = l.real();
  }
  // Group numerically coincident roots (double roots come back split by
  // about sqrt(eps)).
  std::vector<Cluster> clusters;
  std::vector<bool> used(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (used[i]) continue;
    Cluster c;
    Complex sum = 0.0;
    for (std::size_t j = i; j < n; ++j) {
      if (used[j]) continue;
      const double tol = 1e-6 * std::max({std::abs(lambdas[i]), std::abs(lambdas[j]), 1e-12 * scale});
      if (j == i || std::abs(lambdas[j] - lambdas[i]) <= tol) {
        used[j] = true;
        sum += lambdas[j];
        ++c.multiplicity;
      }
    }
    c.value = sum / static_cast<double>(c.multiplicity);
    if (real_input && std::abs(c.value.imag()) <= 1e-8 * std::max(std::abs(c.value), 1e-14 * scale))
      c.value = c.value.real();
    clusters.push_back(std::move(c));
  }
  for (auto& c : clusters) {
    CMatrix shifted = m;
    for (std::size_t i = 0; i < n; ++i) shifted(i, i) -= c.value;
    c.basis = null_space(shifted, c.multiplicity, scale);
    if (c.multiplicity == 1) {
      const CVector v = inverse_iteration(m, c.value, normalized(c.basis.col(0)), scale);
      for (std::size_t i = 0; i < n; ++i) c.basis(i, 0) = v[i];
      c.value = rayleigh_quotient(m, v);
      if (real_input && c.value.imag() != 0.0 &&
          std::abs(c.value.imag()) <= 1e-8 * std::max(std::abs(c.value), 1e-14 * scale))
        c.value = c.value.real();
    }
  }
  return clusters;
}

}  // namespace

std::vector<EigenPair> eigen_small(const CMatrix& m) {
  std::vector<EigenPair> out;
  for (const auto& c : eigen_clusters(m, false)) {
    for (std::size_t k = 0; k < c.multiplicity; ++k) {
      CVector v = normalized(c.basis.col(k));
      out.push_back({c.multiplicity == 1 ? c.value : rayleigh_quotient(m, v), std::move(v)});
    }
  }
  return out;
}

std::vector<EigenPair> eigen_small(const Matrix& m) {
  std::vector<EigenPair> out;
  const CMatrix cm = to_complex(m);
  for (const auto& c : eigen_clusters(cm, true)) {
    for (std::size_t k = 0; k < c.multiplicity; ++k) {
      CVector v = normalized(c.basis.col(k));
      out.push_back({c.multiplicity == 1 ? c.value : rayleigh_quotient(cm, v), std::move(v)});
    }
  }
  return out;
}

SpectralSplit spectral_split(const Matrix& m, double tol_realpart) {
  require_square(m, "spectral_split");
  const std::size_t n = m.rows();
  const auto clusters = eigen_clusters(to_complex(m), true);
  std::vector<Vector> plus_cols;
  std::vector<Vector> minus_cols;
  for (const auto& c : clusters) {
    if (std::abs(c.value.real()) <= tol_realpart) {
      std::ostringstream os;
      os << "spectral_split: eigenvalue " << c.value.real() << (c.value.imag() < 0 ? "" : "+")
         << c.value.imag() << "i lies within " << tol_realpart << " of the imaginary axis";
      throw CharacteristicBoundary(os.str());
    }
    auto& dest = c.value.real() > 0.0 ? plus_cols : minus_cols;
    if (c.value.imag() == 0.0) {
      for (std::size_t k = 0; k < c.multiplicity; ++k) {
        // Rotate so the dominant component is real, then keep the real part.
        CVector v = c.basis.col(k);
        std::size_t big = 0;
        for (std::size_t i = 1; i < n; ++i)
          if (std::abs(v[i]) > std::abs(v[big])) big = i;
        const Complex phase = std::conj(v[big]) / std::abs(v[big]);
        Vector re(n);
        for (std::size_t i = 0; i < n; ++i) re[i] = (v[i] * phase).real();
        dest.push_back(std::move(re));
      }
    } else if (c.value.imag() > 0.0) {
      for (std::size_t k = 0; k < c.multiplicity; ++k) {
        Vector re(n);
        Vector im(n);
        for (std::size_t i = 0; i < n; ++i) {
          re[i] = c.basis(i, k).real();
          im[i] = c.basis(i, k).imag();
        }
        dest.push_back(std::move(re));
        dest.push_back(std::move(im));
      }
    }
  }
  auto assemble = [n](const std::vector<Vector>& cols) {
    Matrix r(n, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j)
      for (std::size_t i = 0; i < n; ++i) r(i, j) = cols[j][i];
    return cols.empty() ? r : orthonormalize_columns(r);
  };
  SpectralSplit split;
  split.r_plus = assemble(plus_cols);
  split.r_minus = assemble(minus_cols);
  if (split.r_plus.cols() + split.r_minus.cols() != n)
    throw ConvergenceFailure("spectral_split: invariant subspaces do not span the space");
  const Matrix left = inverse(hstack(split.r_plus, split.r_minus));
  split.l_plus = left.block(0, 0, split.r_plus.cols(), n);
  split.l_minus = left.block(split.r_plus.cols(), 0, split.r_minus.cols(), n);
  return split;
}

CMatrix unstable_basis(const CMatrix& m, double tol_realpart) {
  const std::size_t n = m.rows();
  const double scale = std::max(m.max_abs(), 1.0);
  std::vector<CVector> cols;
  for (const auto& c : eigen_clusters(m, false)) {
    if (std::abs(c.value.real()) <= tol_realpart * scale) {
      std::ostringstream os;
      os << "unstable_basis: eigenvalue with real part " << c.value.real() << " on the imaginary axis";
      throw CharacteristicBoundary(os.str());
    }
    if (c.value.real() > 0.0)
      for (std::size_t k = 0; k < c.multiplicity; ++k) cols.push_back(c.basis.col(k));
  }
  CMatrix r(n, cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t i = 0; i < n; ++i) r(i, j) = cols[j][i];
  return cols.empty() ? r : orthonormalize_columns(r);
}

// ---------------------------------------------------------------------------
// Principal angles

double subspace_gap(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidArgument("subspace_gap: inputs must have identical shapes");
  if (a.cols() == 0) return 0.0;
  const Matrix qa = orthonormalize_columns(a);
  const Matrix qb = orthonormalize_columns(b);
  const Matrix cross = qa.transpose() * qb;
  const Matrix residual = qb - qa * cross;
  // cos(theta_max) = sigma_min(Qa^T Qb); sin(theta_max) = sigma_max((I - Qa Qa^T) Qb).
  const Vector cos2 = symmetric_eigenvalues(cross.transpose() * cross);
  const Vector sin2 = symmetric_eigenvalues(residual.transpose() * residual);
  const double c = std::sqrt(std::max(cos2.front(), 0.0));
  const double s = std::sqrt(std::max(sin2.back(), 0.0));
  return std::atan2(s, c);
}

}  // namespace relaxbl
