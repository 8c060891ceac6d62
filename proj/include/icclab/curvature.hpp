#pragma once

// Algebraic curvature operators on R^n.
//
// A curvature tensor is stored as its operator matrix on the lexicographically
// ordered basis {e_i ^ e_j : i < j} of 2-forms, with the convention
//
//     M(ij, kl) = R(e_i ^ e_j, e_k ^ e_l) = R_ijkl.
//
// Pair symmetry and antisymmetry are structural; the first Bianchi identity is
// enforced at construction (projection by default, or a strict check).
// All indices in this header are 0-based.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "icclab/error.hpp"

namespace icclab {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Dimension of the space of 2-forms on R^n.
constexpr int two_form_dim(int n) { return n * (n - 1) / 2; }

/// Position of e_i ^ e_j (i < j) in the lexicographic 2-form basis.
constexpr int pair_index(int i, int j, int n) {
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

enum class BianchiPolicy {
  Project,  // orthogonally remove the alternating 4-form part
  Strict,   // throw BianchiViolation when the residual exceeds tolerance
  Trust,    // caller guarantees membership; no check
};

template <typename Scalar>
class SymmetricForm {
 public:
  using Matrix = MatrixX<Scalar>;

  SymmetricForm() = default;
  explicit SymmetricForm(int n) : m_(Matrix::Zero(n, n)) {}
  explicit SymmetricForm(const Matrix& a) {
    if (a.rows() != a.cols()) {
      throw Error(ErrorCode::DimMismatch, "symmetric form must be square");
    }
    m_ = (a + a.transpose()) / Scalar(2);
  }

  static SymmetricForm identity(int n) {
    return SymmetricForm(Matrix(Matrix::Identity(n, n)));
  }
  static SymmetricForm diagonal(const VectorX<Scalar>& d) {
    return SymmetricForm(Matrix(d.asDiagonal()));
  }

  int dim() const { return static_cast<int>(m_.rows()); }
  Scalar operator()(int i, int j) const { return m_(i, j); }
  const Matrix& matrix() const { return m_; }
  Scalar trace() const { return m_.trace(); }

  /// Eigenvalues in ascending order.
  VectorX<Scalar> eigenvalues() const {
    return Eigen::SelfAdjointEigenSolver<Matrix>(m_, Eigen::EigenvaluesOnly)
        .eigenvalues();
  }

  SymmetricForm& operator+=(const SymmetricForm& o) {
    check_dim(o);
    m_ += o.m_;
    return *this;
  }
  SymmetricForm& operator-=(const SymmetricForm& o) {
    check_dim(o);
    m_ -= o.m_;
    return *this;
  }
  SymmetricForm& operator*=(Scalar c) {
    m_ *= c;
    return *this;
  }
  friend SymmetricForm operator+(SymmetricForm a, const SymmetricForm& b) { return a += b; }
  friend SymmetricForm operator-(SymmetricForm a, const SymmetricForm& b) { return a -= b; }
  friend SymmetricForm operator*(Scalar c, SymmetricForm a) { return a *= c; }
  friend SymmetricForm operator*(SymmetricForm a, Scalar c) { return a *= c; }

 private:
  void check_dim(const SymmetricForm& o) const {
    if (o.dim() != dim()) throw Error(ErrorCode::DimMismatch, "symmetric form dimensions differ");
  }

  Matrix m_;
};

/// Largest |R_ijkl + R_iklj + R_iljk| over i<j<k<l for a pair-symmetric operator
/// matrix. Quadruples with a repeated index vanish identically.
template <typename Derived>
typename Derived::Scalar bianchi_residual(int n, const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  Scalar worst(0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k)
        for (int l = k + 1; l < n; ++l) {
          const Scalar c = m(pair_index(i, j, n), pair_index(k, l, n)) -
                           m(pair_index(i, k, n), pair_index(j, l, n)) +
                           m(pair_index(i, l, n), pair_index(j, k, n));
          worst = std::max(worst, std::abs(c));
        }
  return worst;
}

namespace detail {

template <typename Scalar>
void remove_alternating_part(int n, MatrixX<Scalar>& m) {
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k)
        for (int l = k + 1; l < n; ++l) {
          const int ij = pair_index(i, j, n), kl = pair_index(k, l, n);
          const int ik = pair_index(i, k, n), jl = pair_index(j, l, n);
          const int il = pair_index(i, l, n), jk = pair_index(j, k, n);
          const Scalar s = (m(ij, kl) - m(ik, jl) + m(il, jk)) / Scalar(3);
          m(ij, kl) -= s;
          m(kl, ij) -= s;
          m(ik, jl) += s;
          m(jl, ik) += s;
          m(il, jk) -= s;
          m(jk, il) -= s;
        }
}

}  // namespace detail

template <typename Scalar>
class CurvatureTensor {
 public:
  using Matrix = MatrixX<Scalar>;

  CurvatureTensor() = default;
  explicit CurvatureTensor(int n) : n_(n), m_(Matrix::Zero(two_form_dim(n), two_form_dim(n))) {
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "dimension must be at least 2");
  }

  /// Builds a tensor from an operator matrix on the 2-form basis. The matrix
  /// is symmetrized; the Bianchi identity is handled according to `policy`.
  static CurvatureTensor from_operator(int n, Matrix m,
                                       BianchiPolicy policy = BianchiPolicy::Project) {
    const int nn = two_form_dim(n);
    if (m.rows() != nn || m.cols() != nn) {
      throw Error(ErrorCode::DimMismatch, "operator matrix must be N x N with N = n(n-1)/2");
    }
    CurvatureTensor r(n);
    r.m_ = (m + m.transpose()) / Scalar(2);
    if (policy == BianchiPolicy::Project) {
      detail::remove_alternating_part(n, r.m_);
    } else if (policy == BianchiPolicy::Strict) {
      const Scalar res = bianchi_residual(n, r.m_);
      const Scalar scale = Scalar(2) * r.m_.norm();
      if (res > Scalar(1e-12) * std::max(scale, Scalar(1))) {
        throw Error(ErrorCode::BianchiViolation,
                    "first Bianchi residual " + std::to_string(static_cast<double>(res)));
      }
    }
    return r;
  }

  int dim() const { return n_; }
  int form_dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& operator_matrix() const { return m_; }

  Scalar operator()(int i, int j, int k, int l) const {
    if (i == j || k == l) return Scalar(0);
    Scalar sign(1);
    if (i > j) {
      std::swap(i, j);
      sign = -sign;
    }
    if (k > l) {
      std::swap(k, l);
      sign = -sign;
    }
    return sign * m_(pair_index(i, j, n_), pair_index(k, l, n_));
  }

  CurvatureTensor& operator+=(const CurvatureTensor& o) {
    check_dim(o);
    m_ += o.m_;
    return *this;
  }
  CurvatureTensor& operator-=(const CurvatureTensor& o) {
    check_dim(o);
    m_ -= o.m_;
    return *this;
  }
  CurvatureTensor& operator*=(Scalar c) {
    m_ *= c;
    return *this;
  }
  friend CurvatureTensor operator+(CurvatureTensor a, const CurvatureTensor& b) { return a += b; }
  friend CurvatureTensor operator-(CurvatureTensor a, const CurvatureTensor& b) { return a -= b; }
  friend CurvatureTensor operator*(Scalar c, CurvatureTensor a) { return a *= c; }
  friend CurvatureTensor operator*(CurvatureTensor a, Scalar c) { return a *= c; }
  friend CurvatureTensor operator-(CurvatureTensor a) { return a *= Scalar(-1); }

 private:
  void check_dim(const CurvatureTensor& o) const {
    if (o.n_ != n_) throw Error(ErrorCode::DimMismatch, "curvature tensor dimensions differ");
  }

  int n_ = 0;
  Matrix m_;
};

using Curvature = CurvatureTensor<double>;
using SymForm = SymmetricForm<double>;

template <typename Scalar>
Scalar bianchi_residual(const CurvatureTensor<Scalar>& r) {
  return bianchi_residual(r.dim(), r.operator_matrix());
}

/// Orthogonal projection of a pair-symmetric operator onto the algebraic
/// curvature operators (kills the alternating 4-form component).
template <typename Derived>
CurvatureTensor<typename Derived::Scalar> bianchi_project(int n, const Eigen::MatrixBase<Derived>& m) {
  return CurvatureTensor<typename Derived::Scalar>::from_operator(n, m.eval(),
                                                                  BianchiPolicy::Project);
}

template <typename Scalar>
CurvatureTensor<Scalar> bianchi_project(const CurvatureTensor<Scalar>& r) {
  return bianchi_project(r.dim(), r.operator_matrix());
}

/// Frobenius norm over all n^4 components. Every basis slot of the operator
/// matrix appears four times (with signs) among the unrestricted components.
template <typename Scalar>
Scalar tensor_norm(const CurvatureTensor<Scalar>& r) {
  return Scalar(2) * r.operator_matrix().norm();
}

/// Ric_jl = sum_i R_ijil.
template <typename Scalar>
SymmetricForm<Scalar> ricci(const CurvatureTensor<Scalar>& r) {
  const int n = r.dim();
  MatrixX<Scalar> ric = MatrixX<Scalar>::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int l = j; l < n; ++l) {
      Scalar s(0);
      for (int i = 0; i < n; ++i) s += r(i, j, i, l);
      ric(j, l) = s;
      ric(l, j) = s;
    }
  return SymmetricForm<Scalar>(ric);
}

template <typename Scalar>
Scalar scalar(const CurvatureTensor<Scalar>& r) {
  // scal = sum_{i,j} R_ijij = 2 * trace of the operator matrix
  return Scalar(2) * r.operator_matrix().trace();
}

/// (A ^ B)_ijkl = A_ik B_jl + A_jl B_ik - A_il B_jk - A_jk B_il.
template <typename Scalar>
CurvatureTensor<Scalar> kulkarni_nomizu(const SymmetricForm<Scalar>& a, const SymmetricForm<Scalar>& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::DimMismatch, "Kulkarni-Nomizu factors differ in dimension");
  const int n = a.dim();
  MatrixX<Scalar> m(two_form_dim(n), two_form_dim(n));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = k + 1; l < n; ++l) {
          m(pair_index(i, j, n), pair_index(k, l, n)) =
              a(i, k) * b(j, l) + a(j, l) * b(i, k) - a(i, l) * b(j, k) - a(j, k) * b(i, l);
        }
  return CurvatureTensor<Scalar>::from_operator(n, std::move(m), BianchiPolicy::Trust);
}

/// I = 1/2 id ^ id, the identity on 2-forms.
template <typename Scalar = double>
CurvatureTensor<Scalar> identity_operator(int n) {
  const int nn = two_form_dim(n);
  return CurvatureTensor<Scalar>::from_operator(n, MatrixX<Scalar>::Identity(nn, nn),
                                                BianchiPolicy::Trust);
}

/// All n^4 components, index ((i*n + j)*n + k)*n + l.
template <typename Scalar>
std::vector<Scalar> full_components(const CurvatureTensor<Scalar>& r) {
  const int n = r.dim();
  std::vector<Scalar> out(static_cast<std::size_t>(n) * n * n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          out[((static_cast<std::size_t>(i) * n + j) * n + k) * n + l] = r(i, j, k, l);
  return out;
}

/// R^2 + R# as an operator matrix, before any Bianchi projection.
///   (R^2)_ijkl = sum_pq R_ijpq R_klpq
///   (R#)_ijkl  = 2 sum_pq (R_ipkq R_jplq - R_iplq R_jpkq)
template <typename Scalar>
MatrixX<Scalar> q_quadratic_unprojected(const CurvatureTensor<Scalar>& r) {
  const int n = r.dim();
  const auto& m = r.operator_matrix();
  // sum over ordered (p,q) doubles the sum over p<q
  MatrixX<Scalar> q = Scalar(2) * m * m;

  // W((i,k),(p,q)) = R_ipkq, so (W W^T)((i,k),(j,l)) = sum_pq R_ipkq R_jplq
  MatrixX<Scalar> w(n * n, n * n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int p = 0; p < n; ++p)
        for (int qq = 0; qq < n; ++qq) w(i * n + k, p * n + qq) = r(i, p, k, qq);
  const MatrixX<Scalar> s = w * w.transpose();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = k + 1; l < n; ++l) {
          q(pair_index(i, j, n), pair_index(k, l, n)) +=
              Scalar(2) * (s(i * n + k, j * n + l) - s(i * n + l, j * n + k));
        }
  return q;
}

/// Q(R) = R^2 + R#, re-projected onto the Bianchi subspace.
template <typename Scalar>
CurvatureTensor<Scalar> q_quadratic(const CurvatureTensor<Scalar>& r) {
  return bianchi_project(r.dim(), q_quadratic_unprojected(r));
}

/// (R * A)_ij = sum_kl R_ikjl A_kl.
template <typename Scalar>
SymmetricForm<Scalar> ricci_action(const CurvatureTensor<Scalar>& r, const SymmetricForm<Scalar>& a) {
  if (a.dim() != r.dim()) throw Error(ErrorCode::DimMismatch, "form and tensor dimensions differ");
  const int n = r.dim();
  MatrixX<Scalar> out = MatrixX<Scalar>::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Scalar s(0);
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) s += r(i, k, j, l) * a(k, l);
      out(i, j) = s;
    }
  return SymmetricForm<Scalar>(out);
}

/// Induced action of an orthogonal matrix on 2-forms:
/// L(ij, ab) = O_ia O_jb - O_ib O_ja.
template <typename Scalar>
MatrixX<Scalar> two_form_action(const MatrixX<Scalar>& o) {
  const int n = static_cast<int>(o.rows());
  MatrixX<Scalar> l(two_form_dim(n), two_form_dim(n));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
          l(pair_index(i, j, n), pair_index(a, b, n)) = o(i, a) * o(j, b) - o(i, b) * o(j, a);
  return l;
}

/// (O.R)_ijkl = sum O_ia O_jb O_kc O_ld R_abcd.
template <typename Scalar>
CurvatureTensor<Scalar> change_basis(const CurvatureTensor<Scalar>& r, const MatrixX<Scalar>& o) {
  if (o.rows() != r.dim() || o.cols() != r.dim()) {
    throw Error(ErrorCode::DimMismatch, "rotation must be n x n");
  }
  const MatrixX<Scalar> l = two_form_action(o);
  return CurvatureTensor<Scalar>::from_operator(r.dim(), l * r.operator_matrix() * l.transpose(),
                                                BianchiPolicy::Trust);
}

}  // namespace icclab
