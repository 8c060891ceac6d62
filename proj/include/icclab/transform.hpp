#pragma once

// The linear pinching transform
//
//     l_{a,b}(R) = R + b Ric(R) ^ id + (2/n)(a - b) scal(R) I
//
// and its inverse, computed by a dense LU solve on the coordinates of the
// operator matrix (upper triangle, diagonal included). The alternating 4-form
// component has zero Ricci contraction, so l_{a,b} acts as the identity there
// and the full solve is nonsingular exactly when the restriction to algebraic
// curvature operators is.

#include <cmath>
#include <limits>
#include <string>

#include "icclab/curvature.hpp"

namespace icclab {

struct TransformParams {
  double b = 0.0;
  double a = 0.0;
  bool derived = false;  // a was computed from b by a_of_b
};

/// a(b) = (2 + (n-2) b)^2 b / (2 (2 + (n-3) b)).
inline TransformParams a_of_b(double b, int n) {
  if (!(b >= 0.0)) throw Error(ErrorCode::InvalidArgument, "b must be nonnegative");
  const double denom = 2.0 * (2.0 + (n - 3) * b);
  if (!(denom > 0.0)) throw Error(ErrorCode::NonpositiveDenominator, "2(2+(n-3)b) must be positive");
  const double num = (2.0 + (n - 2) * b);
  return {b, num * num * b / denom, true};
}

namespace detail {

template <typename Scalar>
MatrixX<Scalar> l_ab_operator(int n, const MatrixX<Scalar>& m, const TransformParams& p) {
  const auto r = CurvatureTensor<Scalar>::from_operator(n, m, BianchiPolicy::Trust);
  const auto ric = ricci(r);
  const Scalar scal = scalar(r);
  MatrixX<Scalar> out = r.operator_matrix();
  if (p.b != 0.0) {
    out += Scalar(p.b) * kulkarni_nomizu(ric, SymmetricForm<Scalar>::identity(n)).operator_matrix();
  }
  out.diagonal().array() += Scalar(2.0 / n * (p.a - p.b)) * scal;
  return out;
}

}  // namespace detail

template <typename Scalar>
CurvatureTensor<Scalar> l_ab(const CurvatureTensor<Scalar>& r, const TransformParams& p) {
  return CurvatureTensor<Scalar>::from_operator(r.dim(), detail::l_ab_operator(r.dim(), r.operator_matrix(), p),
                                                BianchiPolicy::Trust);
}

/// l_{a,b} assembled as a dense matrix on operator coordinates, with its LU
/// factorization cached for repeated inversion.
template <typename Scalar = double>
class PinchingTransform {
 public:
  PinchingTransform(int n, TransformParams p) : n_(n), params_(p) {
    const int nn = two_form_dim(n);
    const int d = nn * (nn + 1) / 2;
    MatrixX<Scalar> op(d, d);
    MatrixX<Scalar> unit = MatrixX<Scalar>::Zero(nn, nn);
    int col = 0;
    for (int a = 0; a < nn; ++a)
      for (int b = a; b < nn; ++b, ++col) {
        unit(a, b) = unit(b, a) = Scalar(1);
        op.col(col) = pack(detail::l_ab_operator(n, unit, p));
        unit(a, b) = unit(b, a) = Scalar(0);
      }
    lu_.compute(op);
    rcond_ = lu_.rcond();
  }

  int dim() const { return n_; }
  const TransformParams& params() const { return params_; }
  /// Reciprocal condition estimate of the assembled operator (1-norm).
  Scalar rcond() const { return rcond_; }

  CurvatureTensor<Scalar> apply(const CurvatureTensor<Scalar>& r) const { return l_ab(r, params_); }

  CurvatureTensor<Scalar> inverse(const CurvatureTensor<Scalar>& r) const {
    if (r.dim() != n_) throw Error(ErrorCode::DimMismatch, "tensor dimension differs from transform");
    if (!(rcond_ > Scalar(1e-13))) {
      throw Error(ErrorCode::SingularTransform,
                  "l_ab is singular (condition estimate " +
                      std::to_string(static_cast<double>(Scalar(1) / rcond_)) + ")");
    }
    const VectorX<Scalar> x = lu_.solve(pack(r.operator_matrix()));
    return CurvatureTensor<Scalar>::from_operator(n_, unpack(x), BianchiPolicy::Project);
  }

 private:
  VectorX<Scalar> pack(const MatrixX<Scalar>& m) const {
    const int nn = static_cast<int>(m.rows());
    VectorX<Scalar> v(nn * (nn + 1) / 2);
    int idx = 0;
    for (int a = 0; a < nn; ++a)
      for (int b = a; b < nn; ++b) v(idx++) = m(a, b);
    return v;
  }
  MatrixX<Scalar> unpack(const VectorX<Scalar>& v) const {
    const int nn = two_form_dim(n_);
    MatrixX<Scalar> m(nn, nn);
    int idx = 0;
    for (int a = 0; a < nn; ++a)
      for (int b = a; b < nn; ++b, ++idx) m(a, b) = m(b, a) = v(idx);
    return m;
  }

  int n_;
  TransformParams params_;
  Eigen::PartialPivLU<MatrixX<Scalar>> lu_;
  Scalar rcond_ = Scalar(0);
};

template <typename Scalar>
CurvatureTensor<Scalar> l_ab_inverse(const CurvatureTensor<Scalar>& r, const TransformParams& p) {
  return PinchingTransform<Scalar>(r.dim(), p).inverse(r);
}

}  // namespace icclab
