#pragma once

// Constructors for curvature tensors: component lists, model geometries and
// seeded random families.

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "icclab/curvature.hpp"

namespace icclab {

/// One component R_ijkl = value with 1-based indices.
struct ComponentEntry {
  int i, j, k, l;
  double value;
};

template <typename Scalar>
struct ConstructedTensor {
  CurvatureTensor<Scalar> tensor;
  Scalar bianchi_residual;  // before projection
};

/// Assembles a tensor from a sparse list of components, closing it under the
/// curvature symmetries. Redundant entries must agree to 1e-10 relative.
template <typename Scalar = double>
ConstructedTensor<Scalar> new_from_components(int n, const std::vector<ComponentEntry>& entries,
                                              BianchiPolicy policy = BianchiPolicy::Project) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "dimension must be at least 2");
  const int nn = two_form_dim(n);
  MatrixX<Scalar> m = MatrixX<Scalar>::Zero(nn, nn);
  std::map<std::pair<int, int>, Scalar> seen;

  auto consistent = [](Scalar a, Scalar b) {
    const Scalar scale = std::max({Scalar(1), std::abs(a), std::abs(b)});
    return std::abs(a - b) <= Scalar(1e-10) * scale;
  };

  for (const auto& e : entries) {
    for (int idx : {e.i, e.j, e.k, e.l}) {
      if (idx < 1 || idx > n) {
        throw Error(ErrorCode::InvalidArgument, "component index out of range 1..n");
      }
    }
    int i = e.i - 1, j = e.j - 1, k = e.k - 1, l = e.l - 1;
    Scalar v = static_cast<Scalar>(e.value);
    if (i == j || k == l) {
      if (!consistent(v, Scalar(0))) {
        throw Error(ErrorCode::InconsistentSymmetry, "component with repeated antisymmetric index is nonzero");
      }
      continue;
    }
    if (i > j) {
      std::swap(i, j);
      v = -v;
    }
    if (k > l) {
      std::swap(k, l);
      v = -v;
    }
    int a = pair_index(i, j, n), b = pair_index(k, l, n);
    if (a > b) std::swap(a, b);
    auto [it, inserted] = seen.emplace(std::make_pair(a, b), v);
    if (!inserted && !consistent(it->second, v)) {
      throw Error(ErrorCode::InconsistentSymmetry, "conflicting redundant components");
    }
    m(a, b) = v;
    m(b, a) = v;
  }

  const Scalar residual = bianchi_residual(n, m);
  return {CurvatureTensor<Scalar>::from_operator(n, std::move(m), policy), residual};
}

template <typename Scalar = double>
CurvatureTensor<Scalar> sphere_tensor(int n, Scalar c) {
  if (!(c > 0)) throw Error(ErrorCode::InvalidArgument, "sphere curvature must be positive");
  return c * identity_operator<Scalar>(n);
}

/// c times the identity on 2-forms of the first n-1 coordinates; the last
/// coordinate is the flat axis.
template <typename Scalar = double>
CurvatureTensor<Scalar> cylinder_tensor(int n, Scalar c) {
  if (!(c > 0)) throw Error(ErrorCode::InvalidArgument, "cylinder curvature must be positive");
  const int nn = two_form_dim(n);
  MatrixX<Scalar> m = MatrixX<Scalar>::Zero(nn, nn);
  for (int i = 0; i < n - 1; ++i)
    for (int j = i + 1; j < n - 1; ++j) m(pair_index(i, j, n), pair_index(i, j, n)) = c;
  return CurvatureTensor<Scalar>::from_operator(n, std::move(m), BianchiPolicy::Trust);
}

/// Block sum on R^{n1} + R^{n2}; mixed components vanish.
template <typename Scalar>
CurvatureTensor<Scalar> direct_sum(const CurvatureTensor<Scalar>& r1, const CurvatureTensor<Scalar>& r2) {
  const int n1 = r1.dim(), n2 = r2.dim(), n = n1 + n2;
  const int nn = two_form_dim(n);
  MatrixX<Scalar> m = MatrixX<Scalar>::Zero(nn, nn);
  for (int i = 0; i < n1; ++i)
    for (int j = i + 1; j < n1; ++j)
      for (int k = 0; k < n1; ++k)
        for (int l = k + 1; l < n1; ++l) m(pair_index(i, j, n), pair_index(k, l, n)) = r1(i, j, k, l);
  for (int i = 0; i < n2; ++i)
    for (int j = i + 1; j < n2; ++j)
      for (int k = 0; k < n2; ++k)
        for (int l = k + 1; l < n2; ++l)
          m(pair_index(n1 + i, n1 + j, n), pair_index(n1 + k, n1 + l, n)) = r2(i, j, k, l);
  return CurvatureTensor<Scalar>::from_operator(n, std::move(m), BianchiPolicy::Trust);
}

/// cylinder(1) minus eps times (e_1 ^ e_n) (x) (e_1 ^ e_n): the plane spanned
/// by e_1 and the axis acquires sectional curvature -eps.
template <typename Scalar = double>
CurvatureTensor<Scalar> perturbed_cylinder_tensor(int n, Scalar eps) {
  const int nn = two_form_dim(n);
  MatrixX<Scalar> m = MatrixX<Scalar>::Zero(nn, nn);
  const int slot = pair_index(0, n - 1, n);
  m(slot, slot) = -eps;
  return cylinder_tensor<Scalar>(n, Scalar(1)) +
         CurvatureTensor<Scalar>::from_operator(n, std::move(m), BianchiPolicy::Trust);
}

enum class RandomClass { BianchiGeneric, PicInterior, NearPic1Boundary };

inline RandomClass random_class_from_string(std::string_view s) {
  if (s == "bianchi_generic") return RandomClass::BianchiGeneric;
  if (s == "pic_interior") return RandomClass::PicInterior;
  if (s == "near_pic1_boundary") return RandomClass::NearPic1Boundary;
  throw Error(ErrorCode::BadClass, "unknown random tensor class '" + std::string(s) + "'");
}

inline std::string_view to_string(RandomClass c) {
  switch (c) {
    case RandomClass::BianchiGeneric: return "bianchi_generic";
    case RandomClass::PicInterior: return "pic_interior";
    case RandomClass::NearPic1Boundary: return "near_pic1_boundary";
  }
  return "unknown";
}

/// Haar-distributed orthogonal matrix.
template <typename Scalar, typename Rng>
MatrixX<Scalar> random_rotation(int n, Rng& rng) {
  std::normal_distribution<double> gauss;
  MatrixX<Scalar> g(n, n);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r) g(r, c) = static_cast<Scalar>(gauss(rng));
  Eigen::HouseholderQR<MatrixX<Scalar>> qr(g);
  MatrixX<Scalar> q = qr.householderQ() * MatrixX<Scalar>::Identity(n, n);
  const MatrixX<Scalar> rr = qr.matrixQR();
  for (int c = 0; c < n; ++c)
    if (rr(c, c) < 0) q.col(c) = -q.col(c);
  return q;
}

/// Gaussian operator matrix projected onto the Bianchi subspace.
template <typename Scalar, typename Rng>
CurvatureTensor<Scalar> random_bianchi_tensor(int n, Rng& rng) {
  std::normal_distribution<double> gauss;
  const int nn = two_form_dim(n);
  MatrixX<Scalar> m(nn, nn);
  for (int c = 0; c < nn; ++c)
    for (int r = 0; r < nn; ++r) m(r, c) = static_cast<Scalar>(gauss(rng));
  return bianchi_project(n, m);
}

/// Seeded random tensor of the requested class.
///  - bianchi_generic: Gaussian, projected.
///  - pic_interior: I + s G with |G| = 1 and s in [0.05, 0.3]; every
///    pulled-back component of G is at most 1/2 in size, so the PIC2
///    functional stays >= 1 - 3s > 0.
///  - near_pic1_boundary: a rotated cylinder(1) plus eps G, eps in [0.02, 0.2];
///    strictly PIC (margin >= 2 - 3 eps) and generically not weakly PIC1.
template <typename Scalar = double>
CurvatureTensor<Scalar> random_tensor(int n, std::uint64_t seed, RandomClass cls) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  switch (cls) {
    case RandomClass::BianchiGeneric:
      return random_bianchi_tensor<Scalar>(n, rng);
    case RandomClass::PicInterior: {
      auto g = random_bianchi_tensor<Scalar>(n, rng);
      const Scalar s = static_cast<Scalar>(0.05 + 0.25 * unit(rng));
      return identity_operator<Scalar>(n) + (s / tensor_norm(g)) * g;
    }
    case RandomClass::NearPic1Boundary: {
      const MatrixX<Scalar> o = random_rotation<Scalar>(n, rng);
      auto g = random_bianchi_tensor<Scalar>(n, rng);
      const Scalar eps = static_cast<Scalar>(0.02 + 0.18 * unit(rng));
      return change_basis(cylinder_tensor<Scalar>(n, Scalar(1)), o) + (eps / tensor_norm(g)) * g;
    }
  }
  throw Error(ErrorCode::BadClass, "unknown random tensor class");
}

}  // namespace icclab
