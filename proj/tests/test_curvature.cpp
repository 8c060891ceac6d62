#include "doctest.h"

#include <chrono>
#include <cmath>
#include <random>
#include <vector>

#include "icclab/construct.hpp"
#include "icclab/curvature.hpp"
#include "icclab/transform.hpp"

using namespace icclab;

namespace {

// Reference contractions straight from the index formulas, O(n^6).
std::vector<double> reference_q(const Curvature& r) {
  const int n = r.dim();
  std::vector<double> out(static_cast<std::size_t>(n) * n * n * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double sq = 0.0, sharp = 0.0;
          for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q) {
              sq += r(i, j, p, q) * r(k, l, p, q);
              sharp += r(i, p, k, q) * r(j, p, l, q) - r(i, p, l, q) * r(j, p, k, q);
            }
          out[((static_cast<std::size_t>(i) * n + j) * n + k) * n + l] = sq + 2.0 * sharp;
        }
  return out;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

SymForm random_symmetric(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  return SymForm(a);
}

}  // namespace

TEST_CASE("components are closed under the curvature symmetries") {
  auto built = new_from_components(4, {{1, 2, 1, 2, 1.0}});
  const auto& r = built.tensor;
  CHECK(r(0, 1, 0, 1) == 1.0);
  CHECK(r(1, 0, 1, 0) == 1.0);
  CHECK(r(1, 0, 0, 1) == -1.0);
  CHECK(r(0, 2, 0, 2) == 0.0);
  CHECK(built.bianchi_residual == 0.0);
}

TEST_CASE("unit sphere components have zero Bianchi residual") {
  const int n = 5;
  std::vector<ComponentEntry> entries;
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j)
      for (int k = 1; k <= n; ++k)
        for (int l = 1; l <= n; ++l) {
          const double v = (i == k && j == l ? 1.0 : 0.0) - (i == l && j == k ? 1.0 : 0.0);
          entries.push_back({i, j, k, l, v});
        }
  auto built = new_from_components(n, entries, BianchiPolicy::Strict);
  CHECK(built.bianchi_residual == 0.0);
  CHECK((built.tensor.operator_matrix() - identity_operator(n).operator_matrix()).norm() == 0.0);
}

TEST_CASE("alternating components violate Bianchi in strict mode") {
  const std::vector<ComponentEntry> alt{{1, 2, 3, 4, 1.0}, {1, 3, 4, 2, 1.0}, {1, 4, 2, 3, 1.0}};
  // cyclic sum R1234 + R1342 + R1423 = 3
  CHECK(new_from_components(4, alt).bianchi_residual == doctest::Approx(3.0));
  try {
    new_from_components(4, alt, BianchiPolicy::Strict);
    FAIL("expected BianchiViolation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BianchiViolation);
  }
  // the projection kills the pure 4-form entirely
  CHECK(new_from_components(4, alt).tensor.operator_matrix().norm() < 1e-15);
}

TEST_CASE("conflicting redundant components are rejected") {
  try {
    new_from_components(4, {{1, 2, 1, 2, 1.0}, {2, 1, 2, 1, 2.0}});
    FAIL("expected InconsistentSymmetry");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InconsistentSymmetry);
  }
  // R_2112 = -R_1212 is consistent
  CHECK_NOTHROW(new_from_components(4, {{1, 2, 1, 2, 1.0}, {2, 1, 1, 2, -1.0}}));
  CHECK_THROWS_AS(new_from_components(4, {{1, 1, 2, 3, 0.5}}), Error);
  CHECK_THROWS_AS(new_from_components(4, {{1, 2, 3, 5, 0.5}}), Error);
}

TEST_CASE("Bianchi projection is an idempotent retraction onto algebraic operators") {
  const int n = 6;
  CHECK((bianchi_project(identity_operator(n)).operator_matrix() - identity_operator(n).operator_matrix()).norm() ==
        0.0);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  const int nn = two_form_dim(n);
  Eigen::MatrixXd m(nn, nn);
  for (int i = 0; i < nn; ++i)
    for (int j = 0; j < nn; ++j) m(i, j) = g(rng);
  m = (m + m.transpose()).eval();
  const auto once = bianchi_project(n, m);
  const auto twice = bianchi_project(once);
  CHECK((once.operator_matrix() - twice.operator_matrix()).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK(bianchi_residual(once) <= 1e-13 * tensor_norm(once));
  // orthogonality: the removed part is orthogonal to the image
  const Eigen::MatrixXd removed = m / 2.0 * 2.0 - once.operator_matrix();
  CHECK(std::abs((removed.array() * once.operator_matrix().array()).sum()) < 1e-10 * m.squaredNorm());
}

TEST_CASE("Ricci and scalar contractions") {
  for (int n = 4; n <= 9; ++n) {
    const auto ric = ricci(identity_operator(n));
    CHECK((ric.matrix() - (n - 1.0) * Eigen::MatrixXd::Identity(n, n)).norm() == 0.0);
    CHECK(scalar(identity_operator(n)) == doctest::Approx(n * (n - 1.0)));
  }
  CHECK(ricci(Curvature(5)).matrix().norm() == 0.0);
  CHECK(scalar(Curvature(5)) == 0.0);

  const auto cyl = cylinder_tensor(5, 1.0);
  Eigen::VectorXd d(5);
  d << 3, 3, 3, 3, 0;
  CHECK((ricci(cyl).matrix() - Eigen::MatrixXd(d.asDiagonal())).norm() == 0.0);
  CHECK(scalar(cyl) == doctest::Approx(12.0));

  // scal is the trace of Ric on random tensors
  std::mt19937_64 rng(11);
  const auto r = random_bianchi_tensor<double>(7, rng);
  CHECK(scalar(r) == doctest::Approx(ricci(r).trace()).epsilon(1e-12));
}

TEST_CASE("Kulkarni-Nomizu product") {
  const int n = 5;
  const auto id = SymForm::identity(n);
  CHECK((kulkarni_nomizu(id, id).operator_matrix() - 2.0 * identity_operator(n).operator_matrix()).norm() == 0.0);

  std::mt19937_64 rng(3);
  const auto a = random_symmetric(n, rng), b = random_symmetric(n, rng);
  const auto ab = kulkarni_nomizu(a, b), ba = kulkarni_nomizu(b, a);
  CHECK((ab.operator_matrix() - ba.operator_matrix()).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK(bianchi_residual(ab) <= 1e-13 * tensor_norm(ab));

  // trace compatibility: scal(A ^ B) = 2 (tr A tr B - <A, B>)
  const double expect = 2.0 * (a.trace() * b.trace() - (a.matrix().array() * b.matrix().array()).sum());
  CHECK(scalar(ab) == doctest::Approx(expect).epsilon(1e-12));

  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  e(0) = 1.0;
  const auto k = kulkarni_nomizu(SymForm::diagonal(e), id);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) CHECK(k(i, j, i, j) == (i == 0 ? 1.0 : 0.0));

  CHECK_THROWS_AS(kulkarni_nomizu(SymForm::identity(4), id), Error);
}

TEST_CASE("identity operator entries") {
  const auto id = identity_operator(5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      if (i != j) {
        CHECK(id(i, j, i, j) == 1.0);
        CHECK(id(i, j, j, i) == -1.0);
      }
  CHECK(id(0, 1, 2, 3) == 0.0);
  CHECK(id(0, 1, 0, 2) == 0.0);
}

TEST_CASE("Q agrees with the direct index contraction") {
  std::mt19937_64 rng(5);
  for (int n : {4, 5, 6}) {
    const auto r = random_bianchi_tensor<double>(n, rng);
    const auto q = q_quadratic(r);
    CHECK(max_abs_diff(full_components(q), reference_q(r)) <= 1e-11 * (1.0 + tensor_norm(r) * tensor_norm(r)));
    const auto raw = q_quadratic_unprojected(r);
    CHECK(bianchi_residual(n, raw) <= 1e-12 * tensor_norm(r) * tensor_norm(r));
  }
}

TEST_CASE("Q of model operators") {
  const auto t0 = std::chrono::steady_clock::now();
  for (int n = 4; n <= 12; ++n) {
    const auto q = q_quadratic(identity_operator(n));
    const Eigen::MatrixXd expect = 2.0 * (n - 1) * identity_operator(n).operator_matrix();
    CHECK((q.operator_matrix() - expect).cwiseAbs().maxCoeff() <= 1e-13);
  }
  CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() < 1.0);

  CHECK(q_quadratic(Curvature(6)).operator_matrix().norm() == 0.0);

  const double c = 0.7;
  const int n = 5;
  const auto q = q_quadratic(cylinder_tensor(n, c));
  const auto expect = (2.0 * (n - 2) * c * c) * cylinder_tensor(n, 1.0);
  CHECK((q.operator_matrix() - expect.operator_matrix()).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("Q is quadratic and O(n)-equivariant") {
  std::mt19937_64 rng(9);
  const auto r = random_bianchi_tensor<double>(6, rng);
  const double c = -2.3;
  const auto lhs = q_quadratic(c * r).operator_matrix();
  const auto rhs = (c * c) * q_quadratic(r).operator_matrix();
  CHECK((lhs - rhs).norm() <= 1e-12 * rhs.norm());

  const auto o = random_rotation<double>(6, rng);
  const auto a = q_quadratic(change_basis(r, o)).operator_matrix();
  const auto b = change_basis(q_quadratic(r), o).operator_matrix();
  CHECK((a - b).norm() <= 1e-12 * b.norm());
  CHECK(scalar(change_basis(r, o)) == doctest::Approx(scalar(r)).epsilon(1e-12));
}

TEST_CASE("tensor norm convention: Frobenius over all n^4 components") {
  const auto id = identity_operator(5);
  double direct = 0.0;
  for (double v : full_components(id)) direct += v * v;
  CHECK(tensor_norm(id) == doctest::Approx(std::sqrt(direct)).epsilon(1e-15));
  CHECK(tensor_norm(id) == doctest::Approx(2.0 * std::sqrt(10.0)));
  CHECK(tensor_norm(Curvature(5)) == 0.0);
  std::mt19937_64 rng(1);
  const auto r = random_bianchi_tensor<double>(5, rng);
  CHECK(tensor_norm(-3.5 * r) == doctest::Approx(3.5 * tensor_norm(r)).epsilon(1e-15));
}

TEST_CASE("a(b) formula") {
  CHECK(a_of_b(0.0, 9).a == 0.0);
  CHECK(a_of_b(1e-8, 9).a / 1e-8 == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(a_of_b(0.1, 9).a == doctest::Approx(0.729 / 5.2).epsilon(1e-15));
  CHECK(a_of_b(0.1, 9).derived);
  CHECK_THROWS_AS(a_of_b(-0.1, 9), Error);
  try {
    a_of_b(1.0, 0);  // 2 + (0 - 3) * 1 < 0
    FAIL("expected NonpositiveDenominator");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonpositiveDenominator);
  }
}

TEST_CASE("l_ab transform") {
  const int n = 6;
  std::mt19937_64 rng(21);
  const auto r = random_bianchi_tensor<double>(n, rng);
  CHECK((l_ab(r, {}).operator_matrix() - r.operator_matrix()).norm() == 0.0);

  const double b = 0.3, a = 0.17;
  const auto li = l_ab(identity_operator(n), {b, a, false});
  const double factor = 1.0 + 2.0 * b * (n - 1) + 2.0 * (a - b) * (n - 1);
  CHECK((li.operator_matrix() - factor * identity_operator(n).operator_matrix()).cwiseAbs().maxCoeff() <= 1e-13);

  const auto r2 = random_bianchi_tensor<double>(n, rng);
  const Eigen::MatrixXd lin = l_ab(r + r2, {b, a, false}).operator_matrix() -
                   (l_ab(r, {b, a, false}) + l_ab(r2, {b, a, false})).operator_matrix();
  CHECK(lin.norm() <= 1e-12 * tensor_norm(r));
  CHECK(bianchi_residual(l_ab(r, {b, a, false})) <= 1e-12 * tensor_norm(r));
}

TEST_CASE("l_ab inverse round trip on seeded tensors") {
  double worst = 0.0;
  for (int n = 5; n <= 8; ++n) {
    const auto p = a_of_b(0.1, n);
    const PinchingTransform<double> t(n, p);
    for (int s = 0; s < 100; ++s) {
      const auto r = random_tensor(n, 1000 + s, RandomClass::BianchiGeneric);
      const auto back = t.inverse(t.apply(r));
      worst = std::max(worst, (back.operator_matrix() - r.operator_matrix()).norm() / r.operator_matrix().norm());
    }
  }
  CHECK(worst <= 1e-11);
}

TEST_CASE("singular l_ab is reported") {
  const int n = 5;
  // traceless Ricci part scales by 1 + (n-2) b
  try {
    l_ab_inverse(identity_operator(n), {-1.0 / (n - 2), 0.0, false});
    FAIL("expected SingularTransform");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularTransform);
  }
}

TEST_CASE("model tensors") {
  CHECK((sphere_tensor(5, 1.0).operator_matrix() - identity_operator(5).operator_matrix()).norm() == 0.0);
  const auto cyl = cylinder_tensor(5, 1.0);
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j) CHECK(cyl(i, j, i, j) == (j <= 3 ? 1.0 : 0.0));
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      for (int k = 0; k < 5; ++k) CHECK(cyl(4, i, j, k) == 0.0);

  const auto r1 = random_tensor(5, 42, RandomClass::BianchiGeneric);
  const auto r2 = random_tensor(5, 42, RandomClass::BianchiGeneric);
  CHECK((r1.operator_matrix().array() == r2.operator_matrix().array()).all());
  CHECK_THROWS_AS(random_class_from_string("spiky"), Error);
  CHECK_THROWS_AS(sphere_tensor(5, -1.0), Error);

  const auto sum = direct_sum(identity_operator(4), Curvature(2));
  for (int i = 0; i < 6; ++i)
    for (int j = i + 1; j < 6; ++j) CHECK(sum(i, j, i, j) == (j < 4 ? 1.0 : 0.0));
  CHECK(scalar(sum) == doctest::Approx(12.0));

  for (auto cls : {RandomClass::BianchiGeneric, RandomClass::PicInterior, RandomClass::NearPic1Boundary}) {
    for (int s = 0; s < 5; ++s) {
      const auto r = random_tensor(6, 77 + s, cls);
      CHECK(bianchi_residual(r) <= 1e-12 * tensor_norm(r));
    }
  }
}
