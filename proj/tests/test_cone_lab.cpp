#include "doctest.h"

#include <cmath>

#include "icclab/cone_lab.hpp"
#include "icclab/construct.hpp"
#include "icclab/curvature.hpp"
#include "icclab/transform.hpp"

using namespace icclab;

namespace {

SearchBudget quick_budget() {
  SearchBudget b;
  b.restarts = 16;
  return b;
}

}  // namespace

TEST_CASE("cone specs parse, print and validate") {
  CHECK(cone_spec_from_string("PIC").kind == ConeSpec::Kind::PIC);
  CHECK(cone_spec_from_string("PIC2").kind == ConeSpec::Kind::PIC2);
  const auto u = cone_spec_from_string("UniformPIC:0.01");
  CHECK(u.kind == ConeSpec::Kind::UniformPIC);
  CHECK(u.theta == doctest::Approx(0.01));
  const auto e = cone_spec_from_string("Eb:0.01:0.1:10");
  CHECK(e.kind == ConeSpec::Kind::EbPullback);
  CHECK(e.b == doctest::Approx(0.1));
  CHECK(e.omega == doctest::Approx(10.0));
  CHECK(e.derived);
  CHECK_NOTHROW(validate(e, 5));
  CHECK_THROWS_AS(cone_spec_from_string("PIC3"), Error);
  CHECK_THROWS_AS(cone_spec_from_string("UniformPIC:x"), Error);
  CHECK_THROWS_AS(validate(ConeSpec::uniform_pic(0.0), 5), Error);
  CHECK_THROWS_AS(validate(ConeSpec::eb_pullback(0.01, -1.0, 1.0), 5), Error);
  CHECK_NOTHROW(validate(ConeSpec::eb_pullback(0.01, 0.1, 0.5, 1.0), 5));
  auto mismatched = ConeSpec::eb_pullback(0.01, 0.1, 1.0);
  mismatched.a = 0.5;
  CHECK_THROWS_AS(validate(mismatched, 5), Error);
  CHECK(to_string(ConeSpec::pic1()) == "PIC1");
}

TEST_CASE("eb_check on the identity and the cylinder") {
  const auto budget = quick_budget();
  {
    const auto rep = eb_check(identity_operator<double>(5), 0.01, 10.0, budget);
    CHECK(rep.passes());
    CHECK(std::abs(rep.spread) < 1e-12);
    CHECK(rep.scal == doctest::Approx(20.0));
  }
  {
    const auto rep = eb_check(cylinder_tensor(5, 1.0), 0.01, 10.0, budget);
    CHECK(rep.scal == doctest::Approx(12.0));
    CHECK(rep.spread == doctest::Approx(3.0));
    CHECK(rep.bound == doctest::Approx(std::sqrt(0.3) * 12.0));
    CHECK(rep.margin_ii == doctest::Approx(3.0));
    CHECK(rep.margin_i == doctest::Approx(2.0 - 4.0 * 0.005 * 12.0));
    CHECK(rep.passes());
    CHECK(std::abs(rep.sampled_spread - rep.spread) <= 1e-8 * (1.0 + rep.spread));
  }
}

TEST_CASE("eb_check failures") {
  const auto budget = quick_budget();
  // sectional curvature -1 on planes meeting e1 or e2, 5 on the rest
  const int n = 5;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(two_form_dim(n), two_form_dim(n));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) m(pair_index(i, j, n), pair_index(i, j, n)) = i < 2 ? -1.0 : 5.0;
  const auto r = Curvature::from_operator(n, m, BianchiPolicy::Trust);
  const auto neg = eb_check(r, 0.01, 10.0, budget);
  CHECK(neg.scal == doctest::Approx(16.0));
  CHECK_FALSE(neg.cond_ii);
  CHECK(neg.margin_ii == doctest::Approx(-8.0));
  CHECK(neg.margin() < 0.0);
  CHECK_THROWS_AS(eb_check(Curvature(5), 0.01, 1.0, budget), Error);
  try {
    eb_check(-1.0 * identity_operator<double>(5), 0.01, 1.0, budget);
    FAIL("expected NonpositiveScal");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonpositiveScal);
  }
  // narrow spread bound fails (iii)
  const auto rep = eb_check(cylinder_tensor(5, 1.0), 1e-4, 1.0, budget);
  CHECK_FALSE(rep.cond_iii);
  CHECK(rep.margin_iii < 0.0);
}

TEST_CASE("sampled and closed-form Ricci spread agree") {
  const auto budget = quick_budget();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto r = random_tensor<double>(6, seed, RandomClass::PicInterior);
    if (scalar(r) <= 0) continue;
    const auto rep = eb_check(r, 0.01, 1.0, budget);
    CHECK(std::abs(rep.sampled_spread - rep.spread) <= 1e-8 * (1.0 + std::abs(rep.spread)));
  }
}

TEST_CASE("cone_spec_margin dispatch") {
  const auto budget = quick_budget();
  const auto s = sphere_tensor(5, 1.0);
  CHECK(cone_spec_margin(s, ConeSpec::pic(), budget).margin == doctest::Approx(4.0));
  CHECK(cone_spec_margin(s, ConeSpec::pic1(), budget).margin == doctest::Approx(2.0));
  CHECK(cone_spec_margin(s, ConeSpec::pic2(), budget).margin == doctest::Approx(1.0));
  CHECK(cone_spec_margin(s, ConeSpec::uniform_pic(0.01), budget).margin == doctest::Approx(4.0 - 4 * 0.01 * 20));
  const auto eb = ConeSpec::eb_pullback(0.01, 0.1, 10.0);
  const auto direct = eb_check(l_ab_inverse(s, a_of_b(0.1, 5)), 0.01, 10.0, budget);
  CHECK(cone_spec_margin(s, eb, budget).margin == doctest::Approx(direct.margin()));
}

TEST_CASE("uniform PIC critical theta of model tensors") {
  const auto budget = quick_budget();
  CHECK(uniform_pic_critical_theta(sphere_tensor(9, 1.0), budget) == doctest::Approx(1.0 / 72));
  CHECK(uniform_pic_critical_theta(cylinder_tensor(9, 1.0), budget) == doctest::Approx(1.0 / 112));
}

TEST_CASE("pipeline on model tensors") {
  const auto budget = quick_budget();
  const OmegaSchedule omega{};
  for (const auto& r : {sphere_tensor(9, 1.0), cylinder_tensor(9, 1.0)}) {
    const double theta = 0.5 * uniform_pic_critical_theta(r, budget);
    const auto rep = theorem11_pipeline(r, theta, omega, default_b_grid(), budget);
    CHECK(rep.uniform_margin > 0.0);
    CHECK(rep.ric_two_smallest >= 0.0);
    REQUIRE_FALSE(rep.rows.empty());
    for (std::size_t i = 1; i < rep.rows.size(); ++i) CHECK(rep.rows[i].b < rep.rows[i - 1].b);
    if (rep.admissible_b) {
      CHECK(rep.rows.back().eb.passes());
      CHECK(rep.rows.back().b == *rep.admissible_b);
      for (std::size_t i = 0; i + 1 < rep.rows.size(); ++i) CHECK_FALSE(rep.rows[i].eb.passes());
    } else {
      CHECK(rep.rows.size() == default_b_grid().size());
    }
    const auto again = theorem11_pipeline(r, theta, omega, default_b_grid(), budget);
    REQUIRE(again.rows.size() == rep.rows.size());
    for (std::size_t i = 0; i < rep.rows.size(); ++i) CHECK(again.rows[i].eb.margin() == rep.rows[i].eb.margin());
  }
  // the sphere is fixed by l_{a,b} up to scale and lies in every E(b)
  const auto rep = theorem11_pipeline(sphere_tensor(9, 1.0), 1.0 / 144, omega, default_b_grid(), budget);
  REQUIRE(rep.admissible_b.has_value());
  CHECK(*rep.admissible_b == doctest::Approx(0.2));
}

TEST_CASE("pipeline preconditions") {
  const auto budget = quick_budget();
  const auto check_code = [&](const Curvature& r, double theta) {
    try {
      theorem11_pipeline(r, theta, OmegaSchedule{}, default_b_grid(), budget);
      FAIL("expected PreconditionFailed");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::PreconditionFailed);
    }
  };
  check_code(Curvature(6), 0.01);
  check_code(sphere_tensor(6, 1.0), 0.5);
  CHECK_THROWS_AS(theorem11_pipeline(sphere_tensor(6, 1.0), 0.0, OmegaSchedule{}, default_b_grid(), budget), Error);
}

TEST_CASE("omega schedules") {
  CHECK(omega_schedule_from_string("inverse")(0.1) == doctest::Approx(10.0));
  CHECK(omega_schedule_from_string("inverse:2")(0.1) == doctest::Approx(20.0));
  CHECK(omega_schedule_from_string("inverse_sqrt")(0.04) == doctest::Approx(5.0));
  CHECK(omega_schedule_from_string("constant:3")(0.1) == doctest::Approx(3.0));
  CHECK_THROWS_AS(omega_schedule_from_string("cubic"), Error);
  CHECK(to_string(omega_schedule_from_string("inverse:2")) == "inverse:2");
}

TEST_CASE("lift_with_constant") {
  const auto lifted = lift_with_constant(identity_operator<double>(5), 2.0);
  CHECK(lifted.dim() == 6);
  CHECK((lifted.operator_matrix() - identity_operator<double>(6).operator_matrix()).norm() < 1e-15);
  const auto r = random_tensor<double>(5, 7, RandomClass::BianchiGeneric);
  const auto t = lift_with_constant(r, 0.0);
  CHECK(bianchi_residual(t) < 1e-12 * (1.0 + tensor_norm(t)));
  CHECK(tensor_norm(t) == doctest::Approx(tensor_norm(r)));
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      CHECK(t(i, j, i, j) == doctest::Approx(r(i, j, i, j)));
      CHECK(t(i, 5, j, 5) == 0.0);
    }
  const auto t3 = lift_with_constant(r, 3.0);
  CHECK(t3(1, 5, 1, 5) == doctest::Approx(1.5));
  CHECK(bianchi_residual(t3) < 1e-12 * (1.0 + tensor_norm(t3)));
}

TEST_CASE("lemma31 stress on the perturbed cylinder") {
  SearchBudget budget;
  for (int n : {5, 6}) {
    const auto rep = lemma31_stress(perturbed_cylinder_tensor(n, 0.05), budget);
    REQUIRE(rep.applicable);
    CHECK(rep.c > 0.0);
    CHECK(rep.slack >= -rep.slack_tolerance);
    CHECK(rep.lifted_weakly_pic);
    CHECK(std::abs(rep.lifted_frame_value) <= 1e-8 * (1.0 + tensor_norm(perturbed_cylinder_tensor(n, 0.05))));
    CHECK(rep.stationary);
    CHECK(rep.ok);
  }
}

TEST_CASE("lemma31 stress is not applicable when p1 >= 0") {
  const auto rep = lemma31_stress(cylinder_tensor(5, 1.0), quick_budget());
  CHECK_FALSE(rep.applicable);
}

TEST_CASE("lemma31 slack scales quadratically") {
  SearchBudget budget;
  const auto r = perturbed_cylinder_tensor(5, 0.05);
  const auto a = lemma31_stress(r, budget);
  const auto b = lemma31_stress(2.0 * r, budget);
  REQUIRE(a.applicable);
  REQUIRE(b.applicable);
  CHECK(b.c == doctest::Approx(2.0 * a.c).epsilon(1e-8));
  CHECK(b.slack == doctest::Approx(4.0 * a.slack).epsilon(1e-6).scale(1e-8));
}

TEST_CASE("lemma31 stress on sampled near-boundary tensors") {
  SearchBudget budget;
  int applicable = 0;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto r = random_tensor<double>(5 + static_cast<int>(seed % 2), seed, RandomClass::NearPic1Boundary);
    const auto rep = lemma31_stress(r, budget);
    if (!rep.applicable) continue;
    ++applicable;
    CHECK(rep.slack >= -rep.slack_tolerance);
    CHECK(rep.stationary);
    CHECK(rep.lifted_weakly_pic);
  }
  MESSAGE("applicable near-boundary samples: " << applicable);
}
