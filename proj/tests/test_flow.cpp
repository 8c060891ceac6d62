#include "doctest.h"

#include <cmath>
#include <sstream>

#include "icclab/construct.hpp"
#include "icclab/flow.hpp"

using namespace icclab;

TEST_CASE("sphere flow matches the closed form") {
  const int n = 5;
  FlowOptions opts;
  opts.t_end = 0.1125;  // curvature grows tenfold
  const auto traj = hamilton_flow(sphere_tensor(n, 1.0), opts, {ConeSpec::pic()}, SearchBudget{});
  CHECK(traj.status == FlowStatus::Completed);
  REQUIRE(traj.times.size() == traj.states.size());
  CHECK(traj.times.back() == opts.t_end);
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double c = 1.0 / (1.0 - 2.0 * (n - 1) * traj.times[i]);
    const auto expected = sphere_tensor(n, c);
    CHECK(tensor_norm(traj.states[i] - expected) <= 1e-6 * tensor_norm(expected));
    CHECK(traj.margins[i][0] == doctest::Approx(4.0 * c).epsilon(1e-6));
  }
  for (std::size_t i = 1; i < traj.times.size(); ++i) CHECK(traj.times[i] > traj.times[i - 1]);
  CHECK(traj.max_bianchi_drift <= 1e-10);
  CHECK(traj.accepted == static_cast<long>(traj.times.size()) - 1);
}

TEST_CASE("sphere flow blows up at the singular time") {
  FlowOptions opts;
  opts.t_end = 0.3;  // singular time 1/8
  const auto traj = hamilton_flow(sphere_tensor(5, 1.0), opts, {}, SearchBudget{});
  CHECK(traj.status == FlowStatus::BlowUpReached);
  CHECK(traj.times.back() < 0.125);
  CHECK_FALSE(traj.stop_reason.empty());
}

TEST_CASE("zero tensor is a fixed point") {
  FlowOptions opts;
  opts.t_end = 1.0;
  const auto traj = hamilton_flow(Curvature(5), opts, {ConeSpec::pic2()}, SearchBudget{});
  CHECK(traj.status == FlowStatus::Completed);
  CHECK(tensor_norm(traj.states.back()) == 0.0);
  CHECK(traj.margins.back()[0] == 0.0);
}

TEST_CASE("flow argument validation") {
  FlowOptions opts;
  CHECK_THROWS_AS(hamilton_flow(Curvature(5), opts, {}, SearchBudget{}), Error);
  opts.t_end = 1.0;
  CHECK_THROWS_AS(hamilton_flow(Curvature(5), opts, {ConeSpec::uniform_pic(-1.0)}, SearchBudget{}), Error);
}

TEST_CASE("PIC2 interior flows stay interior") {
  SearchBudget budget;
  budget.restarts = 16;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto r = random_tensor<double>(5, seed, RandomClass::PicInterior);
    const auto margin0 = cone_spec_margin(r, ConeSpec::pic2(), budget).margin;
    if (margin0 <= 0.0) continue;
    FlowOptions opts;
    opts.t_end = 0.01 / (1.0 + std::abs(scalar(r)));
    const auto traj = hamilton_flow(r, opts, {ConeSpec::pic2()}, budget);
    for (const auto& row : traj.margins) CHECK(row[0] >= -1e-8 * (1.0 + tensor_norm(r)));
  }
}

TEST_CASE("csv export") {
  FlowOptions opts;
  opts.t_end = 0.01;
  const auto traj = hamilton_flow(sphere_tensor(5, 1.0), opts, {ConeSpec::pic(), ConeSpec::pic2()}, SearchBudget{});
  std::ostringstream os;
  write_csv(os, traj);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header == "t,scal,\"PIC\",\"PIC2\"");
  std::size_t rows = 0;
  for (std::string line; std::getline(is, line);) ++rows;
  CHECK(rows == traj.times.size());
}

TEST_CASE("invariance probe") {
  SearchBudget budget;
  budget.restarts = 16;
  const int n = 5;
  // I minus one coordinate plane: PIC2 margin zero, Q pushes inward
  Eigen::MatrixXd m = identity_operator<double>(n).operator_matrix();
  m(pair_index(0, 1, n), pair_index(0, 1, n)) = 0.0;
  const auto r = Curvature::from_operator(n, m, BianchiPolicy::Trust);
  const auto probe = invariance_probe(r, ConeSpec::pic2(), 1e-4, budget);
  CHECK(std::abs(probe.margin) < 1e-10);
  CHECK(probe.value == doctest::Approx(2.0 * (n - 2)).epsilon(1e-6));
  CHECK(probe.stable);

  const auto cyl = invariance_probe(cylinder_tensor(n, 1.0), ConeSpec::pic2(), 1e-4, budget);
  CHECK(cyl.value >= -1e-6);

  try {
    invariance_probe(sphere_tensor(n, 1.0), ConeSpec::pic2(), 1e-4, budget);
    FAIL("expected NotNearBoundary");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotNearBoundary);
  }
}
