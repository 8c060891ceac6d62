#include "icclab/soliton.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "icclab/construct.hpp"
#include "icclab/stiefel.hpp"

namespace icclab {

namespace {

void check_dim(int n) {
  if (n < 3) throw Error(ErrorCode::InvalidArgument, "soliton models need n >= 3");
}

double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace

SolitonModel SolitonModel::gaussian(int n) {
  check_dim(n);
  return {Kind::Gaussian, n};
}

SolitonModel SolitonModel::round_sphere(int n) {
  check_dim(n);
  return {Kind::RoundSphere, n};
}

SolitonModel SolitonModel::cylinder(int n) {
  check_dim(n);
  return {Kind::Cylinder, n};
}

int SolitonModel::parameter_size() const {
  switch (kind) {
    case Kind::Gaussian: return n;
    case Kind::RoundSphere: return 0;
    case Kind::Cylinder: return 1;
  }
  return 0;
}

std::string to_string(SolitonModel::Kind k) {
  switch (k) {
    case SolitonModel::Kind::Gaussian: return "gaussian";
    case SolitonModel::Kind::RoundSphere: return "round_sphere";
    case SolitonModel::Kind::Cylinder: return "cylinder";
  }
  return "unknown";
}

SolitonModel::Kind soliton_kind_from_string(const std::string& s) {
  if (s == "gaussian") return SolitonModel::Kind::Gaussian;
  if (s == "round_sphere" || s == "sphere") return SolitonModel::Kind::RoundSphere;
  if (s == "cylinder") return SolitonModel::Kind::Cylinder;
  throw Error(ErrorCode::ParseError, "unknown soliton model '" + s + "'");
}

PointData model_point(const SolitonModel& model, const Eigen::VectorXd& param) {
  const int n = model.n;
  if (param.size() != model.parameter_size()) {
    throw Error(ErrorCode::InvalidArgument, "model " + to_string(model.kind) + " expects " +
                                                std::to_string(model.parameter_size()) + " parameters");
  }
  PointData p;
  p.grad_f = Eigen::VectorXd::Zero(n);
  p.hessian_f = Eigen::MatrixXd::Zero(n, n);
  switch (model.kind) {
    case SolitonModel::Kind::Gaussian:
      p.curvature = Curvature(n);
      p.grad_f = 0.5 * param;
      p.hessian_f.diagonal().setConstant(0.5);
      p.f = 0.25 * param.squaredNorm();
      break;
    case SolitonModel::Kind::RoundSphere:
      p.curvature = sphere_tensor(n, 1.0 / (2.0 * (n - 1)));
      p.f = 0.5 * n;
      break;
    case SolitonModel::Kind::Cylinder: {
      const double s = param(0);
      p.curvature = cylinder_tensor(n, 1.0 / (2.0 * (n - 2)));
      p.grad_f(n - 1) = 0.5 * s;
      p.hessian_f(n - 1, n - 1) = 0.5;
      p.f = 0.25 * s * s + 0.5 * (n - 1);
      break;
    }
  }
  p.ricci = ricci(p.curvature);
  p.scal = scalar(p.curvature);
  p.grad_scal = Eigen::VectorXd::Zero(n);
  p.grad_f_sq = p.grad_f.squaredNorm();
  const Eigen::VectorXd eigs = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(p.hessian_f).eigenvalues();
  p.hessian_f_eigs.assign(eigs.data(), eigs.data() + eigs.size());
  p.laplacian_f = p.hessian_f.trace();
  return p;
}

std::vector<Eigen::VectorXd> sample_parameters(const SolitonModel& model, int count, std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(model.kind) * 1000 + model.n));
  std::normal_distribution<double> gauss(0.0, 3.0);
  std::uniform_real_distribution<double> axis(-10.0, 10.0);
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd x(model.parameter_size());
    for (int k = 0; k < x.size(); ++k) x(k) = model.kind == SolitonModel::Kind::Gaussian ? gauss(rng) : axis(rng);
    out.push_back(std::move(x));
  }
  return out;
}

std::vector<Residual> check_soliton_identities(const SolitonModel& model, const Eigen::VectorXd& param) {
  const PointData p = model_point(model, param);
  const int n = model.n;
  const Eigen::MatrixXd half_g = 0.5 * Eigen::MatrixXd::Identity(n, n);
  return {
      {"soliton_equation", max_abs(p.ricci.matrix() + p.hessian_f - half_g)},
      {"trace", p.scal + p.laplacian_f - 0.5 * n},
      {"ricci_gradient", max_abs(p.ricci.matrix() * p.grad_f - 0.5 * p.grad_scal)},
      {"normalization_gradient", max_abs(p.grad_scal + 2.0 * p.hessian_f * p.grad_f - p.grad_f)},
      {"normalization", p.scal + p.grad_f_sq - p.f},
  };
}

std::vector<Residual> check_elliptic_identities(const SolitonModel& model, const Eigen::VectorXd& param) {
  const PointData p = model_point(model, param);
  const SymmetricForm<double> action = ricci_action(p.curvature, p.ricci);
  return {
      {"curvature", tensor_norm(p.curvature - q_quadratic(p.curvature))},
      {"ricci", max_abs(p.ricci.matrix() - 2.0 * action.matrix())},
      {"scal", p.scal - 2.0 * p.ricci.matrix().squaredNorm()},
  };
}

double max_abs_residual(const std::vector<Residual>& table) {
  double m = 0.0;
  for (const auto& r : table) m = std::max(m, std::abs(r.value));
  return m;
}

HypothesisReport check_theorem13_hypotheses(const SolitonModel& model, const Eigen::VectorXd& param,
                                            const SearchBudget& budget) {
  const PointData p = model_point(model, param);
  HypothesisReport rep;
  rep.hessian_two_smallest = p.hessian_f_eigs[0] + p.hessian_f_eigs[1];
  rep.hessian_two_nonnegative = rep.hessian_two_smallest >= -1e-12;

  const auto margins = cone_margins(p.curvature, budget);
  const double scal_abs = std::abs(p.scal);
  rep.pic_margin = margins[0].margin;
  rep.pic_verdict = classify_margin(rep.pic_margin, scal_abs, budget);
  rep.strictly_pic = rep.pic_verdict == Verdict::Interior;
  rep.pic1_margin = margins[1].margin;
  rep.pic1_verdict = classify_margin(rep.pic1_margin, scal_abs, budget);
  rep.weakly_pic1 = rep.pic1_verdict != Verdict::Outside;

  if (rep.strictly_pic) {
    const P1Result res = p1(p.curvature, budget);
    rep.p1_value = res.value;
    const Eigen::VectorXd e1 = res.witness.frame.row(0).transpose(), e2 = res.witness.frame.row(1).transpose();
    const Eigen::MatrixXd& ric = p.ricci.matrix();
    const double ric_sum = e1.dot(ric * e1) + e2.dot(ric * e2);
    rep.witness_hessian_sum = e1.dot(p.hessian_f * e1) + e2.dot(p.hessian_f * e2);
    rep.witness_identity_residual = 1.0 - ric_sum - rep.witness_hessian_sum;
  }

  const SymmetricForm<double> action = ricci_action(p.curvature, p.ricci);
  rep.r_star_ric_min_eig = action.eigenvalues().minCoeff();
  rep.hypotheses_hold = rep.hessian_two_nonnegative && rep.strictly_pic && rep.weakly_pic1 &&
                        rep.witness_hessian_sum >= -1e-12;
  return rep;
}

ThetaBound bound_theta(const SolitonModel& model, int samples, std::uint64_t seed) {
  if (model.kind == SolitonModel::Kind::Gaussian) throw Error(ErrorCode::ZeroScal, "the Gaussian soliton is flat");
  ThetaBound out;
  out.scal_min = std::numeric_limits<double>::infinity();
  out.scal_max = -std::numeric_limits<double>::infinity();
  out.scal_in_range = true;
  bool first = true;
  for (const auto& x : sample_parameters(model, samples, seed)) {
    const PointData p = model_point(model, x);
    if (!(p.scal > 0.0)) throw Error(ErrorCode::ZeroScal, "scal vanishes at a sample point");
    if (first) out.ratio = tensor_norm(p.curvature) / p.scal;
    first = false;
    out.scal_min = std::min(out.scal_min, p.scal);
    out.scal_max = std::max(out.scal_max, p.scal);
    out.scal_in_range = out.scal_in_range && p.scal >= 0.0 && p.scal <= 0.5 * model.n + 1e-12;
  }
  return out;
}

}  // namespace icclab
