#include "icclab/cone_lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

#include "icclab/stiefel.hpp"

namespace icclab {

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

double parse_number(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, "cannot parse " + what + " from '" + s + "'");
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t pos = s.find(sep); pos != std::string::npos; pos = s.find(sep, start)) {
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  out.push_back(s.substr(start));
  return out;
}

double weak_tolerance(double scal, const SearchBudget& budget) { return budget.tol_weak * (1.0 + std::abs(scal)); }

// max over orthonormal 2-frames of e2.A e2 - e1.A e1
double sampled_spread(const Eigen::MatrixXd& a, const SearchBudget& budget) {
  const int n = static_cast<int>(a.rows());
  const double scale = a.norm();
  if (scale == 0.0) return 0.0;
  const Eigen::MatrixXd m = a / scale;
  StiefelObjective f = [&m](const Eigen::MatrixXd& frame, const Eigen::VectorXd&, Eigen::MatrixXd* gf,
                            Eigen::VectorXd*) -> double {
    const Eigen::VectorXd e1 = frame.row(0).transpose(), e2 = frame.row(1).transpose();
    if (gf != nullptr) {
      gf->row(0) = (2.0 * m * e1).transpose();
      gf->row(1) = (-2.0 * m * e2).transpose();
    }
    return e1.dot(m * e1) - e2.dot(m * e2);
  };
  MultiStartOptions o;
  o.restarts = std::max(1, std::min(budget.restarts, 16));
  o.seed = derive_seed(budget.seed, 0xEB3);
  o.descent.max_iterations = budget.iterations;
  o.descent.grad_tol = std::max(budget.grad_tol, budget.coarse_grad_tol);
  o.polish.grad_tol = budget.grad_tol;
  const Box none{Eigen::VectorXd(0), Eigen::VectorXd(0)};
  return -multistart_minimize(f, 2, n, none, o).value * scale;
}

}  // namespace

ConeSpec ConeSpec::uniform_pic(double theta) {
  ConeSpec s{Kind::UniformPIC};
  s.theta = theta;
  return s;
}

ConeSpec ConeSpec::eb_pullback(double theta, double b, double omega) {
  ConeSpec s{Kind::EbPullback};
  s.theta = theta;
  s.b = b;
  s.omega = omega;
  s.derived = true;
  return s;
}

ConeSpec ConeSpec::eb_pullback(double theta, double b, double a, double omega) {
  ConeSpec s = eb_pullback(theta, b, omega);
  s.a = a;
  s.derived = false;
  return s;
}

void validate(const ConeSpec& spec, int n) {
  using K = ConeSpec::Kind;
  if ((spec.kind == K::UniformPIC || spec.kind == K::EbPullback) && !(spec.theta > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "theta must be positive");
  }
  if (spec.kind != K::EbPullback) return;
  if (!(spec.b >= 0.0)) throw Error(ErrorCode::InvalidArgument, "b must be nonnegative");
  if (!(spec.omega > 0.0)) throw Error(ErrorCode::InvalidArgument, "omega must be positive");
  if (spec.derived && spec.a != 0.0) {
    const double expected = a_of_b(spec.b, n).a;
    if (std::abs(spec.a - expected) > 1e-12 * (1.0 + std::abs(expected))) {
      throw Error(ErrorCode::InvalidArgument, "a does not match a_of_b(b)");
    }
  }
}

std::string to_string(const ConeSpec& spec) {
  switch (spec.kind) {
    case ConeSpec::Kind::PIC: return "PIC";
    case ConeSpec::Kind::PIC1: return "PIC1";
    case ConeSpec::Kind::PIC2: return "PIC2";
    case ConeSpec::Kind::UniformPIC: return "UniformPIC(theta=" + fmt(spec.theta) + ")";
    case ConeSpec::Kind::EbPullback:
      return "Eb(theta=" + fmt(spec.theta) + ",b=" + fmt(spec.b) + (spec.derived ? "" : ",a=" + fmt(spec.a)) +
             ",omega=" + fmt(spec.omega) + ")";
  }
  return "unknown";
}

ConeSpec cone_spec_from_string(const std::string& s) {
  const auto parts = split(s, ':');
  const std::string& head = parts.front();
  if (parts.size() == 1) {
    if (head == "PIC" || head == "pic") return ConeSpec::pic();
    if (head == "PIC1" || head == "pic1") return ConeSpec::pic1();
    if (head == "PIC2" || head == "pic2") return ConeSpec::pic2();
  }
  if ((head == "UniformPIC" || head == "uniform") && parts.size() == 2) {
    return ConeSpec::uniform_pic(parse_number(parts[1], "theta"));
  }
  if ((head == "Eb" || head == "eb") && parts.size() == 4) {
    return ConeSpec::eb_pullback(parse_number(parts[1], "theta"), parse_number(parts[2], "b"),
                                 parse_number(parts[3], "omega"));
  }
  throw Error(ErrorCode::ParseError, "unknown cone specification '" + s + "'");
}

double EbReport::margin() const { return std::min({margin_i, margin_ii, margin_iii}); }

EbReport eb_check(const Curvature& s, double theta, double omega, const SearchBudget& budget) {
  const int n = s.dim();
  if (!(theta > 0.0)) throw Error(ErrorCode::InvalidArgument, "theta must be positive");
  if (!(omega > 0.0)) throw Error(ErrorCode::InvalidArgument, "omega must be positive");
  EbReport rep;
  rep.theta = theta;
  rep.omega = omega;
  rep.scal = scalar(s);
  if (!(rep.scal > 0.0)) throw Error(ErrorCode::NonpositiveScal, "scal(S) = " + fmt(rep.scal));
  const double tol = weak_tolerance(rep.scal, budget);

  const auto uniform = uniform_pic_margin(s, 0.5 * theta, budget);
  rep.margin_i = uniform.margin;
  rep.witness_i = uniform.witness;
  rep.cond_i = classify_margin(rep.margin_i, rep.scal, budget) != Verdict::Outside;

  const SymForm ric = ricci(s);
  const Eigen::VectorXd ev = ric.eigenvalues();
  rep.margin_ii = ev(0) + ev(1);
  rep.cond_ii = rep.margin_ii >= -tol;
  rep.ricci_ratio = rep.margin_ii / rep.scal;

  rep.spread = ev(n - 1) - ev(0);
  rep.sampled_spread = sampled_spread(ric.matrix(), budget);
  rep.bound = std::sqrt(omega * theta * (n - 2)) * rep.scal;
  rep.margin_iii = rep.bound - rep.spread;
  rep.cond_iii = rep.margin_iii >= -tol;
  return rep;
}

SpecMargin cone_spec_margin(const Curvature& r, const ConeSpec& spec, const SearchBudget& budget,
                            std::span<const FrameConfig> warm_starts) {
  validate(spec, r.dim());
  auto from_report = [](const MembershipReport& rep) { return SpecMargin{rep.margin, rep.witness, rep.converged}; };
  switch (spec.kind) {
    case ConeSpec::Kind::PIC: return from_report(cone_margin(r, ConeMode::PIC, budget, warm_starts));
    case ConeSpec::Kind::PIC1: return from_report(cone_margin(r, ConeMode::PIC1, budget, warm_starts));
    case ConeSpec::Kind::PIC2: return from_report(cone_margin(r, ConeMode::PIC2, budget, warm_starts));
    case ConeSpec::Kind::UniformPIC: {
      const Curvature shifted = r - (spec.theta * scalar(r)) * identity_operator(r.dim());
      return from_report(cone_margin(shifted, ConeMode::PIC, budget, warm_starts));
    }
    case ConeSpec::Kind::EbPullback: {
      const TransformParams p = spec.derived ? a_of_b(spec.b, r.dim()) : TransformParams{spec.b, spec.a, false};
      const Curvature s = l_ab_inverse(r, p);
      const EbReport eb = eb_check(s, spec.theta, spec.omega, budget);
      return {eb.margin(), eb.witness_i, true};
    }
  }
  return {};
}

double OmegaSchedule::operator()(double b) const {
  switch (kind) {
    case Kind::Inverse: return scale / b;
    case Kind::InverseSqrt: return scale / std::sqrt(b);
    case Kind::Constant: return scale;
  }
  return scale;
}

OmegaSchedule omega_schedule_from_string(const std::string& s) {
  const auto parts = split(s, ':');
  if (parts.size() > 2) throw Error(ErrorCode::ParseError, "bad omega schedule '" + s + "'");
  OmegaSchedule w;
  if (parts[0] == "inverse") {
    w.kind = OmegaSchedule::Kind::Inverse;
  } else if (parts[0] == "inverse_sqrt") {
    w.kind = OmegaSchedule::Kind::InverseSqrt;
  } else if (parts[0] == "constant" && parts.size() == 2) {
    w.kind = OmegaSchedule::Kind::Constant;
  } else {
    throw Error(ErrorCode::ParseError, "unknown omega schedule '" + s + "'");
  }
  if (parts.size() == 2) w.scale = parse_number(parts[1], "omega scale");
  if (!(w.scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "omega scale must be positive");
  return w;
}

std::string to_string(const OmegaSchedule& w) {
  switch (w.kind) {
    case OmegaSchedule::Kind::Inverse: return "inverse:" + fmt(w.scale);
    case OmegaSchedule::Kind::InverseSqrt: return "inverse_sqrt:" + fmt(w.scale);
    case OmegaSchedule::Kind::Constant: return "constant:" + fmt(w.scale);
  }
  return "unknown";
}

std::vector<double> default_b_grid() { return {0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001}; }

PipelineReport theorem11_pipeline(const Curvature& r, double theta, const OmegaSchedule& omega,
                                  std::vector<double> b_grid, const SearchBudget& budget) {
  const int n = r.dim();
  if (!(theta > 0.0)) throw Error(ErrorCode::InvalidArgument, "theta must be positive");
  const double scal = scalar(r);
  if (!(scal > 0.0)) throw Error(ErrorCode::PreconditionFailed, "scal(R) must be positive");

  PipelineReport rep;
  rep.theta = theta;
  rep.uniform_margin = uniform_pic_margin(r, theta, budget).margin;
  if (classify_margin(rep.uniform_margin, scal, budget) == Verdict::Outside) {
    throw Error(ErrorCode::PreconditionFailed, "R is not uniformly PIC at theta (margin " +
                                                   fmt(rep.uniform_margin) + ")");
  }
  rep.ric_two_smallest = ric_two_smallest(ricci(r));
  rep.ricci_ratio = rep.ric_two_smallest / scal;
  if (rep.ric_two_smallest < -weak_tolerance(scal, budget)) {
    throw Error(ErrorCode::PreconditionFailed, "lambda_1 + lambda_2 of Ric(R) is negative");
  }

  std::stable_sort(b_grid.begin(), b_grid.end(), std::greater<>());
  for (double b : b_grid) {
    PipelineRow row;
    const TransformParams p = a_of_b(b, n);
    row.b = b;
    row.a = p.a;
    row.omega = omega(b);
    const Curvature s = l_ab_inverse(r, p);
    row.eb.theta = theta;
    row.eb.omega = row.omega;
    row.eb.scal = scalar(s);
    if (row.eb.scal > 0.0) row.eb = eb_check(s, theta, row.omega, budget);
    const bool admits = row.eb.passes();
    rep.rows.push_back(std::move(row));
    if (admits) {
      rep.admissible_b = b;
      break;
    }
  }
  return rep;
}

double uniform_pic_critical_theta(const Curvature& r, const SearchBudget& budget) {
  const double scal = scalar(r);
  if (!(scal > 0.0)) throw Error(ErrorCode::NonpositiveScal, "scal(R) must be positive");
  return cone_margin(r, ConeMode::PIC, budget).margin / (4.0 * scal);
}

Curvature lift_with_constant(const Curvature& r, double c) {
  const int n = r.dim(), m = n + 1;
  Eigen::MatrixXd op = Eigen::MatrixXd::Zero(two_form_dim(m), two_form_dim(m));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = k + 1; l < n; ++l) op(pair_index(i, j, m), pair_index(k, l, m)) = r(i, j, k, l);
  for (int i = 0; i < n; ++i) op(pair_index(i, n, m), pair_index(i, n, m)) = 0.5 * c;
  return Curvature::from_operator(m, std::move(op), BianchiPolicy::Trust);
}

Lemma31Report lemma31_stress(const Curvature& r, const SearchBudget& budget) {
  const int n = r.dim();
  Lemma31Report rep;
  rep.p1 = p1(r, budget);
  if (rep.p1.value >= 0.0) return rep;
  rep.applicable = true;

  const double norm = tensor_norm(r);
  const FrameConfig& w = rep.p1.witness;
  const double l = w.lambda;
  rep.c = -rep.p1.value;
  rep.lambda = l;

  const auto qc = pulled_components(q_quadratic(r), w.frame);
  rep.q_combination = isotropic_combination(qc, ConeMode::PIC1, l, 1.0);
  const Eigen::MatrixXd ric = ricci(r).matrix();
  const Eigen::VectorXd e1 = w.frame.row(0).transpose(), e2 = w.frame.row(1).transpose();
  rep.ricci_sum = e1.dot(ric * e1) + e2.dot(ric * e2);
  rep.slack = rep.q_combination + rep.c * (1.0 - l * l) * rep.ricci_sum;
  rep.slack_tolerance = 1e-8 * (1.0 + norm * norm);

  const Curvature t = lift_with_constant(r, rep.c);
  Eigen::MatrixXd lifted = Eigen::MatrixXd::Zero(4, n + 1);
  lifted.leftCols(n) = w.frame;
  lifted.row(3).head(n) *= l;
  lifted(3, n) = std::sqrt(1.0 - l * l);
  const FrameConfig lifted_cfg{orthonormalize_rows(lifted), 1.0, 1.0};
  rep.lifted_frame_value = isotropic_value(t, lifted_cfg, ConeMode::PIC);
  rep.lifted_margin = cone_margin(t, ConeMode::PIC, budget, std::span<const FrameConfig>(&lifted_cfg, 1)).margin;
  rep.lifted_weakly_pic = classify_margin(rep.lifted_margin, scalar(t), budget) != Verdict::Outside;

  const double stat_tol = 1e-6 * (1.0 + norm);
  rep.stationary = std::abs(rep.p1.stationarity_value) <= stat_tol &&
                   (!rep.p1.interior || std::abs(rep.p1.stationarity_lambda) <= stat_tol);
  rep.ok = rep.slack >= -rep.slack_tolerance && rep.lifted_weakly_pic &&
           std::abs(rep.lifted_frame_value) <= 1e-8 * (1.0 + norm) && rep.stationary;
  return rep;
}

}  // namespace icclab
