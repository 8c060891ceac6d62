#include "icclab/frame_search.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "icclab/stiefel.hpp"

namespace icclab {

std::string_view to_string(ConeMode mode) {
  switch (mode) {
    case ConeMode::PIC: return "PIC";
    case ConeMode::PIC1: return "PIC1";
    case ConeMode::PIC2: return "PIC2";
  }
  return "unknown";
}

ConeMode cone_mode_from_string(std::string_view s) {
  if (s == "PIC" || s == "pic") return ConeMode::PIC;
  if (s == "PIC1" || s == "pic1") return ConeMode::PIC1;
  if (s == "PIC2" || s == "pic2") return ConeMode::PIC2;
  throw Error(ErrorCode::InvalidArgument, "unknown cone mode '" + std::string(s) + "'");
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Interior: return "interior";
    case Verdict::Weak: return "weak";
    case Verdict::Outside: return "outside";
  }
  return "unknown";
}

Verdict classify_margin(double margin, double scal, const SearchBudget& budget) {
  const double scale = 1.0 + std::abs(scal);
  if (margin > budget.tol_interior * scale) return Verdict::Interior;
  if (margin >= -budget.tol_weak * scale) return Verdict::Weak;
  return Verdict::Outside;
}

namespace {

Eigen::VectorXd wedge(const Eigen::VectorXd& u, const Eigen::VectorXd& v, int n) {
  Eigen::VectorXd w(two_form_dim(n));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) w(pair_index(i, j, n)) = u(i) * v(j) - u(j) * v(i);
  return w;
}

// (U y)_i with U the antisymmetric matrix U_ij = u(ij) for i < j.
Eigen::VectorXd antisym_apply(const Eigen::VectorXd& u, const Eigen::VectorXd& y, int n) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double c = u(pair_index(i, j, n));
      out(i) += c * y(j);
      out(j) -= c * y(i);
    }
  return out;
}

struct ComponentsWithGrad {
  FrameComponents c{};
  std::array<Eigen::MatrixXd, 5> grad;  // d r1313, r1414, r2323, r2424, r1234 / d frame
};

ComponentsWithGrad components(const Eigen::MatrixXd& m, const Eigen::MatrixXd& frame, bool with_grad) {
  const int n = static_cast<int>(frame.cols());
  const Eigen::VectorXd e1 = frame.row(0).transpose(), e2 = frame.row(1).transpose();
  const Eigen::VectorXd e3 = frame.row(2).transpose(), e4 = frame.row(3).transpose();
  const Eigen::VectorXd w13 = wedge(e1, e3, n), w14 = wedge(e1, e4, n);
  const Eigen::VectorXd w23 = wedge(e2, e3, n), w24 = wedge(e2, e4, n);
  const Eigen::VectorXd w12 = wedge(e1, e2, n), w34 = wedge(e3, e4, n);
  const Eigen::VectorXd u13 = m * w13, u14 = m * w14, u23 = m * w23, u24 = m * w24, u34 = m * w34;

  ComponentsWithGrad out;
  out.c = {w13.dot(u13), w14.dot(u14), w23.dot(u23), w24.dot(u24), w12.dot(u34)};
  if (!with_grad) return out;

  for (auto& g : out.grad) g = Eigen::MatrixXd::Zero(4, n);
  out.grad[0].row(0) = 2.0 * antisym_apply(u13, e3, n);
  out.grad[0].row(2) = -2.0 * antisym_apply(u13, e1, n);
  out.grad[1].row(0) = 2.0 * antisym_apply(u14, e4, n);
  out.grad[1].row(3) = -2.0 * antisym_apply(u14, e1, n);
  out.grad[2].row(1) = 2.0 * antisym_apply(u23, e3, n);
  out.grad[2].row(2) = -2.0 * antisym_apply(u23, e2, n);
  out.grad[3].row(1) = 2.0 * antisym_apply(u24, e4, n);
  out.grad[3].row(3) = -2.0 * antisym_apply(u24, e2, n);
  const Eigen::VectorXd u12 = m * w12;
  out.grad[4].row(0) = antisym_apply(u34, e2, n);
  out.grad[4].row(1) = -antisym_apply(u34, e1, n);
  out.grad[4].row(2) = antisym_apply(u12, e4, n);
  out.grad[4].row(3) = -antisym_apply(u12, e3, n);
  return out;
}

enum class Objective { PIC, PIC1, PIC2, Ratio };

Objective objective_for(ConeMode mode) {
  switch (mode) {
    case ConeMode::PIC: return Objective::PIC;
    case ConeMode::PIC1: return Objective::PIC1;
    case ConeMode::PIC2: return Objective::PIC2;
  }
  return Objective::PIC;
}

// Coefficients of (r1313, r1414, r2323, r2424, r1234) and their parameter derivatives.
struct Coefficients {
  std::array<double, 5> c{};
  std::array<double, 5> dl{};
  std::array<double, 5> dm{};
};

Coefficients coefficients(Objective obj, double l, double mu) {
  switch (obj) {
    case Objective::PIC: return {{1, 1, 1, 1, -2}, {}, {}};
    case Objective::PIC1:
    case Objective::Ratio: return {{1, l * l, 1, l * l, -2 * l}, {0, 2 * l, 0, 2 * l, -2}, {}};
    case Objective::PIC2:
      return {{1, l * l, mu * mu, l * l * mu * mu, -2 * l * mu},
              {0, 2 * l, 0, 2 * l * mu * mu, -2 * mu},
              {0, 0, 2 * mu, 2 * l * l * mu, -2 * l}};
  }
  return {};
}

double dot5(const std::array<double, 5>& a, const FrameComponents& c) {
  return a[0] * c.r1313 + a[1] * c.r1414 + a[2] * c.r2323 + a[3] * c.r2424 + a[4] * c.r1234;
}

struct Params {
  double l = 1.0;
  double mu = 1.0;
};

double combination_value(Objective obj, const FrameComponents& c, Params p) {
  const double z = dot5(coefficients(obj, p.l, p.mu).c, c);
  return obj == Objective::Ratio ? z / (1.0 - p.l * p.l) : z;
}

// Exact minimizer over the parameter box for a fixed frame.
// PIC1 and the ratio use Z(l) = A + B l^2 - 2 C l with A = R1313 + R2323,
// B = R1414 + R2424, C = R1234:
//   PIC1 : stationary point l = C / B when B > 0
//   ratio: d/dl [Z / (1 - l^2)] vanishes where C l^2 - (A + B) l + C = 0
// PIC2 with A = R1313, B = R1414, D = R2323, E = R2424, C = R1234:
//   interior critical points solve (B + m^2 E)^2 = C^2 B / D, l = m C / (B + m^2 E);
//   the edges reduce to one-variable quadratics.
Params inner_params(Objective obj, const FrameComponents& c, double cap) {
  std::vector<Params> cand;
  auto push = [&](double l, double mu) {
    if (l >= 0.0 && l <= cap && mu >= 0.0 && mu <= 1.0) cand.push_back({l, mu});
  };
  switch (obj) {
    case Objective::PIC: return {};
    case Objective::PIC1:
    case Objective::Ratio: {
      const double a = c.r1313 + c.r2323, b = c.r1414 + c.r2424, cc = c.r1234;
      push(0.0, 1.0);
      push(cap, 1.0);
      if (obj == Objective::PIC1) {
        if (b > 0.0) push(cc / b, 1.0);
      } else if (cc != 0.0) {
        const double disc = (a + b) * (a + b) - 4.0 * cc * cc;
        if (disc >= 0.0) {
          // stable pair of roots with product 1
          const double q = 0.5 * ((a + b) + std::copysign(std::sqrt(disc), a + b));
          if (q != 0.0) {
            push(q / cc, 1.0);
            push(cc / q, 1.0);
          }
        }
      }
      break;
    }
    case Objective::PIC2: {
      const double b = c.r1414, d = c.r2323, e = c.r2424, cc = c.r1234;
      for (double l : {0.0, 1.0})
        for (double mu : {0.0, 1.0}) push(l, mu);
      // l = 1 and m = 1 edges
      if (d + e > 0.0) push(1.0, cc / (d + e));
      if (b + e > 0.0) push(cc / (b + e), 1.0);
      if (d != 0.0 && e != 0.0 && b / d >= 0.0) {
        const double root = std::abs(cc) * std::sqrt(b / d);
        for (double t : {root, -root}) {
          const double s2 = (t - b) / e;
          if (!(s2 >= 0.0) || t == 0.0) continue;
          const double mu = std::sqrt(s2);
          push(mu * cc / t, mu);
        }
      }
      break;
    }
  }
  Params best = cand.front();
  double best_v = combination_value(obj, c, best);
  for (std::size_t i = 1; i < cand.size(); ++i) {
    const double v = combination_value(obj, c, cand[i]);
    if (v < best_v) {
      best_v = v;
      best = cand[i];
    }
  }
  return best;
}

// Frame objective with the parameters minimized out exactly; by the envelope
// theorem the frame gradient is the partial gradient at the optimal parameters.
StiefelObjective make_objective(const Eigen::MatrixXd& m, Objective obj, double cap = 1.0) {
  return [&m, obj, cap](const Eigen::MatrixXd& frame, const Eigen::VectorXd&, Eigen::MatrixXd* gf,
                        Eigen::VectorXd*) -> double {
    const bool with_grad = gf != nullptr;
    const auto cg = components(m, frame, with_grad);
    const Params p = inner_params(obj, cg.c, cap);
    const auto co = coefficients(obj, p.l, p.mu);
    const double denom = obj == Objective::Ratio ? 1.0 - p.l * p.l : 1.0;
    if (with_grad) {
      gf->setZero();
      for (int t = 0; t < 5; ++t) *gf += (co.c[t] / denom) * cg.grad[t];
    }
    return dot5(co.c, cg.c) / denom;
  };
}

const Box kNoBox{Eigen::VectorXd(0), Eigen::VectorXd(0)};

StiefelPoint to_point(const FrameConfig& cfg) { return {cfg.frame, Eigen::VectorXd(0)}; }

FrameConfig to_config(const Eigen::MatrixXd& m, const Eigen::MatrixXd& frame, Objective obj, double cap = 1.0) {
  const Params p = inner_params(obj, components(m, frame, false).c, cap);
  return {frame, p.l, p.mu};
}

MultiStartOptions options_from(const SearchBudget& budget, std::uint64_t salt) {
  MultiStartOptions o;
  o.restarts = budget.restarts;
  o.seed = derive_seed(budget.seed, salt);
  o.descent.max_iterations = budget.iterations;
  o.descent.grad_tol = std::max(budget.grad_tol, budget.coarse_grad_tol);
  o.polish.grad_tol = budget.grad_tol;
  return o;
}

void require_cone_dim(int n) {
  if (n < 4) throw Error(ErrorCode::InvalidArgument, "isotropic curvature needs n >= 4");
}

Eigen::MatrixXd coordinate_frame(int n) { return Eigen::MatrixXd::Identity(4, n); }

}  // namespace

FrameComponents pulled_components(const Curvature& r, const Eigen::MatrixXd& frame) {
  if (frame.rows() != 4 || frame.cols() != r.dim()) {
    throw Error(ErrorCode::DimMismatch, "frame must be 4 x n");
  }
  return components(r.operator_matrix(), frame, false).c;
}

double isotropic_combination(const FrameComponents& c, ConeMode mode, double lambda, double mu) {
  lambda = std::clamp(lambda, 0.0, 1.0);
  mu = std::clamp(mu, 0.0, 1.0);
  return dot5(coefficients(objective_for(mode), lambda, mu).c, c);
}

double isotropic_value(const Curvature& r, const FrameConfig& cfg, ConeMode mode) {
  if (cfg.frame.rows() != 4 || cfg.frame.cols() != r.dim()) {
    throw Error(ErrorCode::DimMismatch, "frame must be 4 x n");
  }
  if (orthonormality_defect(cfg.frame) > 1e-12) {
    throw Error(ErrorCode::NonOrthonormalFrame, "frame rows are not orthonormal");
  }
  return isotropic_combination(pulled_components(r, cfg.frame), mode, cfg.lambda, cfg.mu);
}

MembershipReport cone_margin(const Curvature& r, ConeMode mode, const SearchBudget& budget,
                             std::span<const FrameConfig> warm_starts) {
  const int n = r.dim();
  require_cone_dim(n);
  MembershipReport rep;
  rep.mode = mode;
  const Objective obj = objective_for(mode);

  std::vector<StiefelPoint> warm;
  for (const auto& w : warm_starts) warm.push_back(to_point(w));
  std::optional<double> oracle_value;
  if (budget.oracle_samples > 0) {
    auto oracle = oracle_search(r, mode, budget.oracle_samples, budget.seed);
    oracle_value = oracle.value;
    warm.push_back(to_point(oracle.best));
  }

  const double scale = tensor_norm(r);
  if (scale == 0.0) {
    rep.witness = warm.empty() ? FrameConfig{coordinate_frame(n), mode == ConeMode::PIC ? 1.0 : 0.0,
                                             mode == ConeMode::PIC2 ? 0.0 : 1.0}
                               : to_config(r.operator_matrix(), warm.front().frame, obj);
    rep.margin = 0.0;
    if (oracle_value) rep.oracle_gap = *oracle_value;
    return rep;
  }
  const Eigen::MatrixXd m = r.operator_matrix() / scale;
  const auto res = multistart_minimize(make_objective(m, obj), 4, n, kNoBox,
                                       options_from(budget, static_cast<std::uint64_t>(mode)), warm);
  rep.witness = to_config(m, res.best.frame, obj);
  rep.margin = isotropic_value(r, rep.witness, mode);
  rep.restarts_used = res.restarts_used;
  rep.refinement_iterations = res.total_iterations;
  rep.converged = res.converged;
  if (oracle_value) rep.oracle_gap = *oracle_value - rep.margin;
  return rep;
}

std::array<MembershipReport, 3> cone_margins(const Curvature& r, const SearchBudget& budget) {
  std::array<MembershipReport, 3> out;
  out[0] = cone_margin(r, ConeMode::PIC, budget);
  for (int k = 1; k < 3; ++k) {
    const ConeMode mode = k == 1 ? ConeMode::PIC1 : ConeMode::PIC2;
    const FrameConfig& prev = out[k - 1].witness;
    out[k] = cone_margin(r, mode, budget, std::span<const FrameConfig>(&prev, 1));
    // mu = 1 embeds the previous functional into this one
    const FrameConfig embedded{prev.frame, prev.lambda, 1.0};
    const double value = isotropic_value(r, embedded, mode);
    if (value < out[k].margin) {
      if (out[k].oracle_gap) *out[k].oracle_gap += out[k].margin - value;
      out[k].margin = value;
      out[k].witness = embedded;
    }
  }
  return out;
}

MembershipReport uniform_pic_margin(const Curvature& r, double theta, const SearchBudget& budget) {
  if (!(theta > 0.0)) throw Error(ErrorCode::InvalidArgument, "theta must be positive");
  const Curvature shifted = r - (theta * scalar(r)) * identity_operator(r.dim());
  return cone_margin(shifted, ConeMode::PIC, budget);
}

double ric_two_smallest(const SymForm& ric) {
  if (ric.dim() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two eigenvalues");
  const auto ev = ric.eigenvalues();
  return ev(0) + ev(1);
}

double lambda_tilde(const Curvature& r, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::NonpositiveEps, "eps must be positive");
  require_cone_dim(r.dim());
  const double norm = tensor_norm(r);
  if (norm == 0.0) return 0.0;
  const double lt = std::max(0.0, 1.0 - eps / (6.0 * norm));

  std::mt19937_64 rng(derive_seed(0x7117DEULL, static_cast<std::uint64_t>(r.dim())));
  for (int s = 0; s < 64; ++s) {
    const auto c = pulled_components(r, random_frame(4, r.dim(), rng));
    for (int k = 1; k <= 16; ++k) {
      const double l = lt + (1.0 - lt) * k / 16.0;
      if (!(isotropic_combination(c, ConeMode::PIC1, l, 1.0) > 0.0)) {
        throw Error(ErrorCode::PreconditionFailed,
                    "PIC1 functional not positive above lambda_tilde; eps exceeds the PIC margin");
      }
    }
  }
  return lt;
}

double max_frame_ricci_gap(const Curvature& r, const SearchBudget& budget) {
  const int n = r.dim();
  const double scale = tensor_norm(r);
  if (scale == 0.0) return 0.0;
  const Eigen::MatrixXd m = r.operator_matrix() / scale;
  const Eigen::MatrixXd ric = ricci(r).matrix() / scale;
  StiefelObjective f = [&](const Eigen::MatrixXd& frame, const Eigen::VectorXd&, Eigen::MatrixXd* gf,
                           Eigen::VectorXd*) -> double {
    const Eigen::VectorXd e1 = frame.row(0).transpose(), e2 = frame.row(1).transpose();
    const Eigen::VectorXd w12 = wedge(e1, e2, n);
    const Eigen::VectorXd u12 = m * w12;
    const double gap = e1.dot(ric * e1) + e2.dot(ric * e2) - 2.0 * w12.dot(u12);
    if (gf != nullptr) {
      gf->row(0) = -(2.0 * ric * e1 - 4.0 * antisym_apply(u12, e2, n)).transpose();
      gf->row(1) = -(2.0 * ric * e2 + 4.0 * antisym_apply(u12, e1, n)).transpose();
    }
    return -gap;
  };
  const auto res = multistart_minimize(f, 2, n, kNoBox, options_from(budget, 0xF2));
  return -res.value * scale;
}

P1Result p1(const Curvature& r, const SearchBudget& budget) {
  const int n = r.dim();
  require_cone_dim(n);
  P1Result out;
  const double scal = scalar(r);
  const auto pic = cone_margin(r, ConeMode::PIC, budget);
  if (classify_margin(pic.margin, scal, budget) != Verdict::Interior) {
    throw Error(ErrorCode::NotStrictlyPIC, "PIC margin " + std::to_string(pic.margin) + " is not positive");
  }
  out.pic_margin = pic.margin;
  out.lambda_tilde = lambda_tilde(r, pic.margin);
  out.lambda_cap = std::min(out.lambda_tilde, 1.0 - 1e-9);

  const double scale = tensor_norm(r);
  const Eigen::MatrixXd m = r.operator_matrix() / scale;
  const auto res = multistart_minimize(make_objective(m, Objective::Ratio, out.lambda_cap), 4, n,
                                       kNoBox, options_from(budget, 0xB1));
  out.witness = to_config(m, res.best.frame, Objective::Ratio, out.lambda_cap);
  out.witness.mu = 1.0;
  out.restarts_used = res.restarts_used + pic.restarts_used;
  out.refinement_iterations = res.total_iterations + pic.refinement_iterations;
  out.converged = res.converged && pic.converged;

  const double l = out.witness.lambda;
  const auto c = pulled_components(r, out.witness.frame);
  out.infimum = isotropic_combination(c, ConeMode::PIC1, l, 1.0) / (1.0 - l * l);
  out.value = std::min(0.0, out.infimum);

  const Eigen::VectorXd e1 = out.witness.frame.row(0).transpose(), e2 = out.witness.frame.row(1).transpose();
  const Eigen::VectorXd w12 = wedge(e1, e2, n);
  const auto ric = ricci(r).matrix();
  const double gap_w = e1.dot(ric * e1) + e2.dot(ric * e2) - 2.0 * w12.dot(r.operator_matrix() * w12);
  if (n > 4) {
    out.lower_bound = -max_frame_ricci_gap(r, budget) / (n - 4);
    out.witness_lower_bound = -gap_w / (n - 4);
  } else {
    out.lower_bound = -std::numeric_limits<double>::infinity();
    out.witness_lower_bound = out.lower_bound;
  }

  const double cc = -out.value;
  out.interior = out.value < 0.0 && l > 1e-7 && l < out.lambda_cap - 1e-7;
  out.stationarity_lambda = l * c.r1414 + l * c.r2424 - c.r1234 - cc * l;
  out.stationarity_value = c.r1313 + c.r2323 - l * c.r1234 + cc;
  return out;
}

namespace {

// sum_i a_i sum_j b_j sum_k c_k sum_l d_l R_ijkl over the full component array
double contract(const std::vector<double>& full, int n, const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                const Eigen::VectorXd& c, const Eigen::VectorXd& d) {
  double total = 0.0;
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i) {
    double si = 0.0;
    for (int j = 0; j < n; ++j) {
      double sj = 0.0;
      for (int k = 0; k < n; ++k) {
        double sk = 0.0;
        for (int l = 0; l < n; ++l) sk += full[idx++] * d(l);
        sj += sk * c(k);
      }
      si += sj * b(j);
    }
    total += si * a(i);
  }
  return total;
}

struct GridMin {
  double value;
  double lambda;
  double mu;
};

GridMin grid_minimum(const FrameComponents& c, ConeMode mode) {
  GridMin best{std::numeric_limits<double>::infinity(), 1.0, 1.0};
  if (mode == ConeMode::PIC) {
    best.value = isotropic_combination(c, mode, 1.0, 1.0);
    return best;
  }
  if (mode == ConeMode::PIC1) {
    for (int a = 0; a <= 64; ++a) {
      const double l = a / 64.0;
      const double v = isotropic_combination(c, mode, l, 1.0);
      if (v < best.value) best = {v, l, 1.0};
    }
    return best;
  }
  for (int a = 0; a <= 32; ++a)
    for (int b = 0; b <= 32; ++b) {
      const double l = a / 32.0, mu = b / 32.0;
      const double v = isotropic_combination(c, mode, l, mu);
      if (v < best.value) best = {v, l, mu};
    }
  return best;
}

}  // namespace

OracleResult oracle_search(const Curvature& r, ConeMode mode, long samples, std::uint64_t seed) {
  const int n = r.dim();
  require_cone_dim(n);
  if (samples < 1) throw Error(ErrorCode::InvalidArgument, "oracle needs at least one sample");
  const auto full = full_components(r);
  auto at = [&](int i, int j, int k, int l) {
    return full[((static_cast<std::size_t>(i) * n + j) * n + k) * n + l];
  };

  OracleResult out;
  out.value = std::numeric_limits<double>::infinity();
  auto offer = [&](const FrameComponents& c, const Eigen::MatrixXd& frame) {
    const GridMin g = grid_minimum(c, mode);
    if (g.value < out.value) {
      out.value = g.value;
      out.best = {frame, g.lambda, g.mu};
    }
  };

  // coordinate frames
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          if (a == b || a == c || a == d || b == c || b == d || c == d) continue;
          for (double sign : {1.0, -1.0}) {
            const FrameComponents comp{at(a, c, a, c), at(a, d, a, d), at(b, c, b, c), at(b, d, b, d),
                                       sign * at(a, b, c, d)};
            if (grid_minimum(comp, mode).value < out.value) {
              Eigen::MatrixXd f = Eigen::MatrixXd::Zero(4, n);
              f(0, a) = 1.0;
              f(1, b) = 1.0;
              f(2, c) = 1.0;
              f(3, d) = sign;
              offer(comp, f);
            }
          }
        }

  std::mt19937_64 rng(seed);
  for (long s = 0; s < samples; ++s) {
    const Eigen::MatrixXd f = random_frame(4, n, rng);
    const Eigen::VectorXd e1 = f.row(0).transpose(), e2 = f.row(1).transpose();
    const Eigen::VectorXd e3 = f.row(2).transpose(), e4 = f.row(3).transpose();
    const FrameComponents comp{contract(full, n, e1, e3, e1, e3), contract(full, n, e1, e4, e1, e4),
                               contract(full, n, e2, e3, e2, e3), contract(full, n, e2, e4, e2, e4),
                               contract(full, n, e1, e2, e3, e4)};
    offer(comp, f);
  }
  return out;
}

}  // namespace icclab
