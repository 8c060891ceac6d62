#include "icclab/flow.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>

namespace icclab {

std::string_view to_string(FlowStatus s) {
  switch (s) {
    case FlowStatus::Completed: return "completed";
    case FlowStatus::BlowUpReached: return "BlowUpReached";
  }
  return "unknown";
}

namespace {

// Dormand-Prince 5(4) tableau
constexpr std::array<double, 7> kC [[maybe_unused]]{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr std::array<double, 7> kB5{35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr std::array<double, 7> kB4{5179.0 / 57600, 0.0,         7571.0 / 16695, 393.0 / 640,
                                    -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

Eigen::MatrixXd rhs(int n, const Eigen::MatrixXd& y) {
  return q_quadratic(Curvature::from_operator(n, y, BianchiPolicy::Trust)).operator_matrix();
}

void record(FlowTrajectory& traj, double t, const Curvature& r, const SearchBudget& budget,
            std::vector<std::optional<FrameConfig>>& warm) {
  traj.times.push_back(t);
  traj.states.push_back(r);
  std::vector<double> row;
  row.reserve(traj.cones.size());
  for (std::size_t c = 0; c < traj.cones.size(); ++c) {
    std::span<const FrameConfig> ws;
    if (warm[c]) ws = std::span<const FrameConfig>(&*warm[c], 1);
    const SpecMargin m = cone_spec_margin(r, traj.cones[c], budget, ws);
    traj.margins_converged = traj.margins_converged && m.converged;
    if (m.witness.frame.size() > 0) warm[c] = m.witness;
    row.push_back(m.margin);
  }
  traj.margins.push_back(std::move(row));
}

}  // namespace

FlowTrajectory hamilton_flow(const Curvature& r0, const FlowOptions& opts, const std::vector<ConeSpec>& cones,
                             const SearchBudget& budget) {
  if (!(opts.t_end > 0.0)) throw Error(ErrorCode::InvalidArgument, "t_end must be positive");
  if (!(opts.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be positive");
  const int n = r0.dim();
  for (const auto& c : cones) validate(c, n);

  FlowTrajectory traj;
  traj.cones = cones;
  std::vector<std::optional<FrameConfig>> warm(cones.size());
  record(traj, 0.0, r0, budget, warm);

  Eigen::MatrixXd y = r0.operator_matrix();
  std::array<Eigen::MatrixXd, 7> k;
  k[0] = rhs(n, y);
  const double ynorm = y.norm(), fnorm = k[0].norm();
  double h = fnorm > 0.0 ? std::min(opts.t_end, 0.01 * std::max(ynorm, opts.tol) / fnorm) : opts.t_end;
  double t = 0.0;

  while (t < opts.t_end) {
    if (traj.accepted + traj.rejected >= opts.max_steps) {
      traj.status = FlowStatus::BlowUpReached;
      traj.stop_reason = "step limit reached";
      break;
    }
    const bool last = t + h >= opts.t_end;
    if (last) h = opts.t_end - t;

    for (int s = 1; s < 7; ++s) {
      Eigen::MatrixXd ys = y;
      for (int j = 0; j < s; ++j)
        if (kA[s][j] != 0.0) ys += (h * kA[s][j]) * k[j];
      k[s] = rhs(n, ys);
    }
    Eigen::MatrixXd y5 = y, err = Eigen::MatrixXd::Zero(y.rows(), y.cols());
    for (int s = 0; s < 7; ++s) {
      if (kB5[s] != 0.0) y5 += (h * kB5[s]) * k[s];
      err += (h * (kB5[s] - kB4[s])) * k[s];
    }
    const Eigen::ArrayXXd scale = opts.tol + opts.tol * y.array().abs().max(y5.array().abs());
    const double e = std::sqrt((err.array() / scale).square().mean());

    if (std::isfinite(e) && e <= 1.0) {
      t = last ? opts.t_end : t + h;
      const double norm = 2.0 * y5.norm();
      const double drift = bianchi_residual(n, y5);
      if (norm > 0.0) traj.max_bianchi_drift = std::max(traj.max_bianchi_drift, drift / norm);
      const Curvature state = bianchi_project(n, y5);
      y = state.operator_matrix();
      k[0] = k[6];
      if (drift > 0.0) k[0] = rhs(n, y);
      ++traj.accepted;
      record(traj, t, state, budget, warm);
      if (std::abs(scalar(state)) > opts.scal_limit) {
        traj.status = FlowStatus::BlowUpReached;
        traj.stop_reason = "scal exceeded " + std::to_string(opts.scal_limit);
        break;
      }
    } else {
      ++traj.rejected;
    }
    const double factor = std::isfinite(e) ? (e == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(e, -0.2), 0.2, 5.0)) : 0.2;
    h *= factor;
    if (t < opts.t_end && h < opts.min_step) {
      traj.status = FlowStatus::BlowUpReached;
      traj.stop_reason = "step size fell below " + std::to_string(opts.min_step);
      break;
    }
  }
  return traj;
}

void write_csv(std::ostream& os, const FlowTrajectory& traj) {
  os << "t,scal";
  for (const auto& c : traj.cones) os << ",\"" << to_string(c) << '"';
  os << '\n';
  const auto old = os.precision(17);
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    os << traj.times[i] << ',' << scalar(traj.states[i]);
    for (double m : traj.margins[i]) os << ',' << m;
    os << '\n';
  }
  os.precision(old);
}

ProbeResult invariance_probe(const Curvature& r, const ConeSpec& cone, double h, const SearchBudget& budget) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "h must be positive");
  const SpecMargin base = cone_spec_margin(r, cone, budget);
  const double scal = scalar(r);
  if (std::abs(base.margin) > 1e-3 * (1.0 + std::abs(scal))) {
    throw Error(ErrorCode::NotNearBoundary, "margin " + std::to_string(base.margin) + " is not near zero");
  }
  const Curvature q = q_quadratic(r);
  const std::span<const FrameConfig> warm(&base.witness, base.witness.frame.size() > 0 ? 1 : 0);
  auto quotient = [&](double step) {
    return (cone_spec_margin(r + step * q, cone, budget, warm).margin - base.margin) / step;
  };
  ProbeResult out;
  out.margin = base.margin;
  out.h = h;
  out.quotient_h = quotient(h);
  out.quotient_h2 = quotient(0.5 * h);
  out.value = 2.0 * out.quotient_h2 - out.quotient_h;
  const double floor = 1e-6 * (1.0 + tensor_norm(q));
  const double diff = std::abs(out.quotient_h - out.quotient_h2);
  out.stable = diff <= 0.05 * std::abs(out.quotient_h2) || diff <= floor;
  return out;
}

}  // namespace icclab
