#pragma once

// The reaction ODE dR/dt = Q(R) on curvature operators, integrated with the
// Dormand-Prince 5(4) pair under mixed absolute/relative error control. Each
// accepted state is projected back onto the Bianchi subspace and its cone
// margins are recorded.

#include <ostream>
#include <string>
#include <vector>

#include "icclab/cone_lab.hpp"
#include "icclab/curvature.hpp"
#include "icclab/frame_search.hpp"

namespace icclab {

enum class FlowStatus { Completed, BlowUpReached };
std::string_view to_string(FlowStatus s);

struct FlowOptions {
  double t_end = 0.0;
  double tol = 1e-10;           // absolute and relative component tolerance
  double scal_limit = 1e12;     // BlowUpReached once |scal| exceeds this
  double min_step = 1e-14;      // BlowUpReached once the step falls below this
  long max_steps = 1000000;
};

struct FlowTrajectory {
  std::vector<double> times;
  std::vector<Curvature> states;
  std::vector<ConeSpec> cones;
  std::vector<std::vector<double>> margins;  // margins[step][cone]
  long accepted = 0;
  long rejected = 0;
  FlowStatus status = FlowStatus::Completed;
  std::string stop_reason;
  double max_bianchi_drift = 0.0;  // largest residual before re-projection, relative to |R|
  bool margins_converged = true;
};

FlowTrajectory hamilton_flow(const Curvature& r0, const FlowOptions& opts, const std::vector<ConeSpec>& cones,
                             const SearchBudget& budget);

/// Columns t, scal, one per cone; one row per recorded state.
void write_csv(std::ostream& os, const FlowTrajectory& traj);

struct ProbeResult {
  double margin = 0.0;        // margin at R
  double h = 0.0;
  double quotient_h = 0.0;    // (margin(R + h Q) - margin(R)) / h
  double quotient_h2 = 0.0;   // the same with h / 2
  double value = 0.0;         // Richardson extrapolation 2 D(h/2) - D(h)
  bool stable = false;        // D(h) and D(h/2) within 5% (or both negligible)
};

/// Directional derivative of the cone margin along Q(R). Throws
/// NotNearBoundary when |margin(R)| > 1e-3 (1 + |scal|).
ProbeResult invariance_probe(const Curvature& r, const ConeSpec& cone, double h, const SearchBudget& budget);

}  // namespace icclab
