#pragma once

// Projected-gradient descent on (orthonormal k-frames in R^n) x (box in R^m).
//
// Frames are stored row-wise: a k x n matrix F with F F^T = id_k. The
// Euclidean gradient is projected onto the tangent space of the Stiefel set,
// a step is taken, and the result is pulled back by the polar retraction.
// Box parameters are clamped after each step. Step lengths come from a
// Barzilai-Borwein guess safeguarded by Armijo backtracking.
//
// Multistart runs the first-order descent to a coarse tolerance from every
// start, then polishes the best few candidates with a Newton iteration in a
// Cayley chart F0 cay(X), X skew n x n, whose Hessian is assembled from
// central differences of the analytic gradient.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace icclab {

struct StiefelPoint {
  Eigen::MatrixXd frame;   // k x n, orthonormal rows
  Eigen::VectorXd params;  // box variables
};

struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
  Eigen::Index size() const { return lo.size(); }
  Eigen::VectorXd clamp(const Eigen::VectorXd& p) const { return p.cwiseMax(lo).cwiseMin(hi); }
};

/// Returns f(frame, params). When the gradient pointers are non-null the
/// Euclidean gradients must be written to them.
using StiefelObjective = std::function<double(const Eigen::MatrixXd& frame, const Eigen::VectorXd& params,
                                              Eigen::MatrixXd* grad_frame, Eigen::VectorXd* grad_params)>;

struct DescentOptions {
  int max_iterations = 500;
  double grad_tol = 1e-11;
  double armijo = 1e-4;
};

struct PolishOptions {
  int max_iterations = 40;
  double grad_tol = 1e-11;
  double fd_step = 1e-5;
};

struct DescentResult {
  StiefelPoint point;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct MultiStartOptions {
  int restarts = 64;
  std::uint64_t seed = 0;
  DescentOptions descent;     // grad_tol here is the coarse first-phase tolerance
  PolishOptions polish;
  int polish_candidates = 8;  // distinct best first-phase results passed to the polish
};

struct MultiStartResult {
  StiefelPoint best;
  double value = 0.0;
  int restarts_used = 0;
  int total_iterations = 0;
  bool converged = false;  // the winning descent stabilized
};

/// Polar retraction (Y Y^T)^{-1/2} Y.
Eigen::MatrixXd orthonormalize_rows(const Eigen::MatrixXd& y);

/// Max |F F^T - id|.
double orthonormality_defect(const Eigen::MatrixXd& frame);

/// Rows of an orthonormalized Gaussian k x n array (Gram-Schmidt order).
Eigen::MatrixXd random_frame(int k, int n, std::mt19937_64& rng);

/// Deterministic per-restart stream derived from a base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

DescentResult stiefel_descent(const StiefelObjective& f, StiefelPoint start, const Box& box,
                              const DescentOptions& opts);

/// Projected Riemannian gradient norm at a point.
double stiefel_gradient_norm(const StiefelObjective& f, const StiefelPoint& x, const Box& box);

/// Newton refinement; never returns a point worse than the start.
DescentResult stiefel_newton_polish(const StiefelObjective& f, StiefelPoint start, const Box& box,
                                    const PolishOptions& opts);

/// Runs one descent from every warm start, then `restarts` descents from
/// seeded random points, polishes the best candidates and returns the best.
/// Ties resolve to the earliest start.
MultiStartResult multistart_minimize(const StiefelObjective& f, int k, int n, const Box& box,
                                     const MultiStartOptions& opts,
                                     std::span<const StiefelPoint> warm_starts = {});

}  // namespace icclab
