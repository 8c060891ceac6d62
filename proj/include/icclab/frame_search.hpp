#pragma once

// Isotropic-curvature functionals over orthonormal 4-frames and their minima.
//
// For a frame {e1, e2, e3, e4} and parameters lambda, mu in [0, 1]:
//   PIC  : R1313 + R1414 + R2323 + R2424 - 2 R1234
//   PIC1 : R1313 + l^2 R1414 + R2323 + l^2 R2424 - 2 l R1234
//   PIC2 : R1313 + l^2 R1414 + m^2 R2323 + l^2 m^2 R2424 - 2 l m R1234
// The margin of a cone is the minimum of its functional; the tensor is weakly
// in the cone when the margin is nonnegative.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "icclab/curvature.hpp"

namespace icclab {

enum class ConeMode { PIC, PIC1, PIC2 };

std::string_view to_string(ConeMode mode);
ConeMode cone_mode_from_string(std::string_view s);

struct FrameConfig {
  Eigen::MatrixXd frame;  // 4 x n, orthonormal rows e1..e4
  double lambda = 1.0;
  double mu = 1.0;  // read by PIC2 only
};

/// Pulled-back components R_abcd(F) = sum F_a^i F_b^j F_c^k F_d^l R_ijkl.
struct FrameComponents {
  double r1313, r1414, r2323, r2424, r1234;
};

struct SearchBudget {
  int restarts = 64;
  int iterations = 500;
  std::uint64_t seed = 0x1CC1AB;
  double grad_tol = 1e-11;         // applied to the norm-1 rescaled tensor
  double coarse_grad_tol = 1e-3;   // first-order phase, before the Newton polish
  long oracle_samples = 0;  // > 0: seed one restart with the brute-force oracle's best sample
  double tol_weak = 1e-8;
  double tol_interior = 1e-6;
};

struct MembershipReport {
  ConeMode mode = ConeMode::PIC;
  double margin = 0.0;
  FrameConfig witness;
  int restarts_used = 0;
  int refinement_iterations = 0;
  bool converged = true;  // false flags BudgetExhaustedWithoutConvergence
  std::optional<double> oracle_gap;
};

enum class Verdict { Interior, Weak, Outside };
std::string_view to_string(Verdict v);

/// Interior: margin > tol_interior (1 + |scal|); weak: margin >= -tol_weak (1 + |scal|).
Verdict classify_margin(double margin, double scal, const SearchBudget& budget);

FrameComponents pulled_components(const Curvature& r, const Eigen::MatrixXd& frame);

/// Combines pulled-back components for the mode (lambda, mu clamped to [0,1]).
double isotropic_combination(const FrameComponents& c, ConeMode mode, double lambda, double mu);

/// Throws NonOrthonormalFrame if F F^T deviates from id_4 by more than 1e-12.
double isotropic_value(const Curvature& r, const FrameConfig& cfg, ConeMode mode);

MembershipReport cone_margin(const Curvature& r, ConeMode mode, const SearchBudget& budget,
                             std::span<const FrameConfig> warm_starts = {});

/// PIC, PIC1 and PIC2 margins, each search warm-started from the previous
/// witness; the reports satisfy PIC2 <= PIC1 <= PIC exactly.
std::array<MembershipReport, 3> cone_margins(const Curvature& r, const SearchBudget& budget);

/// PIC margin of R - theta scal(R) I.
MembershipReport uniform_pic_margin(const Curvature& r, double theta, const SearchBudget& budget);

/// Sum of the two smallest eigenvalues.
double ric_two_smallest(const SymForm& ric);

/// max(0, 1 - eps / (6 |R|)). For lambda in (result, 1) the PIC1 functional is
/// positive whenever eps is at most the PIC margin; this is re-checked on a
/// seeded sample of frames and throws PreconditionFailed if it fails.
double lambda_tilde(const Curvature& r, double eps);

struct P1Result {
  double value = 0.0;           // min{0, infimum of the ratio}
  double infimum = 0.0;         // minimum of Z / (1 - l^2) found over l in [0, lambda_cap]
  FrameConfig witness;          // mu unused
  double pic_margin = 0.0;      // eps
  double lambda_tilde = 0.0;
  double lambda_cap = 0.0;      // min(lambda_tilde, 1 - 1e-9)
  double lower_bound = 0.0;     // -(1/(n-4)) max_frames(Ric11 + Ric22 - 2 R1212); -inf when n = 4
  double witness_lower_bound = 0.0;  // the same expression evaluated at the witness 2-frame
  bool interior = false;        // lambda strictly inside (0, lambda_cap) and value < 0
  double stationarity_lambda = 0.0;  // l R1414 + l R2424 - R1234 - c l
  double stationarity_value = 0.0;   // R1313 + R2323 - l R1234 + c
  int restarts_used = 0;
  int refinement_iterations = 0;
  bool converged = true;
};

/// p1 = min{0, inf over frames and l in [0,1) of Z / (1 - l^2)}. Requires a
/// strictly PIC tensor (throws NotStrictlyPIC otherwise).
P1Result p1(const Curvature& r, const SearchBudget& budget);

/// max over orthonormal 2-frames of Ric11 + Ric22 - 2 R1212.
double max_frame_ricci_gap(const Curvature& r, const SearchBudget& budget);

struct OracleResult {
  double value = 0.0;
  FrameConfig best;
};

/// Brute-force upper bound on the margin: coordinate 4-frames (both
/// orientations of e4) plus `samples` Gaussian frames orthonormalized by
/// Gram-Schmidt, each on a dense lambda (and mu) grid. Components are
/// contracted directly from the n^4 array, independent of the descent path.
OracleResult oracle_search(const Curvature& r, ConeMode mode, long samples, std::uint64_t seed);

inline double oracle_margin(const Curvature& r, ConeMode mode, long samples, std::uint64_t seed) {
  return oracle_search(r, mode, samples, seed).value;
}

}  // namespace icclab
