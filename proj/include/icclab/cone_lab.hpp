#pragma once

// Pinching-cone probes: the pulled-back cone E(b), the admissible-b search,
// the lift of a tensor by a constant normal block and the stress check of the
// Q(R) inequality at p1 minimizers.
//
// For b >= 0 and S = l_{a(b),b}^{-1}(R), R lies in C(b) when
//   (i)   S - (theta/2) scal(S) I is weakly PIC
//   (ii)  Ric(S)_11 + Ric(S)_22 >= 0 for every orthonormal 2-frame
//   (iii) Ric(S)_22 - Ric(S)_11 <= sqrt(omega theta (n-2)) scal(S) for every
//         orthonormal 2-frame; the left side is maximized by the spectral
//         spread lambda_max - lambda_min.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "icclab/curvature.hpp"
#include "icclab/frame_search.hpp"
#include "icclab/transform.hpp"

namespace icclab {

struct ConeSpec {
  enum class Kind { PIC, PIC1, PIC2, UniformPIC, EbPullback };
  Kind kind = Kind::PIC;
  double theta = 0.0;
  double b = 0.0;
  double a = 0.0;
  double omega = 0.0;
  bool derived = false;  // a = a_of_b(b, n)

  static ConeSpec pic() { return {Kind::PIC}; }
  static ConeSpec pic1() { return {Kind::PIC1}; }
  static ConeSpec pic2() { return {Kind::PIC2}; }
  static ConeSpec uniform_pic(double theta);
  /// a is derived from b at evaluation time.
  static ConeSpec eb_pullback(double theta, double b, double omega);
  static ConeSpec eb_pullback(double theta, double b, double a, double omega);
};

/// Throws InvalidArgument unless theta > 0 (where present), b >= 0, omega > 0
/// and a matches a_of_b(b, n) when derived.
void validate(const ConeSpec& spec, int n);

/// Column label, e.g. "PIC2", "UniformPIC(theta=0.01)".
std::string to_string(const ConeSpec& spec);

/// Parses "PIC", "PIC1", "PIC2", "UniformPIC:<theta>" or "Eb:<theta>:<b>:<omega>".
ConeSpec cone_spec_from_string(const std::string& s);

struct EbReport {
  double theta = 0.0;
  double omega = 0.0;
  double scal = 0.0;
  bool cond_i = false;
  bool cond_ii = false;
  bool cond_iii = false;
  double margin_i = 0.0;       // PIC margin of S - (theta/2) scal(S) I
  double margin_ii = 0.0;      // lambda_1 + lambda_2 of Ric(S)
  double spread = 0.0;         // lambda_max - lambda_min of Ric(S)
  double sampled_spread = 0.0; // max over 2-frames of Ric22 - Ric11
  double bound = 0.0;          // sqrt(omega theta (n-2)) scal(S)
  double margin_iii = 0.0;     // bound - spread
  double ricci_ratio = 0.0;    // (lambda_1 + lambda_2) / scal
  FrameConfig witness_i;

  bool passes() const { return cond_i && cond_ii && cond_iii; }
  /// Smallest of the three margins; nonnegative within tolerance iff passes().
  double margin() const;
};

/// Throws NonpositiveScal if scal(S) <= 0.
EbReport eb_check(const Curvature& s, double theta, double omega, const SearchBudget& budget);

struct SpecMargin {
  double margin = 0.0;
  FrameConfig witness;  // EbPullback: witness of condition (i)
  bool converged = true;
};

/// Margin of R with respect to a cone specification. For EbPullback this is
/// EbReport::margin() of l_{a,b}^{-1}(R).
SpecMargin cone_spec_margin(const Curvature& r, const ConeSpec& spec, const SearchBudget& budget,
                            std::span<const FrameConfig> warm_starts = {});

struct OmegaSchedule {
  enum class Kind { Inverse, InverseSqrt, Constant };
  Kind kind = Kind::Inverse;
  double scale = 1.0;
  double operator()(double b) const;
};

/// "inverse[:k]" (k/b), "inverse_sqrt[:k]" (k/sqrt(b)) or "constant:k".
OmegaSchedule omega_schedule_from_string(const std::string& s);
std::string to_string(const OmegaSchedule& w);

std::vector<double> default_b_grid();

struct PipelineRow {
  double b = 0.0;
  double a = 0.0;
  double omega = 0.0;
  EbReport eb;
};

struct PipelineReport {
  double theta = 0.0;
  double uniform_margin = 0.0;    // PIC margin of R - theta scal(R) I
  double ric_two_smallest = 0.0;  // of Ric(R)
  double ricci_ratio = 0.0;       // (lambda_1 + lambda_2) / scal
  std::vector<PipelineRow> rows;  // one per grid value tried, in grid order
  std::optional<double> admissible_b;  // empty: NoAdmissibleB
};

/// Walks the grid in descending order and stops at the first b whose
/// S = l_{a(b),b}^{-1}(R) passes eb_check with omega(b). Throws
/// PreconditionFailed unless scal(R) > 0, R is uniformly PIC at theta and the
/// two smallest Ricci eigenvalues sum to a nonnegative number.
PipelineReport theorem11_pipeline(const Curvature& r, double theta, const OmegaSchedule& omega,
                                  std::vector<double> b_grid, const SearchBudget& budget);

/// Largest theta with R - theta scal(R) I weakly PIC: PIC margin / (4 scal).
double uniform_pic_critical_theta(const Curvature& r, const SearchBudget& budget);

/// (n+1)-dimensional tensor with the new direction last: T_ijkl = R_ijkl,
/// T_ijk0 = 0, T_i0k0 = (c/2) delta_ik.
Curvature lift_with_constant(const Curvature& r, double c);

struct Lemma31Report {
  bool applicable = false;  // false: p1 >= 0, NotApplicable
  P1Result p1;
  double c = 0.0;            // -p1
  double lambda = 0.0;
  double q_combination = 0.0;  // Q1313 + l^2 Q1414 + Q2323 + l^2 Q2424 - 2 l Q1234
  double ricci_sum = 0.0;      // Ric11 + Ric22
  double slack = 0.0;          // q_combination + c (1 - l^2) ricci_sum
  double slack_tolerance = 0.0;  // 1e-8 (1 + |R|^2)
  double lifted_frame_value = 0.0;  // PIC functional of T at {e1, e2, e3, l e4 + sqrt(1 - l^2) e0}
  double lifted_margin = 0.0;       // PIC margin of T
  bool lifted_weakly_pic = false;
  bool stationary = false;          // both first-order relations within 1e-6 (1 + |R|)
  bool ok = false;                  // slack within tolerance and lift checks passed
};

Lemma31Report lemma31_stress(const Curvature& r, const SearchBudget& budget);

}  // namespace icclab
