#pragma once

// Closed-form normalized shrinking gradient Ricci solitons evaluated in an
// orthonormal frame at a point: the Gaussian on R^n, the round sphere with
// Ric = g/2 and the cylinder S^{n-1} x R with the sphere factor normalized the
// same way. The cylinder axis is the last coordinate.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "icclab/curvature.hpp"
#include "icclab/frame_search.hpp"

namespace icclab {

struct SolitonModel {
  enum class Kind { Gaussian, RoundSphere, Cylinder };
  Kind kind = Kind::Gaussian;
  int n = 0;

  static SolitonModel gaussian(int n);
  static SolitonModel round_sphere(int n);
  static SolitonModel cylinder(int n);

  /// Length of the point parameter: n, 0 or 1 (the axial coordinate s).
  int parameter_size() const;
};

std::string to_string(SolitonModel::Kind k);
SolitonModel::Kind soliton_kind_from_string(const std::string& s);

struct PointData {
  Curvature curvature;
  SymmetricForm<double> ricci;
  double scal = 0.0;
  Eigen::VectorXd grad_scal;  // zero on all three models
  double f = 0.0;
  Eigen::VectorXd grad_f;
  double grad_f_sq = 0.0;
  Eigen::MatrixXd hessian_f;
  std::vector<double> hessian_f_eigs;  // ascending
  double laplacian_f = 0.0;
};

/// Throws InvalidArgument when the parameter length does not match.
PointData model_point(const SolitonModel& model, const Eigen::VectorXd& param);

/// Deterministic sample parameters: Gaussian positions with N(0, 9)
/// coordinates, axial coordinates uniform on [-10, 10], empty for the sphere.
std::vector<Eigen::VectorXd> sample_parameters(const SolitonModel& model, int count, std::uint64_t seed);

struct Residual {
  std::string name;
  double value = 0.0;
};

/// soliton_equation: max |Ric + Hess f - g/2|; trace: scal + Lap f - n/2;
/// ricci_gradient: max |Ric(grad f) - grad scal / 2|;
/// normalization_gradient: max |grad scal + 2 Hess f grad f - grad f|;
/// normalization: scal + |grad f|^2 - f.
std::vector<Residual> check_soliton_identities(const SolitonModel& model, const Eigen::VectorXd& param);

/// With parallel curvature the f-Laplacians vanish, leaving
/// curvature: |R - Q(R)|; ricci: max |Ric - 2 R*Ric|; scal: scal - 2 |Ric|^2.
std::vector<Residual> check_elliptic_identities(const SolitonModel& model, const Eigen::VectorXd& param);

double max_abs_residual(const std::vector<Residual>& table);

struct HypothesisReport {
  double hessian_two_smallest = 0.0;
  bool hessian_two_nonnegative = false;
  double pic_margin = 0.0;
  Verdict pic_verdict = Verdict::Outside;
  bool strictly_pic = false;
  double pic1_margin = 0.0;
  Verdict pic1_verdict = Verdict::Outside;
  bool weakly_pic1 = false;
  std::optional<double> p1_value;          // present when strictly PIC
  double witness_hessian_sum = 0.0;         // Hess_11 + Hess_22 at the p1 witness
  double witness_identity_residual = 0.0;   // 1 - (Ric_11 + Ric_22) - (Hess_11 + Hess_22)
  double r_star_ric_min_eig = 0.0;          // smallest eigenvalue of R*Ric
  bool hypotheses_hold = false;
};

HypothesisReport check_theorem13_hypotheses(const SolitonModel& model, const Eigen::VectorXd& param,
                                            const SearchBudget& budget);

struct ThetaBound {
  double ratio = 0.0;  // |R| / scal
  double scal_min = 0.0;
  double scal_max = 0.0;
  bool scal_in_range = false;  // 0 <= scal <= n/2 at every sample
};

/// Throws ZeroScal for the Gaussian.
ThetaBound bound_theta(const SolitonModel& model, int samples = 100, std::uint64_t seed = 0x1CC1AB);

}  // namespace icclab
