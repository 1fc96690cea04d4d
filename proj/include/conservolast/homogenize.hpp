#pragma once

#include <optional>
#include <string>
#include <vector>

#include "conservolast/fit.hpp"
#include "conservolast/static_solver.hpp"
#include "conservolast/tile.hpp"

namespace conservolast {

/// F = Rot(theta) diag(lambda1, lambda2) Rot(theta)^T.
struct MacroDeformation {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double theta = 0.0;

  Mat2 gradient() const;
  VoigtStrain strain() const;
};

/// d E / d lambda2 and d^2 E / d lambda2^2 (Voigt) for a stretch deformation.
void strain_lambda2_derivatives(const MacroDeformation& m, VoigtStrain& d1, VoigtStrain& d2);

struct EquilibriumState {
  Mat2 macro_f = Mat2::Identity();
  Eigen::VectorXd reduced;          // displacement dofs of the independent nodes
  std::vector<Vec2> displacements;  // per mesh node; periodic
  double energy_density = 0.0;
  double gradient_norm = 0.0;
  bool converged = false;
  int newton_iters = 0;
};

struct OrthogonalStretch {
  double lambda2 = 1.0;
  EquilibriumState state;
  int evaluations = 0;
};

struct SamplingGrid {
  double lambda1_lo = 0.9;
  double lambda1_hi = 2.0;
  int n_lambda1 = 12;
  int n_theta = 12;  // theta_k = k pi / n_theta
  double lambda2_offset = 0.05;

  std::vector<double> lambda1_values() const;
  std::vector<double> theta_values() const;
};

struct GenerationResult {
  std::vector<TrainingSample> samples;
  std::vector<std::string> log;
};

/// Periodic homogenization of one tile. Node positions are x = F X + u with
/// u periodic and the first independent node pinned.
class Homogenizer {
 public:
  explicit Homogenizer(const Tile& tile);
  Homogenizer(Tile&&) = delete;  // keeps a reference to the tile

  const Tile& tile() const { return *tile_; }
  double stiffness_scale() const { return tile_->mesh.stiffness_scale(); }
  double gradient_tolerance() const;

  EquilibriumState equilibrate(const Mat2& macro_f, const EquilibriumState* warm = nullptr) const;
  EquilibriumState equilibrate(const MacroDeformation& macro, const EquilibriumState* warm = nullptr) const {
    return equilibrate(macro.gradient(), warm);
  }
  /// Equilibrium under the symmetric stretch whose Green strain is e.
  EquilibriumState equilibrate(const VoigtStrain& e, const EquilibriumState* warm = nullptr) const;

  /// Homogenized energy at fixed u (no re-equilibration).
  double energy(const EquilibriumState& state) const;
  /// dPsi*/dE at a converged state. Throws NonConverged otherwise.
  StressVector stress(const EquilibriumState& state) const;
  /// Schur-complement tangent Psi_EE - Psi_Eu H^-1 Psi_uE. Throws
  /// SingularReducedHessian when H is not positive definite.
  StiffnessMatrix stiffness(const EquilibriumState& state) const;
  /// Both of the above in one assembly pass.
  void response(const EquilibriumState& state, StressVector& s, StiffnessMatrix& k) const;

  /// lambda2 with dPsi*/dlambda2 = 0 on [0.3, 2.5].
  OrthogonalStretch orthogonal_stretch_search(double lambda1, double theta, double lambda2_guess = 1.0,
                                              const EquilibriumState* warm = nullptr) const;

  /// Directional-stretch protocol: for every (lambda1, theta) find lambda2*
  /// and emit samples at lambda2* and lambda2* -/+ offset. Failures are
  /// logged and skipped.
  GenerationResult generate_training_data(const SamplingGrid& grid) const;

 private:
  DofMap dof_map(const Mat2& macro_f) const;
  void check_state(const EquilibriumState& state) const;

  const Tile* tile_;
  std::vector<int> node_dof_;
  int n_dof_nodes_ = 0;
  ElasticSystem system_;
};

}  // namespace conservolast
