#pragma once

#include <span>
#include <vector>

#include "conservolast/kernels.hpp"
#include "conservolast/types.hpp"

namespace conservolast {

/// Green strain of a 2D deformation gradient, in Voigt form.
VoigtStrain green_strain(const DeformationGradient& f);

/// Conservative RBF elastic energy
///
///   Psi(E) = s_O . E + 1/2 E^T K_O E
///          + sum_i phi_i w_i . dE_i + sum_i phi_i dE_i^T W_i dE_i,   dE_i = E - E_i
///
/// Gradient interpolants (w_i) and Hessian interpolants (W_i) share the kernel
/// and the center list. Either coefficient list may be empty; when present it
/// has one entry per center. W_i and K_O are kept symmetric.
struct EnergyModel {
  Kernel kernel{KernelFamily::Multiquadric, 1.0};
  std::vector<VoigtStrain> centers;
  std::vector<Vec3> grad_coeffs;
  std::vector<Mat3> hess_coeffs;
  StressVector stress_offset = StressVector::Zero();
  StiffnessMatrix stiffness_offset = StiffnessMatrix::Zero();
  // Additive constant used only for reporting; does not enter stress/stiffness.
  double energy_shift = 0.0;

  /// Throws InputError if coefficient counts or symmetry are inconsistent.
  void check() const;
  bool has_grad_interpolants() const { return !grad_coeffs.empty(); }
  bool has_hess_interpolants() const { return !hess_coeffs.empty(); }
};

double energy(const EnergyModel& m, const VoigtStrain& e);
StressVector stress(const EnergyModel& m, const VoigtStrain& e);
StiffnessMatrix stiffness(const EnergyModel& m, const VoigtStrain& e);

/// Sets s_O so that stress(m, 0) == 0.
EnergyModel recompute_stress_offset(EnergyModel m);

/// Trapezoidal approximation of the line integral of stress along a polyline.
/// Throws InputError for fewer than three points.
double work_integral(const EnergyModel& m, std::span<const VoigtStrain> path);

// Per-interpolant derivatives, used by the model evaluators and by the
// least-squares assembly (which feeds unit coefficients through them).
namespace interp {

double grad_energy(const KernelSample& k, const Vec3& w);
Vec3 grad_stress(const KernelSample& k, const Vec3& w);
Mat3 grad_stiffness(const KernelSample& k, const Vec3& w);

double hess_energy(const KernelSample& k, const Mat3& W);
Vec3 hess_stress(const KernelSample& k, const Mat3& W);
Mat3 hess_stiffness(const KernelSample& k, const Mat3& W);

}  // namespace interp

}  // namespace conservolast
