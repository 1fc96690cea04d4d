#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "conservolast/fit.hpp"
#include "conservolast/kernels.hpp"
#include "conservolast/model.hpp"

namespace conservolast {

/// Psi = sum_i phi_i w_i with scalar coefficients.
struct EnergyInterpModel {
  Kernel kernel{KernelFamily::Multiquadric, 1.0};
  std::vector<VoigtStrain> centers;
  std::vector<double> coeffs;
};

double energy_interp_eval(const EnergyInterpModel& m, const VoigtStrain& e);
Vec3 energy_interp_grad(const EnergyInterpModel& m, const VoigtStrain& e);
Mat3 energy_interp_hess(const EnergyInterpModel& m, const VoigtStrain& e);

/// s = sum_i phi_i w_i with vector coefficients; not the gradient of any energy.
struct StressInterpModel {
  Kernel kernel{KernelFamily::Multiquadric, 1.0};
  std::vector<VoigtStrain> centers;
  std::vector<Vec3> coeffs;
};

Vec3 stress_interp_eval(const StressInterpModel& m, const VoigtStrain& e);
/// ds/dE = sum_i w_i (grad phi_i)^T; generically non-symmetric.
Mat3 stress_interp_jacobian(const StressInterpModel& m, const VoigtStrain& e);

/// Psi = sum_i 1/2 phi_i E^T W_i E with symmetric W_i.
struct MaterialInterpModel {
  Kernel kernel{KernelFamily::Multiquadric, 1.0};
  std::vector<VoigtStrain> centers;
  std::vector<Mat3> coeffs;
};

double material_interp_eval(const MaterialInterpModel& m, const VoigtStrain& e);
Vec3 material_interp_grad(const MaterialInterpModel& m, const VoigtStrain& e);
Mat3 material_interp_hess(const MaterialInterpModel& m, const VoigtStrain& e);

/// (J32 - J23, J13 - J31, J21 - J12) of a 3x3 Jacobian.
Vec3 curl_from_jacobian(const Mat3& j);

/// Central-difference Jacobian of a stress field, h = 1e-6.
Mat3 fd_jacobian(const std::function<Vec3(const VoigtStrain&)>& field, const VoigtStrain& e, double h = 1e-6);

/// A stress-producing field; jacobian may be empty, in which case curl uses FD.
struct StressField {
  std::function<Vec3(const VoigtStrain&)> stress;
  std::function<Mat3(const VoigtStrain&)> jacobian;

  static StressField of(const EnergyModel& m);
  static StressField of(const StressInterpModel& m);
  static StressField of(const EnergyInterpModel& m);
  static StressField of(const MaterialInterpModel& m);
};

Vec3 curl_of_stress(const StressField& field, const VoigtStrain& e);

/// 100 |curl| / k_rms per sample. Throws InputError if k_rms <= 0.
std::vector<double> curl_report(const StressField& field, std::span<const TrainingSample> samples, double k_rms);

enum class BaselineKind { EnergyInterp, StressInterp, MaterialInterp };
enum class TargetSet { Energy, Stress, Stiffness, StressAndStiffness };

std::string to_string(BaselineKind kind);
std::string to_string(TargetSet targets);

struct BaselineFit {
  BaselineKind kind = BaselineKind::EnergyInterp;
  EnergyInterpModel energy_model;
  StressInterpModel stress_model;
  MaterialInterpModel material_model;
  FitReport report;  // stress/stiffness errors against the samples
  double energy_error_pct = 0.0;  // only for TargetSet::Energy
  int parameter_count = 0;

  StressField field() const;
};

/// Linear least squares in the baseline coefficients with the same RMS
/// normalization as the energy model fit. Energy targets need every sample
/// to carry an energy value. Stress interpolation cannot be fitted to
/// energy targets.
BaselineFit fit_baseline(BaselineKind kind, std::span<const TrainingSample> samples,
                         std::span<const VoigtStrain> centers, const Kernel& kernel, TargetSet targets,
                         double condition_limit = 1e12);

/// fit_baseline over the radius grid (multipliers of radius_scale), keeping
/// the smallest weighted objective.
BaselineFit sweep_baseline(BaselineKind kind, std::span<const TrainingSample> samples,
                           std::span<const VoigtStrain> centers, KernelFamily family,
                           std::span<const double> radius_grid, TargetSet targets, double condition_limit = 1e12);

/// One row of the matched-parameter-count comparisons.
struct AblationRow {
  std::string label;
  int n_rbfs = 0;
  int parameter_count = 0;
  std::string decomposition;  // e.g. "11*3+3"
  double stress_error_pct = 0.0;
  double stiffness_error_pct = 0.0;
};

/// Stress-only (11 gradient interpolants + s_O), stiffness-only (5 Hessian
/// interpolants + K_O) and combined (3 RBFs, both offsets) fits, all with 36
/// parameters.
std::vector<AblationRow> stress_stiffness_ablation(std::span<const TrainingSample> samples, const FitConfig& config);

/// Energy interpolation fitted to energies, energy interpolation fitted to
/// stress and stiffness (54 RBFs each), and the combined model with 5 RBFs,
/// all with 54 parameters.
std::vector<AblationRow> energy_interp_comparison(std::span<const TrainingSample> samples, const FitConfig& config);

/// Mean error of each kernel family at a fixed number of centers.
struct KernelRow {
  KernelFamily family;
  double radius = 0.0;
  double stress_error_pct = 0.0;
  double stiffness_error_pct = 0.0;
  double mean_error_pct = 0.0;
};

std::vector<KernelRow> kernel_comparison(std::span<const TrainingSample> samples, int n_centers,
                                         const FitConfig& config);

}  // namespace conservolast
