#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "conservolast/kernels.hpp"
#include "conservolast/model.hpp"

namespace conservolast {

// TrainingSample::flags bits.
inline constexpr std::uint32_t kFlagNoStiffness = 1u << 0;
inline constexpr std::uint32_t kFlagBranchJump = 1u << 1;
inline constexpr std::uint32_t kFlagNotConverged = 1u << 2;

struct TrainingSample {
  VoigtStrain strain = VoigtStrain::Zero();
  StressVector stress = StressVector::Zero();
  StiffnessMatrix stiffness = StiffnessMatrix::Zero();
  // Homogenized energy density, when the data source provides it.
  std::optional<double> energy;
  // Stretch protocol coordinates; NaN for data that did not come from it.
  double lambda1 = std::numeric_limits<double>::quiet_NaN();
  double lambda2 = std::numeric_limits<double>::quiet_NaN();
  double theta = std::numeric_limits<double>::quiet_NaN();
  std::uint32_t flags = 0;

  bool has_stiffness() const { return (flags & kFlagNoStiffness) == 0; }
};

/// Symmetrizes the stiffness targets in place.
void symmetrize_targets(std::vector<TrainingSample>& samples);

struct Normalizers {
  double s_rms = 0.0;
  double k_rms = 0.0;
};

/// Root-mean-square of the target stress and stiffness norms. Samples
/// without stiffness are excluded from k_rms. Throws InputError on empty or
/// all-zero data.
Normalizers rms_normalizers(std::span<const TrainingSample> samples);

/// Default multiplier grid: 16 log-spaced values in [0.1, 10].
std::vector<double> default_radius_grid();

struct FitConfig {
  int max_rbfs = 19;
  double target_error = 0.05;  // fraction; compared with the mean error percentage / 100
  std::vector<double> radius_grid = default_radius_grid();
  KernelFamily kernel_family = KernelFamily::Multiquadric;
  std::uint64_t kmeans_seed = 0;
  int kmeans_restarts = 1;
  double condition_limit = 1e12;

  void check() const;
};

/// Which parts of the energy are fitted and which targets enter the objective.
struct FitTerms {
  bool grad_interpolants = true;
  bool hess_interpolants = true;
  bool stiffness_offset = true;
  double stress_weight = 1.0;
  double stiffness_weight = 1.0;

  int parameter_count(int n_centers) const;
  /// Error percentage the greedy loop drives down: the mean of the stress and
  /// stiffness percentages, or just one of them when the other is unweighted.
  double score(double stress_pct, double stiffness_pct) const;
};

struct SampleError {
  double stress_target_norm = 0.0;
  double stress_fit_norm = 0.0;
  double stress_pct = 0.0;
  double stiffness_target_norm = 0.0;
  double stiffness_fit_norm = 0.0;
  double stiffness_pct = 0.0;
};

struct RadiusCandidate {
  double radius = 0.0;
  bool feasible = false;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double mean_error_pct = std::numeric_limits<double>::quiet_NaN();
};

struct GreedyStep {
  int n_rbfs = 0;
  double radius = 0.0;
  double mean_error_pct = std::numeric_limits<double>::quiet_NaN();
  double best_so_far_pct = std::numeric_limits<double>::quiet_NaN();
  bool feasible = false;
};

struct FitReport {
  double stress_error_pct = 0.0;
  double stiffness_error_pct = 0.0;
  double mean_error_pct = 0.0;  // arithmetic mean of the two percentages
  double objective = 0.0;  // stress_objective + stiffness_objective
  double stress_objective = 0.0;
  double stiffness_objective = 0.0;
  std::vector<SampleError> per_sample_errors;
  int n_rbfs = 0;
  double chosen_radius = 0.0;
  double condition_estimate = 0.0;
  double s_rms = 0.0;
  double k_rms = 0.0;
  int parameter_count = 0;
  std::vector<RadiusCandidate> radius_sweep;  // last sweep performed
  std::vector<GreedyStep> greedy_history;
};

/// Error percentages of an arbitrary stress/stiffness field against samples,
/// normalized by the given RMS values.
template <typename StressFn, typename StiffnessFn>
FitReport evaluate_errors(std::span<const TrainingSample> samples, const Normalizers& norm, StressFn&& stress_of,
                          StiffnessFn&& stiffness_of);

FitReport evaluate_errors(const EnergyModel& m, std::span<const TrainingSample> samples, const Normalizers& norm);

struct LinearSolve {
  Eigen::VectorXd x;
  double condition_estimate = 0.0;
  bool regularized = false;
};

/// Minimizes |A x - b|^2 through the normal equations with Jacobi column
/// scaling. Falls back to a 1e-12 * trace Tikhonov shift when the normal
/// matrix is not positive definite. The condition estimate is the squared
/// ratio of the extreme diagonal entries of the Cholesky factor; exceeding
/// condition_limit throws IllConditioned.
LinearSolve solve_least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double condition_limit);

/// Fits K_O, {w_i}, {W_i} for fixed centers and kernel; s_O follows from the
/// zero-stress-at-origin constraint.
std::pair<EnergyModel, FitReport> solve_coefficients(std::span<const TrainingSample> samples,
                                                     std::span<const VoigtStrain> centers, const Kernel& kernel,
                                                     const FitTerms& terms = {}, double condition_limit = 1e12);

/// k-means centers of the sample strains; k = 0 returns an empty list.
std::vector<VoigtStrain> kmeans_centers(std::span<const TrainingSample> samples, int k, std::uint64_t seed,
                                        int restarts = 1);

/// Mean nearest-neighbor distance among centers, or the bounding radius of
/// the strains around their centroid when there is a single center.
double radius_scale(std::span<const TrainingSample> samples, std::span<const VoigtStrain> centers);

struct SweepResult {
  double radius = 0.0;
  EnergyModel model;
  FitReport report;
};

/// Tries every grid multiplier times radius_scale and keeps the candidate
/// with the smallest objective. Throws AllIllConditioned when none is
/// feasible.
SweepResult sweep_radius(std::span<const TrainingSample> samples, std::span<const VoigtStrain> centers,
                         KernelFamily family, std::span<const double> radius_grid, const FitTerms& terms = {},
                         double condition_limit = 1e12);

/// Adds RBFs one at a time (k-means centers, radius sweep) until the mean of
/// the stress and stiffness error percentages reaches the target or
/// max_rbfs is hit. Returns the best model seen.
std::pair<EnergyModel, FitReport> greedy_fit(std::span<const TrainingSample> samples, const FitConfig& config,
                                             const FitTerms& terms = {});

// ---------------------------------------------------------------------------

template <typename StressFn, typename StiffnessFn>
FitReport evaluate_errors(std::span<const TrainingSample> samples, const Normalizers& norm, StressFn&& stress_of,
                          StiffnessFn&& stiffness_of) {
  FitReport rep;
  rep.s_rms = norm.s_rms;
  rep.k_rms = norm.k_rms;
  rep.per_sample_errors.reserve(samples.size());
  double ss = 0.0, kk = 0.0;
  std::size_t n_k = 0;
  for (const TrainingSample& smp : samples) {
    SampleError err;
    const StressVector s = stress_of(smp.strain);
    err.stress_target_norm = smp.stress.norm();
    err.stress_fit_norm = s.norm();
    const double ds2 = (s - smp.stress).squaredNorm();
    err.stress_pct = 100.0 * std::sqrt(ds2) / norm.s_rms;
    ss += ds2;
    if (smp.has_stiffness()) {
      const StiffnessMatrix k = stiffness_of(smp.strain);
      err.stiffness_target_norm = smp.stiffness.norm();
      err.stiffness_fit_norm = k.norm();
      const double dk2 = (k - smp.stiffness).squaredNorm();
      err.stiffness_pct = 100.0 * std::sqrt(dk2) / norm.k_rms;
      kk += dk2;
      ++n_k;
    }
    rep.per_sample_errors.push_back(err);
  }
  const double n = static_cast<double>(samples.size());
  rep.stress_error_pct = 100.0 * std::sqrt(ss / n) / norm.s_rms;
  rep.stiffness_error_pct = n_k ? 100.0 * std::sqrt(kk / static_cast<double>(n_k)) / norm.k_rms : 0.0;
  rep.mean_error_pct = 0.5 * (rep.stress_error_pct + rep.stiffness_error_pct);
  rep.stress_objective = ss / (norm.s_rms * norm.s_rms);
  rep.stiffness_objective = kk / (norm.k_rms * norm.k_rms);
  rep.objective = rep.stress_objective + rep.stiffness_objective;
  return rep;
}

}  // namespace conservolast
