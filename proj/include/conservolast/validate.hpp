#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "conservolast/fit.hpp"
#include "conservolast/model.hpp"
#include "conservolast/static_solver.hpp"

namespace conservolast {

/// One point of the orthogonal-stretch comparison.
struct OrthogonalPoint {
  double lambda1 = 1.0;
  double theta = 0.0;
  double lambda2_reference = 1.0;
  double lambda2_model = 1.0;
  double error_pct = 0.0;
  int evaluations = 0;
};

struct ValidationReport {
  double stress_error_pct = 0.0;
  double stiffness_error_pct = 0.0;
  double orthogonal_error_pct = 0.0;  // worst point; 0 without orthogonal data
  double orthogonal_mean_error_pct = 0.0;
  double s_rms = 0.0;
  double k_rms = 0.0;
  std::vector<SampleError> per_sample;
  std::vector<OrthogonalPoint> orthogonal_points;
  // Experiment metadata, copied into the written report.
  std::string tile_id;
  std::string grid;
  std::uint64_t seed = 0;
  std::string split;
};

/// Per-sample norms and error percentages of a model against samples, with
/// the RMS normalization of the samples themselves.
ValidationReport error_table(const EnergyModel& model, std::span<const TrainingSample> samples);

/// Reference orthogonal stretch of a (lambda1, theta) grid point.
struct OrthogonalTarget {
  double lambda1 = 1.0;
  double theta = 0.0;
  double lambda2 = 1.0;
};

/// The energy-minimizing lambda2 of each stretch triple in a generated data
/// set (the middle of the three lambda2 values per (lambda1, theta)).
std::vector<OrthogonalTarget> orthogonal_targets(std::span<const TrainingSample> samples);

/// lambda2 minimizing the model energy at fixed lambda1 and theta, searched
/// on [0.3, 2.5]. Throws NoMinimum when no stationary point is bracketed.
double model_orthogonal_stretch(const EnergyModel& model, double lambda1, double theta, double guess = 1.0,
                                int* evaluations = nullptr);

/// Error 100 |lambda2_model - lambda2_ref| / max(|lambda2_ref - 1|, 1e-3 |lambda2_ref|)
/// at every target.
std::vector<OrthogonalPoint> orthogonal_validation(const EnergyModel& model, std::span<const OrthogonalTarget> targets);

/// Constitutive law of a fitted energy evaluated at the Green strain of F.
ConstitutiveLaw energy_model_law(const EnergyModel& model);

/// Prescribed final positions of a subset of nodes; everything else is
/// traction free.
struct DirichletBoundary {
  std::vector<int> nodes;
  std::vector<Vec2> positions;
};

struct CoarseOptions {
  int load_steps = 4;
  double gradient_tol_factor = 1e-8;  // times the model's rest stiffness and mesh size
  int max_iterations = 100;
};

struct CoarseResult {
  std::vector<Vec2> positions;
  double energy = 0.0;
  double gradient_norm = 0.0;
  int newton_iterations = 0;
  int load_steps = 0;
};

/// Static equilibrium of a mesh whose elements follow the fitted energy,
/// reached by incremental loading of the Dirichlet data. Quads are expected
/// already split into triangles. Throws NonConverged when a load step fails
/// after repeated subdivision.
CoarseResult coarse_simulate(const EnergyModel& model, const Mesh& mesh, const DirichletBoundary& boundary,
                             const CoarseOptions& options = {});

/// Same as coarse_simulate but with an arbitrary law (used for the fine
/// microstructure solve of the comparison).
CoarseResult static_simulate(const Mesh& mesh, const ConstitutiveLaw& law, double stiffness, const DirichletBoundary& boundary,
                             const CoarseOptions& options = {});

enum class SplitKind { LowerHalfStretch, HalfDirections, None };

std::string to_string(SplitKind split);
SplitKind split_kind_from_string(const std::string& name);

struct ExtrapolationResult {
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  double train_error_pct = 0.0;  // mean of stress and stiffness percentages
  double test_error_pct = 0.0;
  FitReport train_report;
  FitReport test_report;
  EnergyModel model;
};

/// Partitions samples by the split, fits the training part with greedy_fit
/// and reports errors on both parts (each normalized by its own RMS).
/// LowerHalfStretch trains on lambda1 below the midpoint of the lambda1
/// range; HalfDirections trains on theta < pi/2; None trains on everything
/// and therefore fails with an empty test set. Throws InputError for an
/// empty part or samples without stretch coordinates.
ExtrapolationResult extrapolation_experiment(std::span<const TrainingSample> samples, SplitKind split,
                                             const FitConfig& config);

}  // namespace conservolast
