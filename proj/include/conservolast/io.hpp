#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "conservolast/baselines.hpp"
#include "conservolast/fit.hpp"
#include "conservolast/homogenize.hpp"
#include "conservolast/model.hpp"
#include "conservolast/tile.hpp"
#include "conservolast/validate.hpp"

namespace conservolast {

using Json = nlohmann::ordered_json;

inline constexpr const char* kModelSchema = "conservolast.model/1";
inline constexpr const char* kMeshSchema = "conservolast.mesh/1";
inline constexpr const char* kConfigSchema = "conservolast.config/1";
inline constexpr const char* kFitReportSchema = "conservolast.fit_report/1";
inline constexpr const char* kValidationSchema = "conservolast.validation/1";
inline constexpr const char* kComparisonSchema = "conservolast.comparison/1";
inline constexpr const char* kExtrapolationSchema = "conservolast.extrapolation/1";

/// "%.17g"; NaN and infinities print as nan, inf, -inf.
std::string format_double(double x);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);
void write_text_file(const std::filesystem::path& path, const std::string& text);

Json model_to_json(const EnergyModel& m);
EnergyModel model_from_json(const Json& j);

Json tile_spec_to_json(const TileSpec& spec);
TileSpec tile_spec_from_json(const Json& j);

/// Mesh plus optional periodic data. Quads in the input ("quads") are split
/// into two triangles along their 0-2 diagonal.
Json tile_to_json(const Tile& tile);
Json mesh_to_json(const Mesh& mesh);
Tile tile_from_json(const Json& j);
Mesh mesh_from_json(const Json& j);

/// The experiment configuration: tile spec, sampling grid, fit settings,
/// kernel families to compare and the seed.
struct ExperimentConfig {
  TileSpec tile;
  SamplingGrid grid;
  FitConfig fit;
  std::vector<KernelFamily> kernels{KernelFamily::Multiquadric, KernelFamily::Gaussian,
                                    KernelFamily::InverseQuadratic, KernelFamily::InverseMultiquadric};
  int compare_centers = 10;
  std::uint64_t seed = 0;
};

Json config_to_json(const ExperimentConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const Json& j);

Json fit_report_to_json(const FitReport& r);
Json validation_report_to_json(const ValidationReport& r);
Json extrapolation_to_json(const ExtrapolationResult& r, SplitKind split);
Json ablation_to_json(const std::string& mode, std::span<const AblationRow> rows);
Json kernel_rows_to_json(std::span<const KernelRow> rows);

/// Training samples as CSV: E_xx, E_yy, E_xy2, s_1..s_3, K_11, K_12, K_13,
/// K_22, K_23, K_33, psi, lambda1, lambda2, theta, flags. A missing energy is
/// an empty psi field.
std::string samples_csv_header();
void write_samples_csv(std::ostream& out, std::span<const TrainingSample> samples);
std::vector<TrainingSample> read_samples_csv(std::istream& in);
void write_samples_file(const std::filesystem::path& path, std::span<const TrainingSample> samples);
std::vector<TrainingSample> read_samples_file(const std::filesystem::path& path);

/// Per-sample norms and error percentages.
void write_errors_csv(std::ostream& out, std::span<const SampleError> rows);
void write_orthogonal_csv(std::ostream& out, std::span<const OrthogonalPoint> rows);

}  // namespace conservolast
