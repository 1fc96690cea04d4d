#include "conservolast/baselines.hpp"

#include <cmath>
#include <optional>

#include "conservolast/errors.hpp"
#include "conservolast/parallel.hpp"

namespace conservolast {

double energy_interp_eval(const EnergyInterpModel& m, const VoigtStrain& e) {
  double psi = 0.0;
  for (std::size_t i = 0; i < m.centers.size(); ++i) psi += m.kernel.eval((e - m.centers[i]).norm()) * m.coeffs[i];
  return psi;
}

Vec3 energy_interp_grad(const EnergyInterpModel& m, const VoigtStrain& e) {
  Vec3 g = Vec3::Zero();
  for (std::size_t i = 0; i < m.centers.size(); ++i) g += m.coeffs[i] * spatial_grad(m.kernel, RadialVector(e, m.centers[i]));
  return g;
}

Mat3 energy_interp_hess(const EnergyInterpModel& m, const VoigtStrain& e) {
  Mat3 h = Mat3::Zero();
  for (std::size_t i = 0; i < m.centers.size(); ++i) h += m.coeffs[i] * spatial_hess(m.kernel, RadialVector(e, m.centers[i]));
  return h;
}

Vec3 stress_interp_eval(const StressInterpModel& m, const VoigtStrain& e) {
  Vec3 s = Vec3::Zero();
  for (std::size_t i = 0; i < m.centers.size(); ++i) s += m.kernel.eval((e - m.centers[i]).norm()) * m.coeffs[i];
  return s;
}

Mat3 stress_interp_jacobian(const StressInterpModel& m, const VoigtStrain& e) {
  Mat3 j = Mat3::Zero();
  for (std::size_t i = 0; i < m.centers.size(); ++i) {
    j += m.coeffs[i] * spatial_grad(m.kernel, RadialVector(e, m.centers[i])).transpose();
  }
  return j;
}

double material_interp_eval(const MaterialInterpModel& m, const VoigtStrain& e) {
  double psi = 0.0;
  for (std::size_t i = 0; i < m.centers.size(); ++i) {
    psi += 0.5 * m.kernel.eval((e - m.centers[i]).norm()) * e.dot(m.coeffs[i] * e);
  }
  return psi;
}

Vec3 material_interp_grad(const MaterialInterpModel& m, const VoigtStrain& e) {
  Vec3 g = Vec3::Zero();
  for (std::size_t i = 0; i < m.centers.size(); ++i) {
    const RadialVector rv(e, m.centers[i]);
    const Vec3 we = m.coeffs[i] * e;
    g += m.kernel.eval(rv.r) * we + 0.5 * e.dot(we) * spatial_grad(m.kernel, rv);
  }
  return g;
}

Mat3 material_interp_hess(const MaterialInterpModel& m, const VoigtStrain& e) {
  Mat3 h = Mat3::Zero();
  for (std::size_t i = 0; i < m.centers.size(); ++i) {
    const RadialVector rv(e, m.centers[i]);
    const Mat3& w = m.coeffs[i];
    const Vec3 we = w * e;
    const double d1 = m.kernel.eval_d1(rv.r);
    h += m.kernel.eval(rv.r) * w + d1 * rv.u * we.transpose() + d1 * we * rv.u.transpose() +
         0.5 * e.dot(we) * spatial_hess(m.kernel, rv);
  }
  return h;
}

Vec3 curl_from_jacobian(const Mat3& j) {
  return Vec3(j(2, 1) - j(1, 2), j(0, 2) - j(2, 0), j(1, 0) - j(0, 1));
}

Mat3 fd_jacobian(const std::function<Vec3(const VoigtStrain&)>& field, const VoigtStrain& e, double h) {
  Mat3 j;
  for (int c = 0; c < 3; ++c) {
    const VoigtStrain step = h * VoigtStrain::Unit(c);
    j.col(c) = (field(e + step) - field(e - step)) / (2.0 * h);
  }
  return j;
}

StressField StressField::of(const EnergyModel& m) {
  return {[m](const VoigtStrain& e) { return conservolast::stress(m, e); },
          [m](const VoigtStrain& e) { return conservolast::stiffness(m, e); }};
}

StressField StressField::of(const StressInterpModel& m) {
  return {[m](const VoigtStrain& e) { return stress_interp_eval(m, e); },
          [m](const VoigtStrain& e) { return stress_interp_jacobian(m, e); }};
}

StressField StressField::of(const EnergyInterpModel& m) {
  return {[m](const VoigtStrain& e) { return energy_interp_grad(m, e); },
          [m](const VoigtStrain& e) { return energy_interp_hess(m, e); }};
}

StressField StressField::of(const MaterialInterpModel& m) {
  return {[m](const VoigtStrain& e) { return material_interp_grad(m, e); },
          [m](const VoigtStrain& e) { return material_interp_hess(m, e); }};
}

Vec3 curl_of_stress(const StressField& field, const VoigtStrain& e) {
  const Mat3 j = field.jacobian ? field.jacobian(e) : fd_jacobian(field.stress, e);
  return curl_from_jacobian(j);
}

std::vector<double> curl_report(const StressField& field, std::span<const TrainingSample> samples, double k_rms) {
  if (!(k_rms > 0.0)) throw InputError("curl_report: k_rms must be positive");
  std::vector<double> out;
  out.reserve(samples.size());
  for (const TrainingSample& s : samples) out.push_back(100.0 * curl_of_stress(field, s.strain).norm() / k_rms);
  return out;
}

std::string to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::EnergyInterp: return "energy_interp";
    case BaselineKind::StressInterp: return "stress_interp";
    case BaselineKind::MaterialInterp: return "material_interp";
  }
  return "unknown";
}

std::string to_string(TargetSet targets) {
  switch (targets) {
    case TargetSet::Energy: return "energy";
    case TargetSet::Stress: return "stress";
    case TargetSet::Stiffness: return "stiffness";
    case TargetSet::StressAndStiffness: return "stress_and_stiffness";
  }
  return "unknown";
}

StressField BaselineFit::field() const {
  switch (kind) {
    case BaselineKind::EnergyInterp: return StressField::of(energy_model);
    case BaselineKind::StressInterp: return StressField::of(stress_model);
    case BaselineKind::MaterialInterp: return StressField::of(material_model);
  }
  return {};
}

namespace {

int coeffs_per_center(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::EnergyInterp: return 1;
    case BaselineKind::StressInterp: return 3;
    case BaselineKind::MaterialInterp: return 6;
  }
  return 0;
}

// Energy, stress and stiffness produced by a unit coefficient.
struct UnitResponse {
  double energy = 0.0;
  Vec3 stress = Vec3::Zero();
  Mat3 stiffness = Mat3::Zero();
};

UnitResponse unit_response(BaselineKind kind, const Kernel& kernel, const VoigtStrain& e, const VoigtStrain& center,
                           int c) {
  UnitResponse r;
  const RadialVector rv(e, center);
  const double phi = kernel.eval(rv.r);
  switch (kind) {
    case BaselineKind::EnergyInterp:
      r.energy = phi;
      r.stress = spatial_grad(kernel, rv);
      r.stiffness = spatial_hess(kernel, rv);
      break;
    case BaselineKind::StressInterp:
      r.stress = phi * Vec3::Unit(c);
      r.stiffness = Vec3::Unit(c) * spatial_grad(kernel, rv).transpose();
      break;
    case BaselineKind::MaterialInterp: {
      MaterialInterpModel m{kernel, {center}, {symmetric_basis(c)}};
      r.energy = material_interp_eval(m, e);
      r.stress = material_interp_grad(m, e);
      r.stiffness = material_interp_hess(m, e);
      break;
    }
  }
  return r;
}

double energy_rms(std::span<const TrainingSample> samples) {
  double ss = 0.0;
  for (const TrainingSample& s : samples) {
    if (!s.energy) throw InputError("energy targets requested but a sample has no energy value");
    ss += *s.energy * *s.energy;
  }
  const double rms = std::sqrt(ss / static_cast<double>(samples.size()));
  if (!(rms > 0.0)) throw InputError("energy targets are all zero");
  return rms;
}

}  // namespace

BaselineFit fit_baseline(BaselineKind kind, std::span<const TrainingSample> samples,
                         std::span<const VoigtStrain> centers, const Kernel& kernel, TargetSet targets,
                         double condition_limit) {
  if (samples.empty()) throw InputError("fit_baseline: no samples");
  if (kind == BaselineKind::StressInterp && targets == TargetSet::Energy) {
    throw InputError("stress interpolation has no energy to fit");
  }
  const Normalizers norm = rms_normalizers(samples);
  const bool fit_energy = targets == TargetSet::Energy;
  const bool fit_stress = targets == TargetSet::Stress || targets == TargetSet::StressAndStiffness;
  const bool fit_stiff = targets == TargetSet::Stiffness || targets == TargetSet::StressAndStiffness;
  const double e_rms = fit_energy ? energy_rms(samples) : 1.0;

  const int per = coeffs_per_center(kind);
  const int cols = per * static_cast<int>(centers.size());
  Eigen::Index rows = 0;
  for (const TrainingSample& s : samples) {
    if (fit_energy) rows += 1;
    if (fit_stress) rows += 3;
    if (fit_stiff && s.has_stiffness()) rows += 9;
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);
  Eigen::Index row = 0;
  for (const TrainingSample& s : samples) {
    const bool stiff_rows = fit_stiff && s.has_stiffness();
    for (std::size_t i = 0; i < centers.size(); ++i) {
      for (int c = 0; c < per; ++c) {
        const int col = per * static_cast<int>(i) + c;
        const UnitResponse u = unit_response(kind, kernel, s.strain, centers[i], c);
        Eigen::Index r = row;
        if (fit_energy) a(r++, col) = u.energy / e_rms;
        if (fit_stress) {
          a.block<3, 1>(r, col) = u.stress / norm.s_rms;
          r += 3;
        }
        if (stiff_rows) {
          for (int k = 0; k < 9; ++k) a(r + k, col) = u.stiffness(k / 3, k % 3) / norm.k_rms;
        }
      }
    }
    if (fit_energy) b(row++) = *s.energy / e_rms;
    if (fit_stress) {
      b.segment<3>(row) = s.stress / norm.s_rms;
      row += 3;
    }
    if (stiff_rows) {
      for (int k = 0; k < 9; ++k) b(row + k) = s.stiffness(k / 3, k % 3) / norm.k_rms;
      row += 9;
    }
  }
  const LinearSolve sol = solve_least_squares(a, b, condition_limit);

  BaselineFit out;
  out.kind = kind;
  out.parameter_count = cols;
  const std::vector<VoigtStrain> cvec(centers.begin(), centers.end());
  switch (kind) {
    case BaselineKind::EnergyInterp:
      out.energy_model = {kernel, cvec, std::vector<double>(sol.x.data(), sol.x.data() + sol.x.size())};
      break;
    case BaselineKind::StressInterp:
      out.stress_model = {kernel, cvec, {}};
      for (std::size_t i = 0; i < centers.size(); ++i) out.stress_model.coeffs.push_back(sol.x.segment<3>(3 * i));
      break;
    case BaselineKind::MaterialInterp:
      out.material_model = {kernel, cvec, {}};
      for (std::size_t i = 0; i < centers.size(); ++i) {
        SymPacked p{};
        for (int c = 0; c < 6; ++c) p[c] = sol.x(6 * i + c);
        out.material_model.coeffs.push_back(unpack_symmetric(p));
      }
      break;
  }
  const StressField f = out.field();
  out.report = evaluate_errors(samples, norm, f.stress, f.jacobian);
  out.report.n_rbfs = static_cast<int>(centers.size());
  out.report.chosen_radius = kernel.radius();
  out.report.condition_estimate = sol.condition_estimate;
  out.report.parameter_count = cols;
  if (fit_energy) {
    double ss = 0.0;
    for (const TrainingSample& s : samples) {
      double psi = 0.0;
      if (kind == BaselineKind::EnergyInterp) psi = energy_interp_eval(out.energy_model, s.strain);
      if (kind == BaselineKind::MaterialInterp) psi = material_interp_eval(out.material_model, s.strain);
      ss += (psi - *s.energy) * (psi - *s.energy);
    }
    out.energy_error_pct = 100.0 * std::sqrt(ss / static_cast<double>(samples.size())) / e_rms;
  }
  // Weighted least-squares objective, used to rank radius candidates.
  out.report.objective = (a * sol.x - b).squaredNorm();
  return out;
}

BaselineFit sweep_baseline(BaselineKind kind, std::span<const TrainingSample> samples,
                           std::span<const VoigtStrain> centers, KernelFamily family,
                           std::span<const double> radius_grid, TargetSet targets, double condition_limit) {
  if (radius_grid.empty()) throw InputError("sweep_baseline: empty radius grid");
  const double base = radius_scale(samples, centers);
  std::vector<std::optional<BaselineFit>> fits(radius_grid.size());
  parallel_for(radius_grid.size(), [&](std::size_t g) {
    try {
      fits[g] = fit_baseline(kind, samples, centers, Kernel(family, radius_grid[g] * base), targets, condition_limit);
    } catch (const IllConditioned&) {
    }
  });
  std::optional<std::size_t> best;
  for (std::size_t g = 0; g < fits.size(); ++g) {
    if (fits[g] && (!best || fits[g]->report.objective < fits[*best]->report.objective)) best = g;
  }
  if (!best) throw AllIllConditioned("every radius candidate was ill-conditioned");
  BaselineFit out = std::move(*fits[*best]);
  for (std::size_t g = 0; g < fits.size(); ++g) {
    RadiusCandidate c;
    c.radius = radius_grid[g] * base;
    c.feasible = fits[g].has_value();
    if (c.feasible) {
      c.objective = fits[g]->report.objective;
      c.mean_error_pct = fits[g]->report.mean_error_pct;
    }
    out.report.radius_sweep.push_back(c);
  }
  return out;
}

namespace {

AblationRow energy_model_row(const std::string& label, std::span<const TrainingSample> samples, int k,
                             const FitTerms& terms, const FitConfig& config, const std::string& decomposition) {
  const auto centers = kmeans_centers(samples, k, config.kmeans_seed, config.kmeans_restarts);
  const SweepResult sw =
      sweep_radius(samples, centers, config.kernel_family, config.radius_grid, terms, config.condition_limit);
  return {label, k, terms.parameter_count(k), decomposition, sw.report.stress_error_pct,
          sw.report.stiffness_error_pct};
}

}  // namespace

std::vector<AblationRow> stress_stiffness_ablation(std::span<const TrainingSample> samples, const FitConfig& config) {
  FitTerms stress_only;
  stress_only.hess_interpolants = false;
  stress_only.stiffness_offset = false;
  stress_only.stiffness_weight = 0.0;

  FitTerms stiffness_only;
  stiffness_only.grad_interpolants = false;
  stiffness_only.stress_weight = 0.0;

  const FitTerms combined;
  return {energy_model_row("stress fit", samples, 11, stress_only, config, "11*3+3"),
          energy_model_row("stiffness fit", samples, 5, stiffness_only, config, "5*6+6"),
          energy_model_row("stress + stiffness fit", samples, 3, combined, config, "3*9+6+3")};
}

std::vector<AblationRow> energy_interp_comparison(std::span<const TrainingSample> samples, const FitConfig& config) {
  const int k = 54;
  const auto centers = kmeans_centers(samples, k, config.kmeans_seed, config.kmeans_restarts);
  std::vector<AblationRow> rows;
  for (const auto& [label, targets] :
       {std::pair{std::string("energy fit, energy interp."), TargetSet::Energy},
        std::pair{std::string("our fit, energy interp."), TargetSet::StressAndStiffness}}) {
    const BaselineFit f = sweep_baseline(BaselineKind::EnergyInterp, samples, centers, config.kernel_family,
                                         config.radius_grid, targets, config.condition_limit);
    rows.push_back({label, k, f.parameter_count, "54*1", f.report.stress_error_pct, f.report.stiffness_error_pct});
  }
  rows.push_back(energy_model_row("our method", samples, 5, FitTerms{}, config, "5*9+6+3"));
  return rows;
}

std::vector<KernelRow> kernel_comparison(std::span<const TrainingSample> samples, int n_centers,
                                         const FitConfig& config) {
  const auto centers = kmeans_centers(samples, n_centers, config.kmeans_seed, config.kmeans_restarts);
  std::vector<KernelRow> rows;
  for (KernelFamily fam : {KernelFamily::Multiquadric, KernelFamily::Gaussian, KernelFamily::InverseQuadratic,
                           KernelFamily::InverseMultiquadric}) {
    const SweepResult sw = sweep_radius(samples, centers, fam, config.radius_grid, FitTerms{}, config.condition_limit);
    rows.push_back({fam, sw.radius, sw.report.stress_error_pct, sw.report.stiffness_error_pct,
                    sw.report.mean_error_pct});
  }
  return rows;
}

}  // namespace conservolast
