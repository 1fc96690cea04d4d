#include "conservolast/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "conservolast/errors.hpp"
#include "conservolast/kmeans.hpp"
#include "conservolast/parallel.hpp"

namespace conservolast {

namespace {

constexpr double kDuplicateTolerance = 1e-9;
const double kSqrt2 = std::sqrt(2.0);

void check_distinct(std::span<const VoigtStrain> centers) {
  for (std::size_t i = 0; i < centers.size(); ++i) {
    for (std::size_t j = i + 1; j < centers.size(); ++j) {
      if ((centers[i] - centers[j]).norm() <= kDuplicateTolerance) {
        throw DuplicateCenters("centers " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
      }
    }
  }
}

struct Layout {
  int n_centers = 0;
  int offset_cols = 0;
  int grad_cols = 0;
  int hess_cols = 0;

  Layout(const FitTerms& t, int k)
      : n_centers(k),
        offset_cols(t.stiffness_offset ? 6 : 0),
        grad_cols(t.grad_interpolants ? 3 * k : 0),
        hess_cols(t.hess_interpolants ? 6 * k : 0) {}

  int grad_begin() const { return offset_cols; }
  int hess_begin() const { return offset_cols + grad_cols; }
  int cols() const { return offset_cols + grad_cols + hess_cols; }
};

// Weighted design matrix of the normalized least-squares objective. Stress
// columns already have the zero-stress-at-origin correction folded in.
void assemble(std::span<const TrainingSample> samples, std::span<const VoigtStrain> centers, const Kernel& kernel,
              const FitTerms& terms, const Normalizers& norm, Eigen::MatrixXd& a, Eigen::VectorXd& b) {
  const Layout lay(terms, static_cast<int>(centers.size()));
  const bool use_stress = terms.stress_weight > 0.0;
  const bool use_stiff = terms.stiffness_weight > 0.0;
  const double ws = use_stress ? std::sqrt(terms.stress_weight) / norm.s_rms : 0.0;
  const double wk = use_stiff ? std::sqrt(terms.stiffness_weight) / norm.k_rms : 0.0;

  Eigen::Index rows = 0;
  for (const TrainingSample& smp : samples) {
    if (use_stress) rows += 3;
    if (use_stiff && smp.has_stiffness()) rows += 6;
  }
  a.setZero(rows, lay.cols());
  b.setZero(rows);

  std::vector<KernelSample> at_origin;
  at_origin.reserve(centers.size());
  for (const VoigtStrain& c : centers) at_origin.push_back(sample_kernel(kernel, VoigtStrain::Zero(), c));

  std::array<Mat3, 6> sym_basis;
  for (int c = 0; c < 6; ++c) sym_basis[c] = symmetric_basis(c);

  Eigen::Index row = 0;
  std::vector<KernelSample> ks;
  for (const TrainingSample& smp : samples) {
    ks.clear();
    for (const VoigtStrain& c : centers) ks.push_back(sample_kernel(kernel, smp.strain, c));

    if (use_stress) {
      auto block = a.middleRows(row, 3);
      if (terms.stiffness_offset) {
        for (int c = 0; c < 6; ++c) block.col(c) = ws * (sym_basis[c] * smp.strain);
      }
      for (int i = 0; i < lay.n_centers; ++i) {
        if (terms.grad_interpolants) {
          for (int d = 0; d < 3; ++d) {
            const Vec3 w = Vec3::Unit(d);
            block.col(lay.grad_begin() + 3 * i + d) =
                ws * (interp::grad_stress(ks[i], w) - interp::grad_stress(at_origin[i], w));
          }
        }
        if (terms.hess_interpolants) {
          for (int c = 0; c < 6; ++c) {
            block.col(lay.hess_begin() + 6 * i + c) =
                ws * (interp::hess_stress(ks[i], sym_basis[c]) - interp::hess_stress(at_origin[i], sym_basis[c]));
          }
        }
      }
      b.segment<3>(row) = ws * smp.stress;
      row += 3;
    }

    if (use_stiff && smp.has_stiffness()) {
      auto put = [&](int col, const Mat3& k) {
        for (int e = 0; e < 6; ++e) {
          const auto [r, c] = kSymIndex[e];
          a(row + e, col) = wk * (r == c ? 1.0 : kSqrt2) * k(r, c);
        }
      };
      if (terms.stiffness_offset) {
        for (int c = 0; c < 6; ++c) put(c, sym_basis[c]);
      }
      for (int i = 0; i < lay.n_centers; ++i) {
        if (terms.grad_interpolants) {
          for (int d = 0; d < 3; ++d) put(lay.grad_begin() + 3 * i + d, interp::grad_stiffness(ks[i], Vec3::Unit(d)));
        }
        if (terms.hess_interpolants) {
          for (int c = 0; c < 6; ++c) put(lay.hess_begin() + 6 * i + c, interp::hess_stiffness(ks[i], sym_basis[c]));
        }
      }
      const Mat3 target = symmetrize(smp.stiffness);
      for (int e = 0; e < 6; ++e) {
        const auto [r, c] = kSymIndex[e];
        b(row + e) = wk * (r == c ? 1.0 : kSqrt2) * target(r, c);
      }
      row += 6;
    }
  }
}

EnergyModel unpack_parameters(const Eigen::VectorXd& p, std::span<const VoigtStrain> centers, const Kernel& kernel,
                              const FitTerms& terms) {
  const Layout lay(terms, static_cast<int>(centers.size()));
  EnergyModel m;
  m.kernel = kernel;
  m.centers.assign(centers.begin(), centers.end());
  auto sym_at = [&](int begin) {
    SymPacked packed{};
    for (int c = 0; c < 6; ++c) packed[c] = p(begin + c);
    return unpack_symmetric(packed);
  };
  if (terms.stiffness_offset) m.stiffness_offset = sym_at(0);
  for (int i = 0; i < lay.n_centers; ++i) {
    if (terms.grad_interpolants) m.grad_coeffs.push_back(p.segment<3>(lay.grad_begin() + 3 * i));
    if (terms.hess_interpolants) m.hess_coeffs.push_back(sym_at(lay.hess_begin() + 6 * i));
  }
  return recompute_stress_offset(std::move(m));
}

double weighted_objective(const FitReport& r, const FitTerms& t) {
  return t.stress_weight * r.stress_objective + t.stiffness_weight * r.stiffness_objective;
}

}  // namespace

void symmetrize_targets(std::vector<TrainingSample>& samples) {
  for (TrainingSample& s : samples) s.stiffness = symmetrize(s.stiffness);
}

Normalizers rms_normalizers(std::span<const TrainingSample> samples) {
  if (samples.empty()) throw InputError("rms_normalizers: no samples");
  double ss = 0.0, kk = 0.0;
  std::size_t n_k = 0;
  for (const TrainingSample& s : samples) {
    ss += s.stress.squaredNorm();
    if (s.has_stiffness()) {
      kk += s.stiffness.squaredNorm();
      ++n_k;
    }
  }
  Normalizers n;
  n.s_rms = std::sqrt(ss / static_cast<double>(samples.size()));
  n.k_rms = n_k ? std::sqrt(kk / static_cast<double>(n_k)) : 0.0;
  if (!(n.s_rms > 0.0) || !(n.k_rms > 0.0)) {
    throw InputError("rms_normalizers: degenerate data (zero stress or stiffness RMS)");
  }
  return n;
}

std::vector<double> default_radius_grid() {
  std::vector<double> grid(16);
  for (int i = 0; i < 16; ++i) grid[i] = std::pow(10.0, -1.0 + 2.0 * i / 15.0);
  return grid;
}

void FitConfig::check() const {
  if (max_rbfs < 0) throw InputError("max_rbfs must be nonnegative");
  if (!(target_error >= 0.0)) throw InputError("target_error must be nonnegative");
  if (radius_grid.empty()) throw InputError("radius_grid must not be empty");
  if (!std::is_sorted(radius_grid.begin(), radius_grid.end())) throw InputError("radius_grid must be ascending");
  for (double g : radius_grid) {
    if (!(g > 0.0)) throw InputError("radius_grid entries must be positive");
  }
  if (!(condition_limit > 1.0)) throw InputError("condition_limit must exceed 1");
}

int FitTerms::parameter_count(int n_centers) const {
  int n = stiffness_offset ? 6 : 0;
  if (grad_interpolants) n += 3 * n_centers + 3;  // the stress offset rides with the gradient interpolants
  if (hess_interpolants) n += 6 * n_centers;
  return n;
}

double FitTerms::score(double stress_pct, double stiffness_pct) const {
  if (stiffness_weight <= 0.0) return stress_pct;
  if (stress_weight <= 0.0) return stiffness_pct;
  return 0.5 * (stress_pct + stiffness_pct);
}

FitReport evaluate_errors(const EnergyModel& m, std::span<const TrainingSample> samples, const Normalizers& norm) {
  return evaluate_errors(
      samples, norm, [&](const VoigtStrain& e) { return stress(m, e); },
      [&](const VoigtStrain& e) { return stiffness(m, e); });
}

LinearSolve solve_least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double condition_limit) {
  LinearSolve out;
  const Eigen::Index n = a.cols();
  if (n == 0) {
    out.x.resize(0);
    out.condition_estimate = 1.0;
    return out;
  }
  Eigen::VectorXd scale(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const double norm = a.col(c).norm();
    scale(c) = norm > 0.0 ? 1.0 / norm : 1.0;
  }
  const Eigen::MatrixXd as = a * scale.asDiagonal();
  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(n, n);
  normal.selfadjointView<Eigen::Lower>().rankUpdate(as.transpose());
  normal.triangularView<Eigen::StrictlyUpper>() = normal.transpose();
  const Eigen::VectorXd rhs = as.transpose() * b;

  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(normal, Eigen::EigenvaluesOnly).eigenvalues();
  out.condition_estimate = ev(0) > 0.0 ? ev(n - 1) / ev(0) : std::numeric_limits<double>::infinity();
  if (!(out.condition_estimate <= condition_limit)) {
    throw IllConditioned("condition estimate " + std::to_string(out.condition_estimate) + " exceeds limit");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(normal);
  auto factor_ok = [&] {
    if (llt.info() != Eigen::Success) return false;
    const auto d = llt.matrixLLT().diagonal();
    return (d.array() > 0.0).all() && d.allFinite();
  };
  if (!factor_ok()) {
    normal.diagonal().array() += 1e-12 * normal.trace() / static_cast<double>(n);
    llt.compute(normal);
    out.regularized = true;
    if (!factor_ok()) throw IllConditioned("normal equations are not positive definite");
  }
  Eigen::VectorXd y = llt.solve(rhs);
  // One step of iterative refinement on the least-squares residual.
  y += llt.solve(as.transpose() * (b - as * y));
  out.x = scale.asDiagonal() * y;
  return out;
}

std::pair<EnergyModel, FitReport> solve_coefficients(std::span<const TrainingSample> samples,
                                                     std::span<const VoigtStrain> centers, const Kernel& kernel,
                                                     const FitTerms& terms, double condition_limit) {
  if (samples.empty()) throw InputError("solve_coefficients: no samples");
  check_distinct(centers);
  const Normalizers norm = rms_normalizers(samples);

  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  assemble(samples, centers, kernel, terms, norm, a, b);
  const LinearSolve sol = solve_least_squares(a, b, condition_limit);

  EnergyModel model = unpack_parameters(sol.x, centers, kernel, terms);
  FitReport rep = evaluate_errors(model, samples, norm);
  rep.n_rbfs = static_cast<int>(centers.size());
  rep.chosen_radius = centers.empty() ? 0.0 : kernel.radius();
  rep.condition_estimate = sol.condition_estimate;
  rep.parameter_count = terms.parameter_count(rep.n_rbfs);
  return {std::move(model), std::move(rep)};
}

std::vector<VoigtStrain> kmeans_centers(std::span<const TrainingSample> samples, int k, std::uint64_t seed,
                                        int restarts) {
  if (k == 0) return {};
  std::vector<Vec3> pts;
  pts.reserve(samples.size());
  for (const TrainingSample& s : samples) pts.push_back(s.strain);
  return kmeans(pts, k, seed, restarts).centroids;
}

double radius_scale(std::span<const TrainingSample> samples, std::span<const VoigtStrain> centers) {
  if (centers.size() >= 2) {
    double total = 0.0;
    for (std::size_t i = 0; i < centers.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < centers.size(); ++j) {
        if (i != j) best = std::min(best, (centers[i] - centers[j]).norm());
      }
      total += best;
    }
    return total / static_cast<double>(centers.size());
  }
  Vec3 mean = Vec3::Zero();
  for (const TrainingSample& s : samples) mean += s.strain;
  mean /= static_cast<double>(std::max<std::size_t>(1, samples.size()));
  double r = 0.0;
  for (const TrainingSample& s : samples) r = std::max(r, (s.strain - mean).norm());
  return r > 0.0 ? r : 1.0;
}

SweepResult sweep_radius(std::span<const TrainingSample> samples, std::span<const VoigtStrain> centers,
                         KernelFamily family, std::span<const double> radius_grid, const FitTerms& terms,
                         double condition_limit) {
  if (radius_grid.empty()) throw InputError("sweep_radius: empty radius grid");
  check_distinct(centers);
  const double base = radius_scale(samples, centers);

  struct Candidate {
    std::optional<std::pair<EnergyModel, FitReport>> fit;
    RadiusCandidate info;
  };
  std::vector<Candidate> cands(radius_grid.size());
  parallel_for(radius_grid.size(), [&](std::size_t g) {
    Candidate& c = cands[g];
    c.info.radius = radius_grid[g] * base;
    try {
      c.fit = solve_coefficients(samples, centers, Kernel(family, c.info.radius), terms, condition_limit);
      c.info.feasible = true;
      c.info.objective = weighted_objective(c.fit->second, terms);
      c.info.mean_error_pct = terms.score(c.fit->second.stress_error_pct, c.fit->second.stiffness_error_pct);
    } catch (const IllConditioned&) {
      c.info.feasible = false;
    }
  });

  std::optional<std::size_t> best;
  for (std::size_t g = 0; g < cands.size(); ++g) {
    if (!cands[g].info.feasible) continue;
    if (!best || cands[g].info.objective < cands[*best].info.objective) best = g;
  }
  if (!best) throw AllIllConditioned("every radius candidate was ill-conditioned");

  SweepResult out;
  out.radius = cands[*best].info.radius;
  out.model = std::move(cands[*best].fit->first);
  out.report = std::move(cands[*best].fit->second);
  for (const Candidate& c : cands) out.report.radius_sweep.push_back(c.info);
  return out;
}

std::pair<EnergyModel, FitReport> greedy_fit(std::span<const TrainingSample> samples, const FitConfig& config,
                                             const FitTerms& terms) {
  config.check();
  if (samples.empty()) throw InputError("greedy_fit: no samples");
  std::vector<Vec3> pts;
  for (const TrainingSample& s : samples) pts.push_back(s.strain);
  const int distinct = static_cast<int>(count_distinct(pts));

  std::optional<std::pair<EnergyModel, FitReport>> best;
  double best_score = std::numeric_limits<double>::infinity();
  std::vector<GreedyStep> history;

  for (int k = 0; k <= std::min(config.max_rbfs, distinct); ++k) {
    GreedyStep step;
    step.n_rbfs = k;
    std::optional<std::pair<EnergyModel, FitReport>> fit;
    try {
      if (k == 0) {
        fit = solve_coefficients(samples, {}, Kernel(config.kernel_family, 1.0), terms, config.condition_limit);
      } else {
        const auto centers = kmeans_centers(samples, k, config.kmeans_seed, config.kmeans_restarts);
        SweepResult sw = sweep_radius(samples, centers, config.kernel_family, config.radius_grid, terms,
                                      config.condition_limit);
        fit.emplace(std::move(sw.model), std::move(sw.report));
      }
    } catch (const IllConditioned&) {
    } catch (const AllIllConditioned&) {
    }
    if (fit) {
      step.feasible = true;
      step.radius = fit->second.chosen_radius;
      step.mean_error_pct = terms.score(fit->second.stress_error_pct, fit->second.stiffness_error_pct);
      if (step.mean_error_pct < best_score) {
        best_score = step.mean_error_pct;
        best = std::move(fit);
      }
    }
    step.best_so_far_pct = best_score;
    history.push_back(step);
    if (best && best_score <= 100.0 * config.target_error) break;
  }
  if (!best) throw AllIllConditioned("no feasible fit for any number of RBFs");
  best->second.greedy_history = std::move(history);
  return std::move(*best);
}

}  // namespace conservolast
