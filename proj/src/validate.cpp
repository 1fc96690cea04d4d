#include "conservolast/validate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "conservolast/errors.hpp"
#include "conservolast/homogenize.hpp"
#include "conservolast/hyperelastic.hpp"
#include "conservolast/parallel.hpp"
#include "conservolast/roots.hpp"

namespace conservolast {

ValidationReport error_table(const EnergyModel& model, std::span<const TrainingSample> samples) {
  if (samples.empty()) throw InputError("error_table: no samples");
  const Normalizers norm = rms_normalizers(samples);
  const FitReport rep = evaluate_errors(model, samples, norm);
  ValidationReport out;
  out.stress_error_pct = rep.stress_error_pct;
  out.stiffness_error_pct = rep.stiffness_error_pct;
  out.s_rms = norm.s_rms;
  out.k_rms = norm.k_rms;
  out.per_sample = rep.per_sample_errors;
  return out;
}

std::vector<OrthogonalTarget> orthogonal_targets(std::span<const TrainingSample> samples) {
  std::map<std::pair<double, double>, std::vector<double>> groups;
  for (const TrainingSample& s : samples) {
    if (std::isnan(s.lambda1) || std::isnan(s.theta) || std::isnan(s.lambda2)) {
      throw InputError("sample lacks stretch coordinates");
    }
    groups[{s.theta, s.lambda1}].push_back(s.lambda2);
  }
  std::vector<OrthogonalTarget> out;
  out.reserve(groups.size());
  for (auto& [key, l2] : groups) {
    std::sort(l2.begin(), l2.end());
    out.push_back({key.second, key.first, l2[l2.size() / 2]});
  }
  return out;
}

double model_orthogonal_stretch(const EnergyModel& model, double lambda1, double theta, double guess,
                                int* evaluations) {
  auto fn = [&](double lambda2) -> std::pair<double, double> {
    const MacroDeformation m{lambda1, lambda2, theta};
    VoigtStrain d1, d2;
    strain_lambda2_derivatives(m, d1, d2);
    const VoigtStrain e = m.strain();
    const StressVector s = stress(model, e);
    const StiffnessMatrix k = stiffness(model, e);
    return {s.dot(d1), d1.dot(k * d1) + s.dot(d2)};
  };
  const double scale = std::max(stiffness(model, VoigtStrain::Zero()).norm(), 1e-300);
  RootOptions opt;
  opt.f_tol = 1e-12 * scale;
  opt.x_tol = 1e-13;
  try {
    const RootResult root = safeguarded_newton(fn, guess, opt);
    if (evaluations) *evaluations = root.evaluations;
    return root.x;
  } catch (const NoBracket& e) {
    throw NoMinimum(std::string("orthogonal stretch search left the bracket: ") + e.what());
  }
}

std::vector<OrthogonalPoint> orthogonal_validation(const EnergyModel& model,
                                                   std::span<const OrthogonalTarget> targets) {
  std::vector<OrthogonalPoint> out(targets.size());
  parallel_for(targets.size(), [&](std::size_t i) {
    const OrthogonalTarget& t = targets[i];
    OrthogonalPoint& p = out[i];
    p.lambda1 = t.lambda1;
    p.theta = t.theta;
    p.lambda2_reference = t.lambda2;
    p.lambda2_model = model_orthogonal_stretch(model, t.lambda1, t.theta, 1.0, &p.evaluations);
    const double denom = std::max(std::abs(t.lambda2 - 1.0), 1e-3 * std::abs(t.lambda2));
    p.error_pct = 100.0 * std::abs(p.lambda2_model - t.lambda2) / denom;
  });
  return out;
}

ConstitutiveLaw energy_model_law(const EnergyModel& model) {
  return [model](std::size_t, const Mat2& f, bool tangent) -> std::optional<PointResponse> {
    if (!(f.determinant() > 0.0)) return std::nullopt;
    const VoigtStrain e = green_strain(f);
    PointResponse r;
    r.energy = energy(model, e);
    if (!std::isfinite(r.energy)) return std::nullopt;
    const StressVector s = stress(model, e);
    const StiffnessMatrix k = tangent ? stiffness(model, e) : StiffnessMatrix::Zero();
    Mat4 dp;
    piola_response_from_material(f, s, k, r.piola, dp);
    if (tangent) r.tangent = dp;
    return r;
  };
}

namespace {

double mesh_size(const Mesh& mesh) {
  Vec2 lo = mesh.vertices.front(), hi = lo;
  for (const Vec2& v : mesh.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return std::max((hi - lo).maxCoeff(), 1e-300);
}

}  // namespace

CoarseResult static_simulate(const Mesh& mesh, const ConstitutiveLaw& law, double stiffness_value,
                             const DirichletBoundary& boundary, const CoarseOptions& options) {
  mesh.check();
  if (boundary.nodes.size() != boundary.positions.size()) {
    throw InputError("Dirichlet nodes and positions differ in length");
  }
  if (boundary.nodes.empty()) throw InputError("coarse simulation needs at least one Dirichlet node");
  if (options.load_steps < 1) throw InputError("load_steps must be positive");
  const std::size_t n = mesh.vertices.size();

  DofMap map;
  map.base = mesh.vertices;
  map.node_dof.assign(n, 0);
  std::vector<Vec2> target(n, Vec2::Zero());
  for (std::size_t i = 0; i < boundary.nodes.size(); ++i) {
    const int node = boundary.nodes[i];
    if (node < 0 || static_cast<std::size_t>(node) >= n) throw InputError("Dirichlet node index out of range");
    map.node_dof[node] = -1;
    target[node] = boundary.positions[i];
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (map.node_dof[v] == 0) map.node_dof[v] = map.n_dof_nodes++;
  }

  const ElasticSystem system(mesh, law, 1.0);
  NewtonOptions nopt;
  nopt.gradient_tol = options.gradient_tol_factor * stiffness_value * mesh_size(mesh);
  nopt.max_iterations = options.max_iterations;

  CoarseResult out;
  Eigen::VectorXd q = Eigen::VectorXd::Zero(map.size());
  double t = 0.0;
  double dt = 1.0 / options.load_steps;
  int halvings = 0;
  NewtonResult last;
  last.q = q;
  bool solved_any = false;
  while (t < 1.0) {
    const double t_next = std::min(1.0, t + dt);
    DofMap step = map;
    for (std::size_t i = 0; i < boundary.nodes.size(); ++i) {
      const int node = boundary.nodes[i];
      step.base[node] = mesh.vertices[node] + t_next * (target[node] - mesh.vertices[node]);
    }
    bool ok = false;
    NewtonResult res;
    if (system.assemble(step, q, 0).admissible) {
      res = minimize_energy(system, step, q, nopt);
      ok = res.converged;
    }
    if (!ok) {
      if (++halvings > 10) {
        throw NonConverged("coarse solve failed at load factor " + std::to_string(t_next) + ", gradient " +
                           std::to_string(res.gradient_norm));
      }
      dt *= 0.5;
      continue;
    }
    q = res.q;
    last = res;
    solved_any = true;
    out.newton_iterations += res.iterations;
    ++out.load_steps;
    t = t_next;
    map = step;
  }
  if (!solved_any) throw NonConverged("coarse solve took no step");
  out.positions = system.positions(map, q);
  out.energy = last.energy;
  out.gradient_norm = last.gradient_norm;
  return out;
}

CoarseResult coarse_simulate(const EnergyModel& model, const Mesh& mesh, const DirichletBoundary& boundary,
                             const CoarseOptions& options) {
  model.check();
  const double k0 = std::max(stiffness(model, VoigtStrain::Zero()).norm(), 1e-300);
  return static_simulate(mesh, energy_model_law(model), k0, boundary, options);
}

std::string to_string(SplitKind split) {
  switch (split) {
    case SplitKind::LowerHalfStretch: return "lower-half-stretch";
    case SplitKind::HalfDirections: return "half-directions";
    case SplitKind::None: return "none";
  }
  return "unknown";
}

SplitKind split_kind_from_string(const std::string& name) {
  if (name == "lower-half-stretch") return SplitKind::LowerHalfStretch;
  if (name == "half-directions") return SplitKind::HalfDirections;
  if (name == "none") return SplitKind::None;
  throw InputError("unknown split '" + name + "'");
}

ExtrapolationResult extrapolation_experiment(std::span<const TrainingSample> samples, SplitKind split,
                                             const FitConfig& config) {
  if (samples.empty()) throw InputError("extrapolation_experiment: no samples");
  double l_lo = samples.front().lambda1, l_hi = l_lo;
  for (const TrainingSample& s : samples) {
    if (std::isnan(s.lambda1) || std::isnan(s.theta)) throw InputError("sample lacks stretch coordinates");
    l_lo = std::min(l_lo, s.lambda1);
    l_hi = std::max(l_hi, s.lambda1);
  }
  const double mid = 0.5 * (l_lo + l_hi);
  std::vector<TrainingSample> train, test;
  for (const TrainingSample& s : samples) {
    bool in_train = true;
    if (split == SplitKind::LowerHalfStretch) in_train = s.lambda1 < mid;
    if (split == SplitKind::HalfDirections) in_train = s.theta < 0.5 * std::numbers::pi;
    (in_train ? train : test).push_back(s);
  }
  if (train.empty()) throw InputError("split leaves no training samples");
  if (test.empty()) throw InputError("split leaves no test samples");

  ExtrapolationResult out;
  out.n_train = train.size();
  out.n_test = test.size();
  auto [model, report] = greedy_fit(train, config);
  out.model = std::move(model);
  out.train_report = evaluate_errors(out.model, train, rms_normalizers(train));
  out.test_report = evaluate_errors(out.model, test, rms_normalizers(test));
  out.train_report.n_rbfs = report.n_rbfs;
  out.train_report.chosen_radius = report.chosen_radius;
  out.train_report.greedy_history = report.greedy_history;
  out.train_error_pct = out.train_report.mean_error_pct;
  out.test_error_pct = out.test_report.mean_error_pct;
  return out;
}

}  // namespace conservolast
