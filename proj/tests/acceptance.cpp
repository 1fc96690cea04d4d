// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "conservolast/baselines.hpp"
#include "conservolast/errors.hpp"
#include "conservolast/homogenize.hpp"
#include "conservolast/io.hpp"
#include "conservolast/validate.hpp"
#include "synthetic.hpp"

using namespace conservolast;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  std::string report;  // deterministic content for the repeatability check
};

std::string fmt(double x) { return format_double(x); }

std::string short_num(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

// The shared desk-scale data set: circular-hole tile on the default 12 x 12 grid.
struct HoleData {
  Tile tile;
  std::vector<TrainingSample> samples;
  double seconds = 0.0;
};

HoleData make_hole_data() {
  const auto t0 = Clock::now();
  TileSpec spec;
  spec.family = TileFamily::CircularHole;
  spec.target_elements = 800;
  HoleData d{make_tile(spec), {}, 0.0};
  d.samples = Homogenizer(d.tile).generate_training_data(SamplingGrid{}).samples;
  d.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return d;
}

FitConfig default_config() { return FitConfig{}; }

// --- 1 ---------------------------------------------------------------------

Outcome derivative_consistency() {
  std::mt19937_64 rng(1001);
  double worst_s = 0.0, worst_k = 0.0, worst_base_g = 0.0, worst_base_h = 0.0;
  std::uniform_int_distribution<int> fam(0, 3);
  std::uniform_real_distribution<double> rad(0.3, 2.0);
  std::normal_distribution<double> g;
  for (int t = 0; t < 200; ++t) {
    const EnergyModel m = testutil::random_model(rng, 1 + t % 6);
    const Vec3 e = testutil::random_vec3(rng, 0.5);
    worst_s = std::max(worst_s, testutil::rel_error(stress(m, e), testutil::fd_gradient(
                                                                      [&](const Vec3& x) { return energy(m, x); }, e)));
    worst_k = std::max(worst_k, testutil::rel_error(stiffness(m, e), testutil::fd_jacobian(
                                                                         [&](const Vec3& x) { return stress(m, x); }, e)));

    const Kernel k(static_cast<KernelFamily>(fam(rng)), rad(rng));
    EnergyInterpModel ei{k, {}, {}};
    StressInterpModel si{k, {}, {}};
    MaterialInterpModel mi{k, {}, {}};
    for (int i = 0; i < 1 + t % 5; ++i) {
      const Vec3 c = testutil::random_vec3(rng, 0.5);
      ei.centers.push_back(c);
      ei.coeffs.push_back(g(rng));
      si.centers.push_back(c);
      si.coeffs.push_back(testutil::random_vec3(rng, 1.0));
      mi.centers.push_back(c);
      mi.coeffs.push_back(testutil::random_sym3(rng, 1.0));
    }
    worst_base_g = std::max(
        {worst_base_g,
         testutil::rel_error(energy_interp_grad(ei, e),
                             testutil::fd_gradient([&](const Vec3& x) { return energy_interp_eval(ei, x); }, e)),
         testutil::rel_error(material_interp_grad(mi, e),
                             testutil::fd_gradient([&](const Vec3& x) { return material_interp_eval(mi, x); }, e))});
    worst_base_h = std::max(
        {worst_base_h,
         testutil::rel_error(energy_interp_hess(ei, e),
                             testutil::fd_jacobian([&](const Vec3& x) { return energy_interp_grad(ei, x); }, e)),
         testutil::rel_error(stress_interp_jacobian(si, e),
                             testutil::fd_jacobian([&](const Vec3& x) { return stress_interp_eval(si, x); }, e)),
         testutil::rel_error(material_interp_hess(mi, e),
                             testutil::fd_jacobian([&](const Vec3& x) { return material_interp_grad(mi, x); }, e))});
  }
  Outcome o;
  o.pass = worst_s <= 1e-6 && worst_k <= 1e-5 && worst_base_g <= 1e-6 && worst_base_h <= 1e-5;
  o.detail = "stress " + short_num(worst_s) + ", stiffness " + short_num(worst_k) + ", baseline gradients " +
             short_num(worst_base_g) + ", baseline Hessians " + short_num(worst_base_h);
  o.report = fmt(worst_s) + fmt(worst_k) + fmt(worst_base_g) + fmt(worst_base_h);
  return o;
}

// --- 2 ---------------------------------------------------------------------

// Relative closed-loop work, refined until the trapezoidal sum settles.
double loop_work(const EnergyModel& m, const Vec3& center, const Vec3& a, const Vec3& b) {
  double rel = 1.0;
  for (int n = 500; n <= 64000; n *= 2) {
    std::vector<VoigtStrain> path;
    for (int i = 0; i <= n; ++i) {
      const double t = 2.0 * std::numbers::pi * i / n;
      path.push_back(center + std::cos(t) * a + std::sin(t) * b);
    }
    double scale = 0.0;
    for (int i = 1; i <= n; ++i) scale += stress(m, path[i]).norm() * (path[i] - path[i - 1]).norm();
    rel = std::abs(work_integral(m, path)) / scale;
    if (rel <= 1e-6) break;
  }
  return rel;
}

Outcome conservativeness(const HoleData& data) {
  std::vector<EnergyModel> models;
  models.push_back(greedy_fit(data.samples, default_config()).first);
  const auto synth = testutil::samples_of(testutil::known_model(), 60);
  models.push_back(greedy_fit(synth, default_config()).first);

  std::mt19937_64 rng(2002);
  double worst_loop = 0.0;
  for (const EnergyModel& m : models) {
    Vec3 mean = Vec3::Zero();
    for (const TrainingSample& s : data.samples) mean += s.strain;
    mean /= static_cast<double>(data.samples.size());
    for (int l = 0; l < 10; ++l) {
      worst_loop = std::max(worst_loop, loop_work(m, 0.5 * mean, testutil::random_vec3(rng, 0.2),
                                                  testutil::random_vec3(rng, 0.2)));
    }
  }
  const double k_rms = rms_normalizers(data.samples).k_rms;
  double worst_curl = 0.0;
  for (double c : curl_report(StressField::of(models[0]), data.samples, k_rms)) worst_curl = std::max(worst_curl, c);

  const FitConfig cfg = default_config();
  const auto centers = kmeans_centers(data.samples, 10, cfg.kmeans_seed);
  const BaselineFit interp = sweep_baseline(BaselineKind::StressInterp, data.samples, centers, cfg.kernel_family,
                                            cfg.radius_grid, TargetSet::Stress);
  double interp_curl = 0.0;
  for (double c : curl_report(interp.field(), data.samples, k_rms)) interp_curl = std::max(interp_curl, c);

  Outcome o;
  o.pass = worst_loop <= 1e-6 && worst_curl <= 1e-6 && interp_curl >= 5.0;
  o.detail = "loop work " + short_num(worst_loop) + ", model curl " + short_num(worst_curl) +
             "%, stress-interpolation curl " + short_num(interp_curl) + "%";
  o.report = fmt(worst_loop) + fmt(worst_curl) + fmt(interp_curl);
  return o;
}

// --- 3 ---------------------------------------------------------------------

Outcome synthetic_recovery() {
  const EnergyModel truth = testutil::known_model();
  const auto samples = testutil::samples_of(truth, 60);
  const auto [exact, exact_rep] = solve_coefficients(samples, truth.centers, truth.kernel);
  FitConfig cfg = default_config();
  cfg.target_error = 0.005;
  const auto [greedy, greedy_rep] = greedy_fit(samples, cfg);
  Outcome o;
  o.pass = exact_rep.stress_error_pct <= 1e-8 && exact_rep.stiffness_error_pct <= 1e-8 &&
           greedy_rep.mean_error_pct <= 0.5 && greedy_rep.n_rbfs <= 19;
  o.detail = "true centers " + short_num(exact_rep.stress_error_pct) + "% / " +
             short_num(exact_rep.stiffness_error_pct) + "%, greedy " + short_num(greedy_rep.mean_error_pct) +
             "% with " + std::to_string(greedy_rep.n_rbfs) + " RBFs";
  o.report = fmt(exact_rep.stress_error_pct) + fmt(exact_rep.stiffness_error_pct) +
             fmt(greedy_rep.mean_error_pct) + std::to_string(greedy_rep.n_rbfs);
  return o;
}

// --- 4 ---------------------------------------------------------------------

Outcome homogenization_oracle(const HoleData& data) {
  TileSpec spec;
  spec.family = TileFamily::Solid;
  spec.target_elements = 200;
  const Tile solid = make_tile(spec);
  const Homogenizer hs(solid);
  const NeoHookean& mat = solid.mesh.materials.front();
  double worst_solid = 0.0;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      const double l1 = 0.9 + 1.1 * i / 4.0, theta = j * std::numbers::pi / 5.0;
      const OrthogonalStretch os = hs.orthogonal_stretch_search(l1, theta);
      StressVector s;
      StiffnessMatrix k;
      hs.response(os.state, s, k);
      const VoigtStrain e = MacroDeformation{l1, os.lambda2, theta}.strain();
      worst_solid = std::max({worst_solid, testutil::rel_error(s, mat.stress_green(e)),
                              testutil::rel_error(k, mat.stiffness_green(e))});
    }
  }

  const Homogenizer hh(data.tile);
  double worst_schur = 0.0;
  for (const VoigtStrain& e : {VoigtStrain(0.0, 0.0, 0.0), VoigtStrain(0.3, -0.1, 0.2), VoigtStrain(-0.05, 0.4, -0.3)}) {
    const EquilibriumState st = hh.equilibrate(e);
    const StiffnessMatrix k = hh.stiffness(st);
    const double h = 1e-5;
    Mat3 fd;
    for (int c = 0; c < 3; ++c) {
      const VoigtStrain d = h * VoigtStrain::Unit(c);
      fd.col(c) = (hh.stress(hh.equilibrate(VoigtStrain(e + d), &st)) - hh.stress(hh.equilibrate(VoigtStrain(e - d), &st))) /
                  (2 * h);
    }
    worst_schur = std::max(worst_schur, testutil::rel_error(k, fd));
  }
  Outcome o;
  o.pass = worst_solid <= 1e-6 && worst_schur <= 1e-3;
  o.detail = "solid tile " + short_num(worst_solid) + ", hole-tile Schur vs re-equilibrated FD " +
             short_num(worst_schur) + " (" + std::to_string(data.tile.mesh.triangles.size()) + " elements)";
  o.report = fmt(worst_solid) + fmt(worst_schur);
  return o;
}

// --- 5, 6 ------------------------------------------------------------------

struct HoleFit {
  EnergyModel model;
  FitReport report;
};

Outcome end_to_end_fit(const HoleData& data, const HoleFit& fit) {
  Outcome o;
  o.pass = data.samples.size() == 432 && fit.report.stress_error_pct <= 6.0 && fit.report.stiffness_error_pct <= 25.0 &&
           fit.report.n_rbfs <= 19;
  o.detail = std::to_string(data.samples.size()) + " samples, " + std::to_string(fit.report.n_rbfs) +
             " RBFs, stress " + short_num(fit.report.stress_error_pct) + "%, stiffness " +
             short_num(fit.report.stiffness_error_pct) + "%";
  o.report = fmt(fit.report.stress_error_pct) + fmt(fit.report.stiffness_error_pct) +
             std::to_string(fit.report.n_rbfs) + fit_report_to_json(fit.report).dump();
  return o;
}

Outcome orthogonal(const HoleData& data, const HoleFit& fit) {
  const auto targets = orthogonal_targets(data.samples);
  Outcome o;
  double worst = 0.0, mean = 0.0;
  try {
    const auto points = orthogonal_validation(fit.model, targets);
    for (const OrthogonalPoint& p : points) {
      worst = std::max(worst, p.error_pct);
      mean += p.error_pct / points.size();
      o.report += fmt(p.lambda2_model);
    }
    o.pass = targets.size() == 144 && worst <= 15.0;
    o.detail = std::to_string(points.size()) + " points, worst " + short_num(worst) + "%, mean " + short_num(mean) + "%";
  } catch (const NumericalError& e) {
    o.pass = false;
    o.detail = e.what();
    o.report = e.what();
  }
  return o;
}

// --- 7 ---------------------------------------------------------------------

Outcome ablation(const HoleData& data) {
  const auto rows = stress_stiffness_ablation(data.samples, default_config());
  const auto energy_rows = energy_interp_comparison(data.samples, default_config());
  const AblationRow &stress_only = rows[0], &stiffness_only = rows[1], &combined = rows[2];
  const AblationRow &energy_fit = energy_rows[0], &ours = energy_rows[2];
  const double combined_max = std::max(combined.stress_error_pct, combined.stiffness_error_pct);
  bool counts = true;
  for (const AblationRow& r : rows) counts = counts && r.parameter_count == 36;
  for (const AblationRow& r : energy_rows) counts = counts && r.parameter_count == 54;
  Outcome o;
  o.pass = counts && combined_max < stress_only.stiffness_error_pct && combined_max < stiffness_only.stress_error_pct &&
           ours.stress_error_pct < energy_fit.stress_error_pct &&
           ours.stiffness_error_pct < energy_fit.stiffness_error_pct;
  o.detail = "36 params: combined max " + short_num(combined_max) + "% vs stress-only stiffness " +
             short_num(stress_only.stiffness_error_pct) + "% and stiffness-only stress " +
             short_num(stiffness_only.stress_error_pct) + "%; 54 params: ours " + short_num(ours.stress_error_pct) +
             "%/" + short_num(ours.stiffness_error_pct) + "% vs energy interpolation " +
             short_num(energy_fit.stress_error_pct) + "%/" + short_num(energy_fit.stiffness_error_pct) + "%";
  o.report = ablation_to_json("ablation", rows).dump() + ablation_to_json("energy-interp", energy_rows).dump();
  return o;
}

// --- 8 ---------------------------------------------------------------------

Outcome kernel_parity(const HoleData& data) {
  const auto rows = kernel_comparison(data.samples, 10, default_config());
  double lo = 1e300, hi = -1e300;
  std::string detail;
  for (const KernelRow& r : rows) {
    lo = std::min(lo, r.mean_error_pct);
    hi = std::max(hi, r.mean_error_pct);
    detail += (detail.empty() ? "" : ", ") + to_string(r.family) + " " + short_num(r.mean_error_pct) + "%";
  }
  Outcome o;
  o.pass = rows.size() == 4 && hi - lo <= 3.0;
  o.detail = detail + "; spread " + short_num(hi - lo) + " points";
  o.report = kernel_rows_to_json(rows).dump();
  return o;
}

// --- 9 ---------------------------------------------------------------------

Outcome extrapolation(const HoleData& data) {
  const ExtrapolationResult r = extrapolation_experiment(data.samples, SplitKind::LowerHalfStretch, default_config());
  Outcome o;
  o.pass = r.test_error_pct >= 3.0 * r.train_error_pct;
  o.detail = "train " + short_num(r.train_error_pct) + "%, test " + short_num(r.test_error_pct) + "% (" +
             std::to_string(r.n_train) + "/" + std::to_string(r.n_test) + " samples)";
  o.report = extrapolation_to_json(r, SplitKind::LowerHalfStretch).dump();
  return o;
}

struct Line {
  int id;
  std::string name;
  double limit_s;
  Outcome outcome;
  double seconds;
};

template <typename F>
Line timed(int id, const std::string& name, double limit_s, F&& body, double extra_seconds = 0.0) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
    o.report = o.detail;
  }
  const double s = std::chrono::duration<double>(Clock::now() - t0).count() + extra_seconds;
  return {id, name, limit_s, o, s};
}

// Criteria 3 to 9 from scratch, including the data generation.
std::vector<Line> run_pipeline() {
  std::vector<Line> lines;
  const HoleData data = make_hole_data();
  lines.push_back(timed(3, "synthetic recovery", 30, synthetic_recovery));
  lines.push_back(timed(4, "homogenization oracle", 120, [&] { return homogenization_oracle(data); }));
  HoleFit fit;
  lines.push_back(timed(
      5, "end-to-end hole-tile fit", 600,
      [&] {
        auto [m, r] = greedy_fit(data.samples, default_config());
        fit = {std::move(m), std::move(r)};
        return end_to_end_fit(data, fit);
      },
      data.seconds));
  lines.push_back(timed(6, "orthogonal validation", 120, [&] { return orthogonal(data, fit); }));
  lines.push_back(timed(7, "ablation direction", 600, [&] { return ablation(data); }));
  lines.push_back(timed(8, "kernel parity", 600, [&] { return kernel_parity(data); }));
  lines.push_back(timed(9, "extrapolation direction", 600, [&] { return extrapolation(data); }));
  return lines;
}

}  // namespace

int main() {
  std::vector<Line> lines;
  lines.push_back(timed(1, "derivative consistency", 10, derivative_consistency));
  const HoleData shared = make_hole_data();
  lines.push_back(timed(2, "conservativeness", 60, [&] { return conservativeness(shared); }));

  std::vector<Line> first = run_pipeline();
  std::vector<Line> second = run_pipeline();
  lines.insert(lines.end(), first.begin(), first.end());

  std::string mismatch;
  for (std::size_t i = 0; i < first.size(); ++i) {
    if (first[i].outcome.report != second[i].outcome.report) {
      mismatch += (mismatch.empty() ? "" : ", ") + std::to_string(first[i].id);
    }
  }
  Outcome det;
  det.pass = mismatch.empty();
  det.detail = det.pass ? "criteria 3-9 rerun byte-identical" : "reports differ for criteria " + mismatch;
  lines.push_back({10, "determinism", 0, det, 0.0});

  bool all = true;
  for (const Line& l : lines) {
    const bool in_time = l.limit_s <= 0 || l.seconds <= l.limit_s;
    const bool pass = l.outcome.pass && in_time;
    all = all && pass;
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << l.id << " " << l.name << ": " << l.outcome.detail;
    if (l.limit_s > 0) std::cout << " [" << short_num(l.seconds) << " s, limit " << l.limit_s << " s]";
    std::cout << '\n';
  }
  return all ? 0 : 1;
}
