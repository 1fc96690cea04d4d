#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "conservolast/errors.hpp"
#include "conservolast/homogenize.hpp"
#include "conservolast/validate.hpp"
#include "synthetic.hpp"

using namespace conservolast;

namespace {

// Quadratic energy in Green strain with plane-strain Lame constants.
EnergyModel svk_model(double lambda, double mu) {
  EnergyModel m;
  m.stiffness_offset << lambda + 2 * mu, lambda, 0, lambda, lambda + 2 * mu, 0, 0, 0, mu;
  return m;
}

// Uniaxial principal stretch with a traction-free lateral direction.
double svk_lambda2(double lambda, double mu, double lambda1) {
  const double e1 = 0.5 * (lambda1 * lambda1 - 1.0);
  const double e2 = -lambda * e1 / (lambda + 2 * mu);
  return std::sqrt(1.0 + 2.0 * e2);
}

std::vector<TrainingSample> grid_samples(const EnergyModel& m) {
  std::vector<TrainingSample> out;
  for (int i = 0; i < 6; ++i) {
    for (int t = 0; t < 4; ++t) {
      for (double l2 : {0.9, 1.0, 1.05}) {
        TrainingSample s;
        s.lambda1 = 0.9 + 0.1 * i;
        s.lambda2 = l2;
        s.theta = t * std::numbers::pi / 4;
        s.strain = MacroDeformation{s.lambda1, s.lambda2, s.theta}.strain();
        s.stress = stress(m, s.strain);
        s.stiffness = stiffness(m, s.strain);
        out.push_back(s);
      }
    }
  }
  return out;
}

std::vector<int> nodes_where(const Mesh& m, const std::function<bool(const Vec2&)>& pred) {
  std::vector<int> out;
  for (std::size_t v = 0; v < m.vertices.size(); ++v)
    if (pred(m.vertices[v])) out.push_back(static_cast<int>(v));
  return out;
}

}  // namespace

TEST(ErrorTable, SelfFitIsExact) {
  const EnergyModel truth = testutil::known_model();
  const auto samples = testutil::samples_of(truth, 60);
  const auto [fit, rep] = solve_coefficients(samples, truth.centers, truth.kernel);
  const ValidationReport v = error_table(fit, samples);
  for (const SampleError& e : v.per_sample) {
    EXPECT_LE(e.stress_pct, 1e-8);
    EXPECT_LE(e.stiffness_pct, 1e-8);
  }
  EXPECT_EQ(v.per_sample.size(), samples.size());
}

TEST(ErrorTable, ZeroModelIsHundredPercent) {
  const auto samples = testutil::samples_of(testutil::known_model(), 20);
  const ValidationReport v = error_table(EnergyModel{}, samples);
  EXPECT_NEAR(v.stress_error_pct, 100.0, 1e-10);
  EXPECT_NEAR(v.stiffness_error_pct, 100.0, 1e-10);
}

TEST(OrthogonalValidation, UnstretchedDirectionStaysAtOne) {
  const EnergyModel m = testutil::known_model();
  const std::vector<OrthogonalTarget> t{{1.0, 0.0, 1.0}, {1.0, 1.2, 1.0}};
  for (const OrthogonalPoint& p : orthogonal_validation(m, t)) {
    EXPECT_NEAR(p.lambda2_model, 1.0, 1e-12);
    EXPECT_NEAR(p.error_pct, 0.0, 1e-8);
  }
}

TEST(OrthogonalValidation, LinearIsotropicPoissonContraction) {
  const double lambda = 1.5, mu = 0.7;
  const EnergyModel m = svk_model(lambda, mu);
  for (double l1 : {0.9, 1.2, 1.6}) {
    for (double theta : {0.0, 0.4, 2.0}) {
      EXPECT_NEAR(model_orthogonal_stretch(m, l1, theta), svk_lambda2(lambda, mu, l1), 1e-6);
    }
  }
}

TEST(OrthogonalValidation, RecoversStretchesOfRefitData) {
  const EnergyModel truth = testutil::known_model();
  std::vector<OrthogonalTarget> targets;
  for (double l1 : {0.95, 1.05, 1.15})
    for (double theta : {0.0, 0.8, 1.6, 2.4}) targets.push_back({l1, theta, model_orthogonal_stretch(truth, l1, theta)});
  std::vector<TrainingSample> samples;
  for (const OrthogonalTarget& t : targets) {
    for (double off : {-0.05, 0.0, 0.05}) {
      TrainingSample s;
      s.strain = MacroDeformation{t.lambda1, t.lambda2 + off, t.theta}.strain();
      s.stress = stress(truth, s.strain);
      s.stiffness = stiffness(truth, s.strain);
      samples.push_back(s);
    }
  }
  FitConfig cfg;
  cfg.target_error = 0.001;
  const auto [fit, rep] = greedy_fit(samples, cfg);
  for (const OrthogonalPoint& p : orthogonal_validation(fit, targets)) EXPECT_LE(p.error_pct, 1.0);
}

TEST(OrthogonalValidation, MissingMinimumIsReported) {
  EnergyModel m;
  m.stress_offset = Vec3(1.0, 1.0, 0.0);
  m.stiffness_offset = Mat3::Identity() * 1e-3;
  EXPECT_THROW(model_orthogonal_stretch(m, 1.2, 0.0), NoMinimum);
}

TEST(OrthogonalTargets, PicksTheMiddleStretch) {
  std::vector<TrainingSample> s(3);
  for (int i = 0; i < 3; ++i) {
    s[i].lambda1 = 1.1;
    s[i].theta = 0.5;
  }
  s[0].lambda2 = 0.9;
  s[1].lambda2 = 0.85;
  s[2].lambda2 = 0.95;
  const auto t = orthogonal_targets(s);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_DOUBLE_EQ(t[0].lambda2, 0.9);
}

TEST(CoarseSimulation, LawGradientMatchesFiniteDifferences) {
  const EnergyModel m = testutil::known_model();
  const Mesh mesh = rectangle_mesh(1.0, 1.0, 3, 3, NeoHookean{});
  const ElasticSystem sys(mesh, energy_model_law(m), 1.0);
  DofMap map;
  map.base = mesh.vertices;
  map.node_dof.resize(mesh.vertices.size());
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) map.node_dof[v] = map.n_dof_nodes++;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-0.03, 0.03);
  Eigen::VectorXd q(map.size());
  for (Eigen::Index i = 0; i < q.size(); ++i) q(i) = u(rng);
  const Assembly a = sys.assemble(map, q, 2);
  Eigen::VectorXd fd(q.size());
  Eigen::MatrixXd fd_h(q.size(), q.size());
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(q.size());
    d(i) = h;
    const Assembly p = sys.assemble(map, q + d, 1), n = sys.assemble(map, q - d, 1);
    fd(i) = (p.energy - n.energy) / (2 * h);
    fd_h.col(i) = (p.gradient - n.gradient) / (2 * h);
  }
  EXPECT_LT((a.gradient - fd).norm(), 1e-6 * a.gradient.norm());
  EXPECT_LT((Eigen::MatrixXd(a.hessian) - fd_h).norm(), 1e-6 * fd_h.norm());
}

TEST(CoarseSimulation, UniformStretchIsHomogeneous) {
  const double lambda = 1.5, mu = 0.7, l1 = 1.2;
  const EnergyModel m = svk_model(lambda, mu);
  const Mesh mesh = rectangle_mesh(2.0, 1.0, 6, 3, NeoHookean{});
  Mat2 f = Mat2::Identity();
  f(0, 0) = svk_lambda2(lambda, mu, l1);
  f(1, 1) = l1;
  // Clamp bottom and top at the homogeneous solution; the sides are free.
  DirichletBoundary bc;
  bc.nodes = nodes_where(mesh, [](const Vec2& x) { return x.y() < 1e-12 || x.y() > 1.0 - 1e-12; });
  for (int n : bc.nodes) bc.positions.push_back(f * mesh.vertices[n]);
  const CoarseResult r = coarse_simulate(m, mesh, bc);
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    EXPECT_LT((r.positions[v] - f * mesh.vertices[v]).norm(), 1e-6);
  }
}

TEST(CoarseSimulation, ZeroDisplacementKeepsRestState) {
  const Mesh mesh = rectangle_mesh(1.0, 1.0, 2, 2, NeoHookean{});
  DirichletBoundary bc;
  bc.nodes = nodes_where(mesh, [](const Vec2& x) { return x.y() < 1e-12; });
  for (int n : bc.nodes) bc.positions.push_back(mesh.vertices[n]);
  const CoarseResult r = coarse_simulate(testutil::known_model(), mesh, bc);
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) EXPECT_LT((r.positions[v] - mesh.vertices[v]).norm(), 1e-10);
}

TEST(CoarseSimulation, RejectsEmptyBoundary) {
  const Mesh mesh = rectangle_mesh(1.0, 1.0, 2, 2, NeoHookean{});
  EXPECT_THROW(coarse_simulate(testutil::known_model(), mesh, DirichletBoundary{}), InputError);
}

TEST(CoarseSimulation, FittedHoleTileTracksMicrostructure) {
  TileSpec spec;
  spec.family = TileFamily::CircularHole;
  spec.target_elements = 200;
  const Tile tile = make_tile(spec);
  const GenerationResult data = Homogenizer(tile).generate_training_data(SamplingGrid{});
  const EnergyModel model = greedy_fit(data.samples, FitConfig{}).first;

  const int n = 6;
  const double stretch = 1.15;
  const Mesh fine = tile_patch(tile, n, n);
  const Mesh coarse = rectangle_mesh(n, n, n, n, NeoHookean{});
  auto clamp = [&](const Mesh& m) {
    DirichletBoundary bc;
    bc.nodes = nodes_where(m, [&](const Vec2& x) { return x.y() < 1e-9 || x.y() > n - 1e-9; });
    for (int v : bc.nodes) bc.positions.push_back(Vec2(m.vertices[v].x(), stretch * m.vertices[v].y()));
    return bc;
  };
  const CoarseResult fr = static_simulate(fine, neo_hookean_law(fine), fine.stiffness_scale(), clamp(fine));
  const CoarseResult cr = coarse_simulate(model, coarse, clamp(coarse));

  // Lateral displacement of the free sides: coarse nodes against the fine
  // boundary averaged over the same height window.
  double worst = 0.0, scale = 0.0;
  for (std::size_t v = 0; v < coarse.vertices.size(); ++v) {
    const Vec2 xc = coarse.vertices[v];
    if (!(xc.x() < 1e-9 || xc.x() > n - 1e-9) || xc.y() < 1e-9 || xc.y() > n - 1e-9) continue;
    double sum = 0.0;
    int count = 0;
    for (std::size_t w = 0; w < fine.vertices.size(); ++w) {
      const Vec2 xf = fine.vertices[w];
      if (std::abs(xf.x() - xc.x()) < 1e-9 && std::abs(xf.y() - xc.y()) <= 0.5) {
        sum += fr.positions[w].x() - xf.x();
        ++count;
      }
    }
    ASSERT_GT(count, 0);
    const double fine_u = sum / count, coarse_u = cr.positions[v].x() - xc.x();
    worst = std::max(worst, std::abs(fine_u - coarse_u));
    scale = std::max(scale, std::abs(fine_u));
  }
  ASSERT_GT(scale, 0.0);
  EXPECT_LE(worst, 0.1 * scale) << "worst " << worst << " scale " << scale;
}

TEST(Extrapolation, QuadraticDataExtrapolates) {
  const auto samples = grid_samples(svk_model(1.0, 0.5));
  for (SplitKind split : {SplitKind::LowerHalfStretch, SplitKind::HalfDirections}) {
    const ExtrapolationResult r = extrapolation_experiment(samples, split, FitConfig{});
    EXPECT_GT(r.n_train, 0u);
    EXPECT_GT(r.n_test, 0u);
    EXPECT_LT(r.train_error_pct, 1e-6);
    EXPECT_LT(r.test_error_pct, 1e-6);
  }
}

TEST(Extrapolation, SplitMustLeaveBothParts) {
  const auto samples = grid_samples(svk_model(1.0, 0.5));
  EXPECT_THROW(extrapolation_experiment(samples, SplitKind::None, FitConfig{}), InputError);
  auto bare = testutil::samples_of(testutil::known_model(), 10);
  EXPECT_THROW(extrapolation_experiment(bare, SplitKind::LowerHalfStretch, FitConfig{}), InputError);
  EXPECT_EQ(split_kind_from_string(to_string(SplitKind::HalfDirections)), SplitKind::HalfDirections);
}
