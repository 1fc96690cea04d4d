#include <gtest/gtest.h>

#include <cmath>

#include "conservolast/errors.hpp"
#include "conservolast/fit.hpp"
#include "synthetic.hpp"

using namespace conservolast;

TEST(LeastSquares, MatchesOrthogonalFactorization) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(40, 6);
  Eigen::VectorXd b(40);
  for (int i = 0; i < 40; ++i) {
    b(i) = g(rng);
    for (int j = 0; j < 6; ++j) a(i, j) = g(rng) * (j + 1) * 10.0;
  }
  const LinearSolve s = solve_least_squares(a, b, 1e12);
  const Eigen::VectorXd ref = a.colPivHouseholderQr().solve(b);
  EXPECT_LT((s.x - ref).norm(), 1e-10 * ref.norm());
  EXPECT_FALSE(s.regularized);
  EXPECT_GE(s.condition_estimate, 1.0);
}

TEST(LeastSquares, DependentColumnsAreIllConditioned) {
  Eigen::MatrixXd a(5, 2);
  a << 1, 2, 2, 4, 3, 6, 4, 8, 5, 10;
  EXPECT_THROW(solve_least_squares(a, Eigen::VectorXd::Ones(5), 1e12), IllConditioned);
}

TEST(FitTerms, ParameterCounts) {
  FitTerms combined;
  EXPECT_EQ(combined.parameter_count(3), 36);
  EXPECT_EQ(combined.parameter_count(5), 54);
  FitTerms stress_only;
  stress_only.hess_interpolants = false;
  stress_only.stiffness_offset = false;
  EXPECT_EQ(stress_only.parameter_count(11), 36);
  FitTerms stiffness_only;
  stiffness_only.grad_interpolants = false;
  EXPECT_EQ(stiffness_only.parameter_count(5), 36);
}

TEST(FitTerms, ScoreFollowsWeights) {
  FitTerms t;
  EXPECT_DOUBLE_EQ(t.score(2.0, 4.0), 3.0);
  t.stiffness_weight = 0.0;
  EXPECT_DOUBLE_EQ(t.score(2.0, 4.0), 2.0);
  t.stiffness_weight = 1.0;
  t.stress_weight = 0.0;
  EXPECT_DOUBLE_EQ(t.score(2.0, 4.0), 4.0);
}

TEST(Normalizers, RootMeanSquareOfNorms) {
  std::vector<TrainingSample> s(2);
  s[0].stress = Vec3(3, 4, 0);
  s[1].stress = Vec3::Zero();
  s[0].stiffness = Mat3::Identity();
  s[1].stiffness = 2 * Mat3::Identity();
  s[1].flags = kFlagNoStiffness;
  const Normalizers n = rms_normalizers(s);
  EXPECT_DOUBLE_EQ(n.s_rms, std::sqrt(25.0 / 2.0));
  EXPECT_DOUBLE_EQ(n.k_rms, std::sqrt(3.0));
  EXPECT_THROW(rms_normalizers(std::vector<TrainingSample>{}), InputError);
}

TEST(Errors, ZeroModelGivesHundredPercent) {
  const auto samples = testutil::samples_of(testutil::known_model(), 30);
  const FitReport r = evaluate_errors(EnergyModel{}, samples, rms_normalizers(samples));
  EXPECT_NEAR(r.stress_error_pct, 100.0, 1e-10);
  EXPECT_NEAR(r.stiffness_error_pct, 100.0, 1e-10);
}

TEST(Errors, AggregateIsRmsOfPerSample) {
  const auto samples = testutil::samples_of(testutil::known_model(), 30);
  EnergyModel m;
  m.stiffness_offset = Mat3::Identity();
  const FitReport r = evaluate_errors(m, samples, rms_normalizers(samples));
  double ss = 0.0, kk = 0.0;
  for (const SampleError& e : r.per_sample_errors) {
    ss += e.stress_pct * e.stress_pct;
    kk += e.stiffness_pct * e.stiffness_pct;
  }
  EXPECT_NEAR(r.stress_error_pct, std::sqrt(ss / 30), 1e-10);
  EXPECT_NEAR(r.stiffness_error_pct, std::sqrt(kk / 30), 1e-10);
  EXPECT_DOUBLE_EQ(r.mean_error_pct, 0.5 * (r.stress_error_pct + r.stiffness_error_pct));
}

TEST(SolveCoefficients, RecoversKnownModelWithTrueCenters) {
  const EnergyModel truth = testutil::known_model();
  const auto samples = testutil::samples_of(truth, 60);
  const auto [fit, rep] = solve_coefficients(samples, truth.centers, truth.kernel);
  EXPECT_LE(rep.stress_error_pct, 1e-8);
  EXPECT_LE(rep.stiffness_error_pct, 1e-8);
  EXPECT_LT(stress(fit, Vec3::Zero()).norm(), 1e-12);
  EXPECT_EQ(rep.parameter_count, 9 * 5 + 6 + 3);
}

TEST(SolveCoefficients, QuadraticDataNeedsNoCenters) {
  Mat3 k;
  k << 3, 1, 0.2, 1, 2, 0.1, 0.2, 0.1, 1;
  EnergyModel truth;
  truth.stiffness_offset = k;
  const auto samples = testutil::samples_of(truth, 20);
  const auto [fit, rep] = solve_coefficients(samples, {}, Kernel(KernelFamily::Multiquadric, 1.0));
  EXPECT_LT((fit.stiffness_offset - k).norm(), 1e-12);
  EXPECT_LE(rep.mean_error_pct, 1e-10);
}

TEST(SolveCoefficients, StressOnlyFitIgnoresStiffnessRows) {
  const EnergyModel truth = testutil::known_model();
  const auto samples = testutil::samples_of(truth, 60);
  auto garbled = samples;
  for (auto& s : garbled) s.stiffness = 1e3 * Mat3::Identity();
  FitTerms terms;
  terms.hess_interpolants = false;
  terms.stiffness_offset = false;
  terms.stiffness_weight = 0.0;
  const auto [fit, rep] = solve_coefficients(samples, truth.centers, truth.kernel, terms);
  const auto [fit2, rep2] = solve_coefficients(garbled, truth.centers, truth.kernel, terms);
  EXPECT_TRUE(fit.hess_coeffs.empty());
  EXPECT_EQ(fit.stiffness_offset, Mat3::Zero());
  EXPECT_LT(stress(fit, Vec3::Zero()).norm(), 1e-12);
  ASSERT_EQ(fit.grad_coeffs.size(), fit2.grad_coeffs.size());
  for (std::size_t i = 0; i < fit.grad_coeffs.size(); ++i) {
    EXPECT_LT((fit.grad_coeffs[i] - fit2.grad_coeffs[i]).norm(), 1e-12 * (1.0 + fit.grad_coeffs[i].norm()));
  }
}

TEST(SolveCoefficients, RejectsDuplicateCenters) {
  const auto samples = testutil::samples_of(testutil::known_model(), 20);
  const std::vector<VoigtStrain> centers{Vec3(0.1, 0, 0), Vec3(0.1, 0, 0)};
  EXPECT_THROW(solve_coefficients(samples, centers, Kernel(KernelFamily::Multiquadric, 1.0)), DuplicateCenters);
}

TEST(RadiusScale, MeanNearestNeighborDistance) {
  const std::vector<VoigtStrain> c{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(3, 0, 0)};
  EXPECT_DOUBLE_EQ(radius_scale({}, c), (1.0 + 1.0 + 2.0) / 3.0);
  std::vector<TrainingSample> s(2);
  s[0].strain = Vec3(1, 0, 0);
  s[1].strain = Vec3(-1, 0, 0);
  EXPECT_DOUBLE_EQ(radius_scale(s, std::vector<VoigtStrain>{Vec3::Zero()}), 1.0);
}

TEST(SweepRadius, PicksSmallestObjectiveAndRecordsCandidates) {
  const EnergyModel truth = testutil::known_model();
  const auto samples = testutil::samples_of(truth, 60);
  const auto grid = default_radius_grid();
  ASSERT_EQ(grid.size(), 16u);
  EXPECT_NEAR(grid.front(), 0.1, 1e-15);
  EXPECT_NEAR(grid.back(), 10.0, 1e-12);
  const SweepResult sw = sweep_radius(samples, truth.centers, KernelFamily::Multiquadric, grid);
  ASSERT_EQ(sw.report.radius_sweep.size(), grid.size());
  for (const RadiusCandidate& c : sw.report.radius_sweep) {
    if (c.feasible) EXPECT_GE(c.objective, sw.report.objective);
  }
}

TEST(SweepRadius, AllIllConditionedGridThrows) {
  const EnergyModel truth = testutil::known_model();
  const auto samples = testutil::samples_of(truth, 60);
  const std::vector<double> grid{1e6, 1e7};
  EXPECT_THROW(sweep_radius(samples, truth.centers, KernelFamily::Multiquadric, grid), AllIllConditioned);
}

TEST(GreedyFit, ReachesHalfPercentWithoutTrueCenters) {
  const auto samples = testutil::samples_of(testutil::known_model(), 60);
  FitConfig cfg;
  cfg.target_error = 0.005;
  const auto [model, rep] = greedy_fit(samples, cfg);
  EXPECT_LE(rep.mean_error_pct, 0.5);
  EXPECT_LE(rep.n_rbfs, 19);
  ASSERT_FALSE(rep.greedy_history.empty());
  EXPECT_EQ(rep.greedy_history.front().n_rbfs, 0);
  for (std::size_t i = 1; i < rep.greedy_history.size(); ++i) {
    EXPECT_LE(rep.greedy_history[i].best_so_far_pct, rep.greedy_history[i - 1].best_so_far_pct);
  }
}

TEST(GreedyFit, DeterministicUnderSeed) {
  const auto samples = testutil::samples_of(testutil::known_model(), 60);
  FitConfig cfg;
  cfg.max_rbfs = 6;
  cfg.target_error = 0.0;
  const auto a = greedy_fit(samples, cfg), b = greedy_fit(samples, cfg);
  EXPECT_EQ(a.second.stress_error_pct, b.second.stress_error_pct);
  EXPECT_EQ(a.second.stiffness_error_pct, b.second.stiffness_error_pct);
  EXPECT_EQ(a.first.kernel, b.first.kernel);
}

TEST(FitConfig, RejectsBadValues) {
  FitConfig c;
  c.radius_grid = {};
  EXPECT_THROW(c.check(), InputError);
  c = FitConfig{};
  c.max_rbfs = -1;
  EXPECT_THROW(c.check(), InputError);
}
