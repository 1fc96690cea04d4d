#include "conservolast/homogenize.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "conservolast/errors.hpp"
#include "conservolast/parallel.hpp"
#include "conservolast/roots.hpp"

namespace conservolast {

namespace {

constexpr double kPi = 3.14159265358979323846;

Mat2 rotation(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return (Mat2() << c, -s, s, c).finished();
}

}  // namespace

Mat2 MacroDeformation::gradient() const {
  const Mat2 r = rotation(theta);
  return r * Eigen::Vector2d(lambda1, lambda2).asDiagonal() * r.transpose();
}

VoigtStrain MacroDeformation::strain() const { return green_strain(gradient()); }

void strain_lambda2_derivatives(const MacroDeformation& m, VoigtStrain& d1, VoigtStrain& d2) {
  const Vec2 n(-std::sin(m.theta), std::cos(m.theta));
  d2 = VoigtStrain(n.x() * n.x(), n.y() * n.y(), 2.0 * n.x() * n.y());
  d1 = m.lambda2 * d2;
}

std::vector<double> SamplingGrid::lambda1_values() const {
  std::vector<double> v(std::max(0, n_lambda1));
  for (int i = 0; i < n_lambda1; ++i) {
    v[i] = n_lambda1 == 1 ? lambda1_lo : lambda1_lo + (lambda1_hi - lambda1_lo) * i / (n_lambda1 - 1);
  }
  return v;
}

std::vector<double> SamplingGrid::theta_values() const {
  std::vector<double> v(std::max(0, n_theta));
  for (int k = 0; k < n_theta; ++k) v[k] = kPi * k / n_theta;
  return v;
}

Homogenizer::Homogenizer(const Tile& tile)
    : tile_(&tile), system_(tile.mesh, neo_hookean_law(tile.mesh), 1.0 / tile.area()) {
  tile.check();
  const std::vector<int> master = tile.master_of();
  const int pinned = master[0];
  std::map<int, int> class_dof;
  node_dof_.assign(master.size(), -1);
  for (std::size_t n = 0; n < master.size(); ++n) {
    if (master[n] == pinned) continue;
    auto [it, inserted] = class_dof.try_emplace(master[n], n_dof_nodes_);
    if (inserted) ++n_dof_nodes_;
    node_dof_[n] = it->second;
  }
}

double Homogenizer::gradient_tolerance() const {
  return 1e-9 * stiffness_scale() / static_cast<double>(tile_->mesh.triangles.size());
}

DofMap Homogenizer::dof_map(const Mat2& macro_f) const {
  DofMap map;
  map.node_dof = node_dof_;
  map.n_dof_nodes = n_dof_nodes_;
  map.base.reserve(tile_->mesh.vertices.size());
  for (const Vec2& x : tile_->mesh.vertices) map.base.push_back(macro_f * x);
  return map;
}

EquilibriumState Homogenizer::equilibrate(const Mat2& macro_f, const EquilibriumState* warm) const {
  if (!(macro_f.determinant() > 0.0)) throw InputError("macro deformation must have positive determinant");
  const DofMap map = dof_map(macro_f);
  Eigen::VectorXd q0 = Eigen::VectorXd::Zero(map.size());
  if (warm && warm->reduced.size() == map.size()) {
    q0 = warm->reduced;
    if (!system_.assemble(map, q0, 0).admissible) q0.setZero();
  }
  NewtonOptions opt;
  opt.gradient_tol = gradient_tolerance();
  opt.max_iterations = 200;
  const NewtonResult nr = minimize_energy(system_, map, q0, opt);

  EquilibriumState st;
  st.macro_f = macro_f;
  st.reduced = nr.q;
  st.energy_density = nr.energy;
  st.gradient_norm = nr.gradient_norm;
  st.converged = nr.converged;
  st.newton_iters = nr.iterations;
  st.displacements.resize(map.node_dof.size(), Vec2::Zero());
  for (std::size_t n = 0; n < map.node_dof.size(); ++n) {
    if (map.node_dof[n] >= 0) st.displacements[n] = nr.q.segment<2>(2 * map.node_dof[n]);
  }
  return st;
}

EquilibriumState Homogenizer::equilibrate(const VoigtStrain& e, const EquilibriumState* warm) const {
  return equilibrate(stretch_from_strain(e), warm);
}

double Homogenizer::energy(const EquilibriumState& state) const {
  return system_.assemble(dof_map(state.macro_f), state.reduced, 0).energy;
}

void Homogenizer::check_state(const EquilibriumState& state) const {
  if (!state.converged) throw NonConverged("equilibrium state did not converge");
}

StressVector Homogenizer::stress(const EquilibriumState& state) const {
  check_state(state);
  const DofMap map = dof_map(state.macro_f);
  const std::vector<Vec2> x = system_.positions(map, state.reduced);
  const auto law = neo_hookean_law(tile_->mesh);
  Mat2 p_avg = Mat2::Zero();
  const auto& geo = system_.geometry();
  for (std::size_t e = 0; e < geo.size(); ++e) {
    const Mat2 f = element_deformation(geo[e], {x[geo[e].nodes[0]], x[geo[e].nodes[1]], x[geo[e].nodes[2]]});
    const auto r = law(e, f, false);
    if (!r) throw ElementInversion("inverted element in equilibrium state");
    p_avg += geo[e].area * r->piola;
  }
  p_avg /= tile_->area();
  return stress_voigt(state.macro_f.inverse() * p_avg);
}

void Homogenizer::response(const EquilibriumState& state, StressVector& s, StiffnessMatrix& k) const {
  check_state(state);
  const DofMap map = dof_map(state.macro_f);
  const std::vector<Vec2> x = system_.positions(map, state.reduced);
  const auto law = neo_hookean_law(tile_->mesh);
  const auto& geo = system_.geometry();
  const double inv_area = 1.0 / tile_->area();

  Mat2 p_avg = Mat2::Zero();
  Mat4 a_ff = Mat4::Zero();
  Eigen::MatrixXd g_uf = Eigen::MatrixXd::Zero(map.size(), 4);
  for (std::size_t e = 0; e < geo.size(); ++e) {
    const Mat2 f = element_deformation(geo[e], {x[geo[e].nodes[0]], x[geo[e].nodes[1]], x[geo[e].nodes[2]]});
    const auto r = law(e, f, true);
    if (!r) throw ElementInversion("inverted element in equilibrium state");
    const double w = geo[e].area * inv_area;
    p_avg += w * r->piola;
    a_ff += w * r->tangent;
    for (int a = 0; a < 3; ++a) {
      const int d = map.node_dof[geo[e].nodes[a]];
      if (d < 0) continue;
      for (int kk = 0; kk < 2; ++kk)
        for (int c = 0; c < 4; ++c) {
          double v = 0.0;
          for (int L = 0; L < 2; ++L) v += r->tangent(c, flat(kk, L)) * geo[e].grad_n[a][L];
          g_uf(2 * d + kk, c) += w * v;
        }
    }
  }
  Mat4 a_star = a_ff;
  if (map.size() > 0) {
    const Assembly asmb = system_.assemble(map, state.reduced, 2);
    SparseSpdSolver solver;
    if (!solver.factorize(asmb.hessian)) {
      throw SingularReducedHessian("reduced Hessian is not positive definite (buckling or bifurcation)");
    }
    const Eigen::MatrixXd h_inv_g = solver.solve(g_uf);
    a_star -= g_uf.transpose() * h_inv_g;
  }
  a_star = 0.5 * (a_star + a_star.transpose());
  material_response_from_piola(state.macro_f, p_avg, a_star, s, k);
}

StiffnessMatrix Homogenizer::stiffness(const EquilibriumState& state) const {
  StressVector s;
  StiffnessMatrix k;
  response(state, s, k);
  return k;
}

OrthogonalStretch Homogenizer::orthogonal_stretch_search(double lambda1, double theta, double lambda2_guess,
                                                         const EquilibriumState* warm) const {
  if (!(lambda1 > 0.0)) throw InputError("lambda1 must be positive");
  OrthogonalStretch out;
  std::optional<EquilibriumState> last;
  if (warm) last = *warm;
  std::map<double, EquilibriumState> states;

  auto fn = [&](double lambda2) -> std::pair<double, double> {
    const MacroDeformation m{lambda1, lambda2, theta};
    EquilibriumState st = equilibrate(m, last ? &*last : nullptr);
    if (!st.converged) throw NonConverged("tile equilibrium failed during the orthogonal stretch search");
    StressVector s;
    StiffnessMatrix k;
    response(st, s, k);
    VoigtStrain d1, d2;
    strain_lambda2_derivatives(m, d1, d2);
    last = st;
    states[lambda2] = std::move(st);
    return {s.dot(d1), d1.dot(k * d1) + s.dot(d2)};
  };

  RootOptions opt;
  opt.lo = 0.3;
  opt.hi = 2.5;
  opt.f_tol = 1e-8 * stiffness_scale();
  opt.x_tol = 1e-12;
  const RootResult root = safeguarded_newton(fn, lambda2_guess, opt);
  out.lambda2 = root.x;
  out.state = states.at(root.x);
  out.evaluations = root.evaluations;
  return out;
}

GenerationResult Homogenizer::generate_training_data(const SamplingGrid& grid) const {
  const std::vector<double> lambdas = grid.lambda1_values();
  const std::vector<double> thetas = grid.theta_values();

  struct Row {
    std::vector<TrainingSample> samples;
    std::vector<std::string> log;
  };
  std::vector<Row> rows(thetas.size());

  parallel_for(thetas.size(), [&](std::size_t ti) {
    Row& row = rows[ti];
    const double theta = thetas[ti];
    std::optional<EquilibriumState> warm;
    double lambda2_guess = 1.0;
    std::optional<TrainingSample> prev_center;

    for (double lambda1 : lambdas) {
      std::ostringstream where;
      where.precision(17);
      where << "lambda1=" << lambda1 << " theta=" << theta;
      try {
        const OrthogonalStretch os =
            orthogonal_stretch_search(lambda1, theta, lambda2_guess, warm ? &*warm : nullptr);
        warm = os.state;
        lambda2_guess = os.lambda2;

        for (double offset : {0.0, -grid.lambda2_offset, grid.lambda2_offset}) {
          const MacroDeformation m{lambda1, os.lambda2 + offset, theta};
          EquilibriumState st = offset == 0.0 ? os.state : equilibrate(m, &os.state);
          if (!st.converged) {
            row.log.push_back(where.str() + " offset=" + std::to_string(offset) + ": equilibrium did not converge");
            continue;
          }
          TrainingSample smp;
          smp.strain = m.strain();
          smp.lambda1 = lambda1;
          smp.lambda2 = m.lambda2;
          smp.theta = theta;
          smp.energy = st.energy_density;
          try {
            response(st, smp.stress, smp.stiffness);
          } catch (const SingularReducedHessian& e) {
            smp.stress = stress(st);
            smp.stiffness.setZero();
            smp.flags |= kFlagNoStiffness;
            row.log.push_back(where.str() + ": " + e.what());
          }
          if (offset == 0.0) {
            // Work estimate from the previous lambda1 sample (trapezoid with the
            // stiffness end correction); a large miss means the equilibrium
            // jumped to another branch.
            if (prev_center && prev_center->energy) {
              const VoigtStrain de = smp.strain - prev_center->strain;
              double predicted = *prev_center->energy + 0.5 * (prev_center->stress + smp.stress).dot(de);
              if (prev_center->has_stiffness() && smp.has_stiffness()) {
                predicted += de.dot((prev_center->stiffness - smp.stiffness) * de) / 12.0;
              }
              const double change = std::abs(*smp.energy - *prev_center->energy);
              if (change > 0.0 && std::abs(*smp.energy - predicted) > 0.2 * change) {
                smp.flags |= kFlagBranchJump;
                row.log.push_back(where.str() + ": energy jump suggests a branch change");
              }
            }
            prev_center = smp;
          }
          row.samples.push_back(std::move(smp));
        }
      } catch (const NumericalError& e) {
        row.log.push_back(where.str() + ": " + e.what());
      }
    }
  });

  GenerationResult out;
  for (Row& r : rows) {
    out.samples.insert(out.samples.end(), r.samples.begin(), r.samples.end());
    out.log.insert(out.log.end(), r.log.begin(), r.log.end());
  }
  return out;
}

}  // namespace conservolast
