#include "conservolast/static_solver.hpp"

#include <cmath>
#include <limits>

#include "conservolast/errors.hpp"

namespace conservolast {

std::vector<ElementGeometry> element_geometry(const Mesh& mesh) {
  std::vector<ElementGeometry> out(mesh.triangles.size());
  for (std::size_t e = 0; e < mesh.triangles.size(); ++e) {
    const auto& t = mesh.triangles[e];
    ElementGeometry& g = out[e];
    g.nodes = t;
    Mat2 dm;
    dm.col(0) = mesh.vertices[t[1]] - mesh.vertices[t[0]];
    dm.col(1) = mesh.vertices[t[2]] - mesh.vertices[t[0]];
    g.area = 0.5 * dm.determinant();
    if (!(g.area > 0.0)) throw InputError("element " + std::to_string(e) + " has non-positive rest area");
    const Mat2 dm_inv = dm.inverse();
    // N_1 = xi, N_2 = eta, N_0 = 1 - xi - eta with (xi, eta) = Dm^-1 (X - X_0)
    g.grad_n[1] = dm_inv.row(0).transpose();
    g.grad_n[2] = dm_inv.row(1).transpose();
    g.grad_n[0] = -g.grad_n[1] - g.grad_n[2];
  }
  return out;
}

Mat2 element_deformation(const ElementGeometry& g, const std::array<Vec2, 3>& x) {
  Mat2 f = Mat2::Zero();
  for (int a = 0; a < 3; ++a) f += x[a] * g.grad_n[a].transpose();
  return f;
}

ConstitutiveLaw neo_hookean_law(const Mesh& mesh) {
  return [&mesh](std::size_t element, const Mat2& f, bool tangent) -> std::optional<PointResponse> {
    if (!(f.determinant() > 0.0)) return std::nullopt;
    const NeoHookean& mat = mesh.material_of(element);
    PointResponse r;
    r.energy = mat.energy(f);
    r.piola = mat.first_piola(f);
    if (tangent) r.tangent = mat.first_piola_tangent(f);
    return r;
  };
}

ElasticSystem::ElasticSystem(const Mesh& mesh, ConstitutiveLaw law, double scale)
    : mesh_(&mesh), law_(std::move(law)), scale_(scale), geometry_(element_geometry(mesh)) {}

std::vector<Vec2> ElasticSystem::positions(const DofMap& map, const Eigen::VectorXd& q) const {
  std::vector<Vec2> x(map.base);
  for (std::size_t n = 0; n < x.size(); ++n) {
    const int d = map.node_dof[n];
    if (d >= 0) x[n] += q.segment<2>(2 * d);
  }
  return x;
}

Assembly ElasticSystem::assemble(const DofMap& map, const Eigen::VectorXd& q, int order) const {
  Assembly out;
  const std::vector<Vec2> x = positions(map, q);
  if (order >= 1) out.gradient.setZero(map.size());
  std::vector<Eigen::Triplet<double>> triplets;
  if (order >= 2) triplets.reserve(geometry_.size() * 36);

  for (std::size_t e = 0; e < geometry_.size(); ++e) {
    const ElementGeometry& g = geometry_[e];
    const std::array<Vec2, 3> xe{x[g.nodes[0]], x[g.nodes[1]], x[g.nodes[2]]};
    const Mat2 f = element_deformation(g, xe);
    const auto resp = law_(e, f, order >= 2);
    if (!resp || !std::isfinite(resp->energy)) {
      out.admissible = false;
      out.energy = std::numeric_limits<double>::infinity();
      return out;
    }
    const double w = scale_ * g.area;
    out.energy += w * resp->energy;
    if (order < 1) continue;
    for (int a = 0; a < 3; ++a) {
      const int d = map.node_dof[g.nodes[a]];
      if (d < 0) continue;
      out.gradient.segment<2>(2 * d) += w * resp->piola * g.grad_n[a];
    }
    if (order < 2) continue;
    for (int a = 0; a < 3; ++a) {
      const int da = map.node_dof[g.nodes[a]];
      if (da < 0) continue;
      for (int b = 0; b < 3; ++b) {
        const int db = map.node_dof[g.nodes[b]];
        if (db < 0) continue;
        for (int i = 0; i < 2; ++i)
          for (int k = 0; k < 2; ++k) {
            double v = 0.0;
            for (int J = 0; J < 2; ++J)
              for (int L = 0; L < 2; ++L) v += resp->tangent(flat(i, J), flat(k, L)) * g.grad_n[a][J] * g.grad_n[b][L];
            triplets.emplace_back(2 * da + i, 2 * db + k, w * v);
          }
      }
    }
  }
  if (order >= 2) {
    out.hessian.resize(map.size(), map.size());
    out.hessian.setFromTriplets(triplets.begin(), triplets.end());
  }
  return out;
}

bool SparseSpdSolver::factorize(const Eigen::SparseMatrix<double>& a) {
  if (!analyzed_ || analyzed_size_ != a.rows()) {
    ldlt_.analyzePattern(a);
    analyzed_ = true;
    analyzed_size_ = a.rows();
  }
  ldlt_.factorize(a);
  if (ldlt_.info() != Eigen::Success) return false;
  const Eigen::VectorXd d = ldlt_.vectorD();
  return d.size() == 0 || ((d.array() > 0.0).all() && d.allFinite());
}

NewtonResult minimize_energy(const ElasticSystem& system, const DofMap& map, Eigen::VectorXd q0,
                             const NewtonOptions& options) {
  NewtonResult res;
  res.q = std::move(q0);
  Assembly cur = system.assemble(map, res.q, 2);
  if (!cur.admissible) throw ElementInversion("initial configuration has an inverted element");
  res.energy = cur.energy;
  res.gradient_norm = map.size() ? cur.gradient.lpNorm<Eigen::Infinity>() : 0.0;
  if (map.size() == 0) {
    res.converged = true;
    return res;
  }

  SparseSpdSolver solver;
  Eigen::SparseMatrix<double> identity(map.size(), map.size());
  identity.setIdentity();

  for (int it = 0; it < options.max_iterations; ++it) {
    if (res.gradient_norm <= options.gradient_tol) {
      res.converged = true;
      return res;
    }
    res.iterations = it + 1;

    // Shift until positive definite.
    double shift = 0.0;
    const double diag_scale = std::max(1e-300, cur.hessian.diagonal().cwiseAbs().maxCoeff());
    while (!solver.factorize(shift == 0.0 ? cur.hessian : Eigen::SparseMatrix<double>(cur.hessian + shift * identity))) {
      shift = shift == 0.0 ? 1e-8 * diag_scale : shift * 10.0;
      if (shift > 1e8 * diag_scale) throw NonConverged("could not regularize the Hessian");
    }
    const Eigen::VectorXd step = -solver.solve(cur.gradient);
    const double slope = cur.gradient.dot(step);

    double t = 1.0;
    bool accepted = false;
    Assembly trial;
    for (int ls = 0; ls < 60; ++ls) {
      const Eigen::VectorXd q_try = res.q + t * step;
      trial = system.assemble(map, q_try, 0);
      if (trial.admissible && trial.energy <= res.energy + 1e-4 * t * slope) {
        res.q = q_try;
        accepted = true;
        break;
      }
      // Near the minimum the energy change drowns in roundoff; fall back to
      // requiring a smaller gradient for the full step.
      if (ls == 0 && trial.admissible &&
          std::abs(trial.energy - res.energy) <= 1e-12 * std::max(1.0, std::abs(res.energy))) {
        const Assembly g = system.assemble(map, q_try, 1);
        if (g.gradient.lpNorm<Eigen::Infinity>() < 0.5 * res.gradient_norm) {
          res.q = q_try;
          accepted = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!accepted) {
      // No decrease representable in floating point: accept if the gradient is
      // already small relative to the tolerance.
      res.converged = res.gradient_norm <= 1e3 * options.gradient_tol;
      return res;
    }
    cur = system.assemble(map, res.q, 2);
    if (!cur.admissible) throw ElementInversion("line search accepted an inverted configuration");
    res.energy = cur.energy;
    res.gradient_norm = cur.gradient.lpNorm<Eigen::Infinity>();
  }
  res.converged = res.gradient_norm <= options.gradient_tol;
  return res;
}

}  // namespace conservolast
