#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "conservolast/hyperelastic.hpp"
#include "conservolast/tile.hpp"

namespace conservolast {

/// Rest-configuration data of one linear triangle.
struct ElementGeometry {
  std::array<int, 3> nodes{};
  double area = 0.0;
  std::array<Vec2, 3> grad_n{};  // shape-function gradients, constant per element
};

std::vector<ElementGeometry> element_geometry(const Mesh& mesh);

/// Deformation gradient of an element from current node positions.
Mat2 element_deformation(const ElementGeometry& g, const std::array<Vec2, 3>& x);

/// Energy density, first Piola stress and its tangent at one element.
struct PointResponse {
  double energy = 0.0;
  Mat2 piola = Mat2::Zero();
  Mat4 tangent = Mat4::Zero();
};

/// Returns nullopt when F is inadmissible (inverted or outside the law's domain).
using ConstitutiveLaw = std::function<std::optional<PointResponse>(std::size_t element, const Mat2& f, bool tangent)>;

ConstitutiveLaw neo_hookean_law(const Mesh& mesh);

/// Node position x_n = base_n + q[2 d], q[2 d + 1] with d = node_dof[n], or
/// just base_n when node_dof[n] < 0. Several nodes may share one dof pair.
struct DofMap {
  std::vector<Vec2> base;
  std::vector<int> node_dof;
  int n_dof_nodes = 0;
  int size() const { return 2 * n_dof_nodes; }
};

struct Assembly {
  bool admissible = true;
  double energy = 0.0;
  Eigen::VectorXd gradient;
  Eigen::SparseMatrix<double> hessian;
};

/// Total energy sum_e scale * area_e * W(F_e) over a mesh, as a function of
/// the free dofs.
class ElasticSystem {
 public:
  ElasticSystem(const Mesh& mesh, ConstitutiveLaw law, double scale);

  const std::vector<ElementGeometry>& geometry() const { return geometry_; }
  double scale() const { return scale_; }

  std::vector<Vec2> positions(const DofMap& map, const Eigen::VectorXd& q) const;
  /// order 0: energy only; 1: + gradient; 2: + Hessian.
  Assembly assemble(const DofMap& map, const Eigen::VectorXd& q, int order) const;

 private:
  const Mesh* mesh_;
  ConstitutiveLaw law_;
  double scale_;
  std::vector<ElementGeometry> geometry_;
};

struct NewtonOptions {
  double gradient_tol = 1e-9;
  int max_iterations = 200;
};

struct NewtonResult {
  Eigen::VectorXd q;
  double energy = 0.0;
  double gradient_norm = 0.0;  // infinity norm
  int iterations = 0;
  bool converged = false;
};

/// Newton minimization with backtracking line search. Indefinite Hessians are
/// shifted until positive definite. Steps that would invert an element are
/// rejected by the line search.
NewtonResult minimize_energy(const ElasticSystem& system, const DofMap& map, Eigen::VectorXd q0,
                             const NewtonOptions& options);

/// LDL^T factorization of a sparse symmetric matrix that reports whether the
/// matrix was positive definite.
class SparseSpdSolver {
 public:
  bool factorize(const Eigen::SparseMatrix<double>& a);
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const { return ldlt_.solve(rhs); }
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return ldlt_.solve(rhs); }

 private:
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  bool analyzed_ = false;
  Eigen::Index analyzed_size_ = -1;
};

}  // namespace conservolast
