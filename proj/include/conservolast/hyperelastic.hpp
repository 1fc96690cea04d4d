#pragma once

#include <Eigen/Dense>

#include "conservolast/types.hpp"

namespace conservolast {

// 2x2 tensors flattened row-major: index(i, J) = 2 * i + J.
using Vec4 = Eigen::Matrix<double, 4, 1>;
using Mat4 = Eigen::Matrix4d;

inline int flat(int i, int j) { return 2 * i + j; }
inline Vec4 flatten(const Mat2& m) { return Vec4(m(0, 0), m(0, 1), m(1, 0), m(1, 1)); }
inline Mat2 unflatten(const Vec4& v) { return (Mat2() << v(0), v(1), v(2), v(3)).finished(); }

/// Compressible neo-Hookean solid in plane strain:
///   W(F) = mu/2 (|F|^2 - 2) - mu ln J + lambda/2 (ln J)^2
struct NeoHookean {
  double mu = 1.0;
  double lambda = 1.0;

  static NeoHookean from_young_poisson(double young, double poisson);

  // Deformation-gradient form. energy() is +inf for det F <= 0.
  double energy(const Mat2& f) const;
  Mat2 first_piola(const Mat2& f) const;
  Mat4 first_piola_tangent(const Mat2& f) const;

  // Green-strain form, written independently of the F route.
  double energy_green(const VoigtStrain& e) const;
  StressVector stress_green(const VoigtStrain& e) const;
  StiffnessMatrix stiffness_green(const VoigtStrain& e) const;

  bool operator==(const NeoHookean&) const = default;
};

/// Symmetric 2x2 tensor <-> Voigt stress (xx, yy, xy).
Mat2 stress_tensor(const StressVector& s);
StressVector stress_voigt(const Mat2& s);
/// Voigt strain (xx, yy, 2xy) -> symmetric 2x2 Green strain tensor.
Mat2 strain_tensor(const VoigtStrain& e);

/// Symmetric stretch U with U^T U = I + 2E (the polar right stretch).
Mat2 stretch_from_strain(const VoigtStrain& e);

/// Converts a first Piola stress P and its tangent dP/dF at F into the
/// Voigt second Piola stress and the material tangent dS/dE.
void material_response_from_piola(const Mat2& f, const Mat2& p, const Mat4& dp_df, StressVector& s,
                                  StiffnessMatrix& k);

/// Inverse of material_response_from_piola: P = F S and
/// dP/dF_iJkL = delta_ik S_JL + F_iI F_kK C_IJKL.
void piola_response_from_material(const Mat2& f, const StressVector& s, const StiffnessMatrix& k, Mat2& p,
                                  Mat4& dp_df);

}  // namespace conservolast
