#pragma once

#include <array>

#include <Eigen/Dense>

namespace conservolast {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Green strain in Voigt form (e_xx, e_yy, 2 e_xy).
using VoigtStrain = Eigen::Vector3d;
// Second Piola-Kirchhoff stress in Voigt form (S_xx, S_yy, S_xy).
using StressVector = Eigen::Vector3d;
// Hessian of the energy density with respect to VoigtStrain.
using StiffnessMatrix = Eigen::Matrix3d;
// 2x2 deformation gradient.
using DeformationGradient = Eigen::Matrix2d;

// Upper-triangle packing of a symmetric 3x3 matrix: (11, 12, 13, 22, 23, 33).
using SymPacked = std::array<double, 6>;

inline constexpr std::array<std::array<int, 2>, 6> kSymIndex{{{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}}};

inline SymPacked pack_symmetric(const Mat3& m) {
  SymPacked out{};
  for (int k = 0; k < 6; ++k) {
    const auto [i, j] = kSymIndex[k];
    out[k] = i == j ? m(i, j) : 0.5 * (m(i, j) + m(j, i));
  }
  return out;
}

inline Mat3 unpack_symmetric(const SymPacked& p) {
  Mat3 m;
  for (int k = 0; k < 6; ++k) {
    const auto [i, j] = kSymIndex[k];
    m(i, j) = p[k];
    m(j, i) = p[k];
  }
  return m;
}

// Basis element k of the symmetric 3x3 matrices, matching the packed layout.
inline Mat3 symmetric_basis(int k) {
  Mat3 b = Mat3::Zero();
  const auto [i, j] = kSymIndex[k];
  b(i, j) = 1.0;
  b(j, i) = 1.0;
  return b;
}

inline Mat3 symmetrize(const Mat3& m) { return 0.5 * (m + m.transpose()); }

}  // namespace conservolast
