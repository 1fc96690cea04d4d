#include "conservolast/hyperelastic.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "conservolast/errors.hpp"

namespace conservolast {

namespace {

// Voigt slot of the symmetric index pair (I, J).
constexpr int voigt_slot(int i, int j) { return i == j ? i : 2; }

}  // namespace

NeoHookean NeoHookean::from_young_poisson(double young, double poisson) {
  if (!(young > 0.0) || !(poisson > -1.0) || !(poisson < 0.5)) {
    throw InputError("neo-Hookean parameters need E > 0 and -1 < nu < 0.5");
  }
  NeoHookean m;
  m.mu = young / (2.0 * (1.0 + poisson));
  m.lambda = young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
  return m;
}

double NeoHookean::energy(const Mat2& f) const {
  const double j = f.determinant();
  if (!(j > 0.0)) return std::numeric_limits<double>::infinity();
  const double lj = std::log(j);
  return 0.5 * mu * (f.squaredNorm() - 2.0) - mu * lj + 0.5 * lambda * lj * lj;
}

Mat2 NeoHookean::first_piola(const Mat2& f) const {
  const double lj = std::log(f.determinant());
  const Mat2 finv_t = f.inverse().transpose();
  return mu * f + (lambda * lj - mu) * finv_t;
}

Mat4 NeoHookean::first_piola_tangent(const Mat2& f) const {
  const double lj = std::log(f.determinant());
  const Mat2 g = f.inverse().transpose();
  Mat4 a = Mat4::Zero();
  for (int i = 0; i < 2; ++i)
    for (int J = 0; J < 2; ++J)
      for (int k = 0; k < 2; ++k)
        for (int L = 0; L < 2; ++L) {
          double v = lambda * g(i, J) * g(k, L) - (lambda * lj - mu) * g(i, L) * g(k, J);
          if (i == k && J == L) v += mu;
          a(flat(i, J), flat(k, L)) = v;
        }
  return a;
}

double NeoHookean::energy_green(const VoigtStrain& e) const {
  const Mat2 c = Mat2::Identity() + 2.0 * strain_tensor(e);
  const double det_c = c.determinant();
  if (!(det_c > 0.0) || !(c.trace() > 0.0)) return std::numeric_limits<double>::infinity();
  const double lj = 0.5 * std::log(det_c);
  return 0.5 * mu * (c.trace() - 2.0) - mu * lj + 0.5 * lambda * lj * lj;
}

StressVector NeoHookean::stress_green(const VoigtStrain& e) const {
  const Mat2 c = Mat2::Identity() + 2.0 * strain_tensor(e);
  const Mat2 c_inv = c.inverse();
  const double lj = 0.5 * std::log(c.determinant());
  return stress_voigt(mu * (Mat2::Identity() - c_inv) + lambda * lj * c_inv);
}

StiffnessMatrix NeoHookean::stiffness_green(const VoigtStrain& e) const {
  const Mat2 c = Mat2::Identity() + 2.0 * strain_tensor(e);
  const Mat2 ci = c.inverse();
  const double lj = 0.5 * std::log(c.determinant());
  auto tangent = [&](int I, int J, int K, int L) {
    return lambda * ci(I, J) * ci(K, L) + (mu - lambda * lj) * (ci(I, K) * ci(J, L) + ci(I, L) * ci(J, K));
  };
  static constexpr int idx[3][2] = {{0, 0}, {1, 1}, {0, 1}};
  StiffnessMatrix k;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) k(a, b) = tangent(idx[a][0], idx[a][1], idx[b][0], idx[b][1]);
  return k;
}

Mat2 stress_tensor(const StressVector& s) { return (Mat2() << s(0), s(2), s(2), s(1)).finished(); }

StressVector stress_voigt(const Mat2& s) { return StressVector(s(0, 0), s(1, 1), 0.5 * (s(0, 1) + s(1, 0))); }

Mat2 strain_tensor(const VoigtStrain& e) { return (Mat2() << e(0), 0.5 * e(2), 0.5 * e(2), e(1)).finished(); }

Mat2 stretch_from_strain(const VoigtStrain& e) {
  const Mat2 c = Mat2::Identity() + 2.0 * strain_tensor(e);
  Eigen::SelfAdjointEigenSolver<Mat2> eig(c);
  const Eigen::Vector2d ev = eig.eigenvalues();
  if (!(ev.minCoeff() > 0.0)) throw InputError("strain is not reachable by any deformation (C not positive definite)");
  return eig.eigenvectors() * ev.cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
}

void material_response_from_piola(const Mat2& f, const Mat2& p, const Mat4& dp_df, StressVector& s,
                                  StiffnessMatrix& k) {
  const Mat2 fi = f.inverse();
  const Mat2 s_tensor = fi * p;
  s = stress_voigt(s_tensor);
  const Mat2 s_sym = stress_tensor(s);

  // C_IJKL = Finv_Ii Finv_Kk (A_iJkL - delta_ik S_JL)
  double c[2][2][2][2] = {};
  for (int I = 0; I < 2; ++I)
    for (int J = 0; J < 2; ++J)
      for (int K = 0; K < 2; ++K)
        for (int L = 0; L < 2; ++L) {
          double v = 0.0;
          for (int i = 0; i < 2; ++i)
            for (int kk = 0; kk < 2; ++kk) {
              double a = dp_df(flat(i, J), flat(kk, L));
              if (i == kk) a -= s_sym(J, L);
              v += fi(I, i) * fi(K, kk) * a;
            }
          c[I][J][K][L] = v;
        }
  // Average over the minor-symmetric partners so the Voigt matrix sees the
  // symmetric part only.
  auto sym = [&](int I, int J, int K, int L) {
    return 0.25 * (c[I][J][K][L] + c[J][I][K][L] + c[I][J][L][K] + c[J][I][L][K]);
  };
  static constexpr int idx[3][2] = {{0, 0}, {1, 1}, {0, 1}};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) k(a, b) = sym(idx[a][0], idx[a][1], idx[b][0], idx[b][1]);
  k = symmetrize(k);
}

void piola_response_from_material(const Mat2& f, const StressVector& s, const StiffnessMatrix& k, Mat2& p,
                                  Mat4& dp_df) {
  const Mat2 st = stress_tensor(s);
  p = f * st;
  for (int i = 0; i < 2; ++i)
    for (int J = 0; J < 2; ++J)
      for (int kk = 0; kk < 2; ++kk)
        for (int L = 0; L < 2; ++L) {
          double v = i == kk ? st(J, L) : 0.0;
          for (int I = 0; I < 2; ++I)
            for (int K = 0; K < 2; ++K) v += f(i, I) * f(kk, K) * k(voigt_slot(I, J), voigt_slot(K, L));
          dp_df(flat(i, J), flat(kk, L)) = v;
        }
}

}  // namespace conservolast
