#pragma once

#include <string>
#include <string_view>

#include "conservolast/types.hpp"

namespace conservolast {

enum class KernelFamily { Multiquadric, Gaussian, InverseQuadratic, InverseMultiquadric };

std::string to_string(KernelFamily family);
// Accepts the names produced by to_string ("multiquadric", "gaussian",
// "inverse_quadratic", "inverse_multiquadric"). Throws InputError otherwise.
KernelFamily kernel_family_from_string(std::string_view name);

/// Radially symmetric scalar kernel phi(r) with smoothness radius r0.
///
/// All families are C2 with phi'(0) = 0, so the radial-vector derivatives
/// below have finite limits at the center.
///   Multiquadric         sqrt(r^2 + r0^2)
///   Gaussian             exp(-r^2 / r0^2)
///   InverseQuadratic     1 / (1 + r^2 / r0^2)
///   InverseMultiquadric  1 / sqrt(1 + r^2 / r0^2)
class Kernel {
 public:
  Kernel(KernelFamily family, double radius);

  KernelFamily family() const { return family_; }
  double radius() const { return radius_; }

  double eval(double r) const;
  double eval_d1(double r) const;
  double eval_d2(double r) const;
  /// phi'(r) / r, continued to phi''(0) at the origin.
  double equivalent_psi(double r) const;

  bool operator==(const Kernel&) const = default;

 private:
  KernelFamily family_;
  double radius_;
};

/// x - x_i together with its length and direction.
struct RadialVector {
  Vec3 delta;
  double r;
  Vec3 u;  // zero when at_origin
  bool at_origin;

  RadialVector(const Vec3& x, const Vec3& center);
  explicit RadialVector(const Vec3& delta_);
};

/// Gradient of phi(|x - x_i|) with respect to x.
Vec3 spatial_grad(const Kernel& kernel, const RadialVector& rv);
/// Hessian of phi(|x - x_i|) with respect to x.
Mat3 spatial_hess(const Kernel& kernel, const RadialVector& rv);

/// Everything the interpolants need from one kernel at one point.
struct KernelSample {
  RadialVector rv;
  double phi;
  Vec3 grad;
  Mat3 hess;
};

KernelSample sample_kernel(const Kernel& kernel, const Vec3& x, const Vec3& center);

}  // namespace conservolast
