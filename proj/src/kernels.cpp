#include "conservolast/kernels.hpp"

#include <cmath>

#include "conservolast/errors.hpp"

namespace conservolast {

namespace {

// Below this fraction of r0 the radial direction is treated as undefined.
constexpr double kOriginFraction = 1e-10;

}  // namespace

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::Multiquadric: return "multiquadric";
    case KernelFamily::Gaussian: return "gaussian";
    case KernelFamily::InverseQuadratic: return "inverse_quadratic";
    case KernelFamily::InverseMultiquadric: return "inverse_multiquadric";
  }
  return "unknown";
}

KernelFamily kernel_family_from_string(std::string_view name) {
  if (name == "multiquadric") return KernelFamily::Multiquadric;
  if (name == "gaussian") return KernelFamily::Gaussian;
  if (name == "inverse_quadratic") return KernelFamily::InverseQuadratic;
  if (name == "inverse_multiquadric") return KernelFamily::InverseMultiquadric;
  throw InputError("unknown kernel family '" + std::string(name) + "'");
}

Kernel::Kernel(KernelFamily family, double radius) : family_(family), radius_(radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw InputError("kernel radius must be positive and finite");
  }
}

double Kernel::eval(double r) const {
  const double r0 = radius_;
  const double q = (r * r) / (r0 * r0);
  switch (family_) {
    case KernelFamily::Multiquadric: return std::sqrt(r * r + r0 * r0);
    case KernelFamily::Gaussian: return std::exp(-q);
    case KernelFamily::InverseQuadratic: return 1.0 / (1.0 + q);
    case KernelFamily::InverseMultiquadric: return 1.0 / std::sqrt(1.0 + q);
  }
  return 0.0;
}

double Kernel::eval_d1(double r) const { return equivalent_psi(r) * r; }

double Kernel::eval_d2(double r) const {
  const double r0 = radius_;
  const double r02 = r0 * r0;
  const double q = (r * r) / r02;
  switch (family_) {
    case KernelFamily::Multiquadric: {
      const double phi = std::sqrt(r * r + r02);
      return r02 / (phi * phi * phi);
    }
    case KernelFamily::Gaussian: return (-2.0 / r02 + 4.0 * r * r / (r02 * r02)) * std::exp(-q);
    case KernelFamily::InverseQuadratic: {
      const double s = 1.0 + q;
      return -2.0 / (r02 * s * s) + 8.0 * r * r / (r02 * r02 * s * s * s);
    }
    case KernelFamily::InverseMultiquadric: {
      const double s = 1.0 + q;
      return -std::pow(s, -1.5) / r02 + 3.0 * r * r / (r02 * r02) * std::pow(s, -2.5);
    }
  }
  return 0.0;
}

double Kernel::equivalent_psi(double r) const {
  const double r0 = radius_;
  const double r02 = r0 * r0;
  const double q = (r * r) / r02;
  switch (family_) {
    case KernelFamily::Multiquadric: return 1.0 / std::sqrt(r * r + r02);
    case KernelFamily::Gaussian: return -2.0 / r02 * std::exp(-q);
    case KernelFamily::InverseQuadratic: {
      const double s = 1.0 + q;
      return -2.0 / (r02 * s * s);
    }
    case KernelFamily::InverseMultiquadric: return -std::pow(1.0 + q, -1.5) / r02;
  }
  return 0.0;
}

RadialVector::RadialVector(const Vec3& x, const Vec3& center) : RadialVector(Vec3(x - center)) {}

RadialVector::RadialVector(const Vec3& delta_) : delta(delta_), r(delta_.norm()), u(Vec3::Zero()), at_origin(r == 0.0) {
  if (!at_origin) u = delta / r;
}

Vec3 spatial_grad(const Kernel& kernel, const RadialVector& rv) {
  if (rv.at_origin) return Vec3::Zero();
  return kernel.equivalent_psi(rv.r) * rv.delta;
}

Mat3 spatial_hess(const Kernel& kernel, const RadialVector& rv) {
  const double psi = kernel.equivalent_psi(rv.r);
  if (rv.at_origin || rv.r < kOriginFraction * kernel.radius()) {
    return psi * Mat3::Identity();
  }
  const Mat3 uu = rv.u * rv.u.transpose();
  return kernel.eval_d2(rv.r) * uu + psi * (Mat3::Identity() - uu);
}

KernelSample sample_kernel(const Kernel& kernel, const Vec3& x, const Vec3& center) {
  RadialVector rv(x, center);
  const double phi = kernel.eval(rv.r);
  Vec3 grad = spatial_grad(kernel, rv);
  Mat3 hess = spatial_hess(kernel, rv);
  return KernelSample{rv, phi, grad, hess};
}

}  // namespace conservolast
