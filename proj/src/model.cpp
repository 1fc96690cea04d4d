#include "conservolast/model.hpp"

#include <cmath>
#include <string>

#include "conservolast/errors.hpp"

namespace conservolast {

VoigtStrain green_strain(const DeformationGradient& f) {
  const Mat2 eps = 0.5 * (f.transpose() * f - Mat2::Identity());
  return VoigtStrain(eps(0, 0), eps(1, 1), 2.0 * eps(0, 1));
}

void EnergyModel::check() const {
  const std::size_t n = centers.size();
  if (!grad_coeffs.empty() && grad_coeffs.size() != n) {
    throw InputError("grad_coeffs has " + std::to_string(grad_coeffs.size()) + " entries for " +
                     std::to_string(n) + " centers");
  }
  if (!hess_coeffs.empty() && hess_coeffs.size() != n) {
    throw InputError("hess_coeffs has " + std::to_string(hess_coeffs.size()) + " entries for " +
                     std::to_string(n) + " centers");
  }
  auto is_sym = [](const Mat3& a) { return (a - a.transpose()).norm() <= 1e-12 * std::max(1.0, a.norm()); };
  for (const Mat3& w : hess_coeffs) {
    if (!is_sym(w)) throw InputError("hess_coeffs must be symmetric");
  }
  if (!is_sym(stiffness_offset)) throw InputError("stiffness_offset must be symmetric");
}

namespace interp {

double grad_energy(const KernelSample& k, const Vec3& w) { return k.phi * w.dot(k.rv.delta); }

Vec3 grad_stress(const KernelSample& k, const Vec3& w) { return k.phi * w + w.dot(k.rv.delta) * k.grad; }

Mat3 grad_stiffness(const KernelSample& k, const Vec3& w) {
  return w * k.grad.transpose() + k.grad * w.transpose() + w.dot(k.rv.delta) * k.hess;
}

double hess_energy(const KernelSample& k, const Mat3& W) { return k.phi * k.rv.delta.dot(W * k.rv.delta); }

Vec3 hess_stress(const KernelSample& k, const Mat3& W) {
  const Vec3 wd = W * k.rv.delta;
  return 2.0 * k.phi * wd + k.rv.delta.dot(wd) * k.grad;
}

Mat3 hess_stiffness(const KernelSample& k, const Mat3& W) {
  const Vec3 wd = W * k.rv.delta;
  return 2.0 * wd * k.grad.transpose() + 2.0 * k.grad * wd.transpose() + 2.0 * k.phi * W +
         k.rv.delta.dot(wd) * k.hess;
}

}  // namespace interp

double energy(const EnergyModel& m, const VoigtStrain& e) {
  double psi = m.energy_shift + m.stress_offset.dot(e) + 0.5 * e.dot(m.stiffness_offset * e);
  for (std::size_t i = 0; i < m.centers.size(); ++i) {
    const RadialVector rv(e, m.centers[i]);
    const double phi = m.kernel.eval(rv.r);
    if (m.has_grad_interpolants()) psi += phi * m.grad_coeffs[i].dot(rv.delta);
    if (m.has_hess_interpolants()) psi += phi * rv.delta.dot(m.hess_coeffs[i] * rv.delta);
  }
  return psi;
}

StressVector stress(const EnergyModel& m, const VoigtStrain& e) {
  StressVector s = m.stress_offset + m.stiffness_offset * e;
  for (std::size_t i = 0; i < m.centers.size(); ++i) {
    const KernelSample k = sample_kernel(m.kernel, e, m.centers[i]);
    if (m.has_grad_interpolants()) s += interp::grad_stress(k, m.grad_coeffs[i]);
    if (m.has_hess_interpolants()) s += interp::hess_stress(k, m.hess_coeffs[i]);
  }
  return s;
}

StiffnessMatrix stiffness(const EnergyModel& m, const VoigtStrain& e) {
  StiffnessMatrix k = m.stiffness_offset;
  for (std::size_t i = 0; i < m.centers.size(); ++i) {
    const KernelSample ks = sample_kernel(m.kernel, e, m.centers[i]);
    if (m.has_grad_interpolants()) k += interp::grad_stiffness(ks, m.grad_coeffs[i]);
    if (m.has_hess_interpolants()) k += interp::hess_stiffness(ks, m.hess_coeffs[i]);
  }
  return symmetrize(k);
}

EnergyModel recompute_stress_offset(EnergyModel m) {
  StressVector s0 = StressVector::Zero();
  const VoigtStrain origin = VoigtStrain::Zero();
  for (std::size_t i = 0; i < m.centers.size(); ++i) {
    const KernelSample k = sample_kernel(m.kernel, origin, m.centers[i]);
    if (m.has_grad_interpolants()) s0 += interp::grad_stress(k, m.grad_coeffs[i]);
    if (m.has_hess_interpolants()) s0 += interp::hess_stress(k, m.hess_coeffs[i]);
  }
  m.stress_offset = -s0;
  return m;
}

double work_integral(const EnergyModel& m, std::span<const VoigtStrain> path) {
  if (path.size() < 3) throw InputError("work_integral needs at least 3 path points");
  double total = 0.0;
  StressVector prev = stress(m, path[0]);
  for (std::size_t k = 1; k < path.size(); ++k) {
    const StressVector next = stress(m, path[k]);
    total += 0.5 * (prev + next).dot(path[k] - path[k - 1]);
    prev = next;
  }
  return total;
}

}  // namespace conservolast
