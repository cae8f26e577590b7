#include "sawlab/mirror.hpp"

#include <cmath>
#include <stdexcept>

namespace sawlab {

SignedPermutation SignedPermutation::identity(int n) {
  SignedPermutation p;
  p.perm.resize(n);
  p.signs.assign(n, 1.0);
  for (int i = 0; i < n; ++i) p.perm[i] = i;
  return p;
}

SignedPermutation SignedPermutation::lr_swap(int half) {
  SignedPermutation p;
  p.perm.resize(2 * half);
  p.signs.assign(2 * half, 1.0);
  for (int i = 0; i < half; ++i) {
    p.perm[i] = half + i;
    p.perm[half + i] = i;
  }
  return p;
}

void SignedPermutation::validate() const {
  if (perm.size() != signs.size())
    throw std::invalid_argument("signed permutation: perm/signs size mismatch");
  const int n = size();
  for (int i = 0; i < n; ++i) {
    if (perm[i] < 0 || perm[i] >= n)
      throw std::invalid_argument("signed permutation: index out of range");
    if (perm[perm[i]] != i)
      throw std::invalid_argument("signed permutation: not an involution");
    if (std::abs(signs[i]) != 1.0)
      throw std::invalid_argument("signed permutation: signs must be +/-1");
    if (signs[i] * signs[perm[i]] != 1.0)
      throw std::invalid_argument("signed permutation: sign map breaks involution");
  }
}

std::vector<double> SignedPermutation::apply(
    const std::vector<double>& v) const {
  if (static_cast<int>(v.size()) != size())
    throw std::invalid_argument("signed permutation: vector size mismatch");
  std::vector<double> out(v.size());
  for (int i = 0; i < size(); ++i) out[i] = signs[i] * v[perm[i]];
  return out;
}

void MirrorSpec::validate() const {
  actuators.validate();
  passive.validate();
  posture.validate();
}

namespace {

Vec3 mirror_vec(const Vec3& v) { return {v[0], -v[1], v[2]}; }
Vec3 mirror_rpy(const Vec3& v) { return {-v[0], v[1], -v[2]}; }

}  // namespace

Observation mirror_observation(const Observation& o, const MirrorSpec& m) {
  Observation r = o;
  r.motor_pos = m.actuators.apply(o.motor_pos);
  r.motor_vel = m.actuators.apply(o.motor_vel);
  r.applied_torque = m.actuators.apply(o.applied_torque);
  r.action = m.actuators.apply(o.action);
  r.prev_action = m.actuators.apply(o.prev_action);
  r.joint_pos = m.passive.apply(o.joint_pos);
  r.joint_vel = m.passive.apply(o.joint_vel);
  r.arm_pos = m.posture.apply(o.arm_pos);

  r.torso_orientation = o.torso_orientation.mirrored_xz();
  r.base_pos = mirror_vec(o.base_pos);
  r.base_linvel = mirror_vec(o.base_linvel);
  r.base_acc = mirror_vec(o.base_acc);

  r.foot_pos[kLeftFoot] = mirror_vec(o.foot_pos[kRightFoot]);
  r.foot_pos[kRightFoot] = mirror_vec(o.foot_pos[kLeftFoot]);
  r.foot_rpy[kLeftFoot] = mirror_rpy(o.foot_rpy[kRightFoot]);
  r.foot_rpy[kRightFoot] = mirror_rpy(o.foot_rpy[kLeftFoot]);
  std::swap(r.contact[0], r.contact[1]);
  std::swap(r.airtime[0], r.airtime[1]);
  std::swap(r.touchdown[0], r.touchdown[1]);
  return r;
}

std::vector<double> mirror_action(const std::vector<double>& a,
                                  const MirrorSpec& m) {
  return m.actuators.apply(a);
}

}  // namespace sawlab
