#pragma once

#include <vector>

#include "sawlab/command.hpp"
#include "sawlab/observation.hpp"

namespace sawlab {

/// Signed permutation out[i] = signs[i] * v[perm[i]]. Mirror maps are required
/// to be involutions: perm[perm[i]] == i and signs[i]*signs[perm[i]] == 1, so
/// applying one twice reproduces the input bitwise.
struct SignedPermutation {
  std::vector<int> perm;
  std::vector<double> signs;

  static SignedPermutation identity(int n);
  /// Pairwise left/right swap over blocks: [L0..Lk R0..Rk] with unit signs.
  static SignedPermutation lr_swap(int half);

  int size() const { return static_cast<int>(perm.size()); }
  /// Throws std::invalid_argument unless this is a signed involution.
  void validate() const;
  /// Throws std::invalid_argument on size mismatch.
  std::vector<double> apply(const std::vector<double>& v) const;
};

/// Left/right reflection operators for one robot model. Geometric fields
/// (base, torso, feet) mirror by fixed rules; joint-indexed arrays mirror via
/// the per-group signed permutations carried here. The command mirror is
/// (cx, cy, cyaw) -> (cx, -cy, -cyaw).
struct MirrorSpec {
  SignedPermutation actuators;  // motor_pos/vel, torques, actions
  SignedPermutation passive;    // unactuated joints
  SignedPermutation posture;    // arm posture group

  void validate() const;
};

Observation mirror_observation(const Observation& o, const MirrorSpec& m);
std::vector<double> mirror_action(const std::vector<double>& a,
                                  const MirrorSpec& m);
inline Command mirror_command(const Command& c) { return c.mirrored(); }

}  // namespace sawlab
