#pragma once

#include <array>

namespace sawlab {

/// Unit quaternion (w, x, y, z). Rotations follow the Hamilton convention;
/// Euler angles are ZYX yaw-pitch-roll. q and -q denote the same rotation and
/// compare equal under distance().
struct UnitQuaternion {
  double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

  static UnitQuaternion identity() { return {}; }
  static UnitQuaternion from_yaw(double yaw);
  static UnitQuaternion from_pitch(double pitch);
  static UnitQuaternion from_rpy(double roll, double pitch, double yaw);
  static UnitQuaternion from_axis_angle(double ax, double ay, double az,
                                        double angle);

  double norm() const;
  /// Rescale to unit norm; throws std::invalid_argument on a near-zero input.
  UnitQuaternion& normalize();

  double dot(const UnitQuaternion& o) const {
    return w * o.w + x * o.x + y * o.y + z * o.z;
  }
  UnitQuaternion conjugate() const { return {w, -x, -y, -z}; }
  UnitQuaternion operator*(const UnitQuaternion& o) const;

  /// Yaw angle of the ZYX decomposition, in (-pi, pi].
  double yaw() const;
  /// Pitch and roll of the ZYX decomposition.
  double pitch() const;
  double roll() const;
  std::array<double, 3> to_rpy() const { return {roll(), pitch(), yaw()}; }

  /// Rotate a 3-vector by this quaternion.
  std::array<double, 3> rotate(const std::array<double, 3>& v) const;

  /// Reflection across the x-z plane: the mirrored rotation (w, -x, y, -z).
  UnitQuaternion mirrored_xz() const { return {w, -x, y, -z}; }
};

/// Distance 1 - (a.b)^2 in [0, 1]; zero iff a = +/-b, symmetric, invariant to
/// a sign flip of either argument. Inputs must be unit norm within 1e-6 or
/// std::invalid_argument is thrown.
double quat_distance(const UnitQuaternion& a, const UnitQuaternion& b);

/// Pure-yaw rotation at the given heading.
UnitQuaternion yaw_quat(double heading);

/// Roll-pitch component of q with the yaw removed: q = yaw_quat(q.yaw()) * rp.
UnitQuaternion rp_quat(const UnitQuaternion& q);

}  // namespace sawlab
