#include "sawlab/quaternion.hpp"

#include <cmath>
#include <stdexcept>

namespace sawlab {

UnitQuaternion UnitQuaternion::from_yaw(double yaw) {
  return {std::cos(0.5 * yaw), 0.0, 0.0, std::sin(0.5 * yaw)};
}

UnitQuaternion UnitQuaternion::from_pitch(double pitch) {
  return {std::cos(0.5 * pitch), 0.0, std::sin(0.5 * pitch), 0.0};
}

UnitQuaternion UnitQuaternion::from_rpy(double roll, double pitch, double yaw) {
  const double cr = std::cos(0.5 * roll), sr = std::sin(0.5 * roll);
  const double cp = std::cos(0.5 * pitch), sp = std::sin(0.5 * pitch);
  const double cy = std::cos(0.5 * yaw), sy = std::sin(0.5 * yaw);
  // Rz(yaw) * Ry(pitch) * Rx(roll)
  return {cy * cp * cr + sy * sp * sr, cy * cp * sr - sy * sp * cr,
          cy * sp * cr + sy * cp * sr, sy * cp * cr - cy * sp * sr};
}

UnitQuaternion UnitQuaternion::from_axis_angle(double ax, double ay, double az,
                                               double angle) {
  const double n = std::sqrt(ax * ax + ay * ay + az * az);
  if (n == 0.0) throw std::invalid_argument("zero rotation axis");
  const double s = std::sin(0.5 * angle) / n;
  return {std::cos(0.5 * angle), ax * s, ay * s, az * s};
}

double UnitQuaternion::norm() const {
  return std::sqrt(w * w + x * x + y * y + z * z);
}

UnitQuaternion& UnitQuaternion::normalize() {
  const double n = norm();
  if (n < 1e-12) throw std::invalid_argument("cannot normalize zero quaternion");
  w /= n;
  x /= n;
  y /= n;
  z /= n;
  return *this;
}

UnitQuaternion UnitQuaternion::operator*(const UnitQuaternion& o) const {
  return {w * o.w - x * o.x - y * o.y - z * o.z,
          w * o.x + x * o.w + y * o.z - z * o.y,
          w * o.y - x * o.z + y * o.w + z * o.x,
          w * o.z + x * o.y - y * o.x + z * o.w};
}

double UnitQuaternion::yaw() const {
  return std::atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z));
}

double UnitQuaternion::pitch() const {
  double s = 2.0 * (w * y - z * x);
  s = std::clamp(s, -1.0, 1.0);
  return std::asin(s);
}

double UnitQuaternion::roll() const {
  return std::atan2(2.0 * (w * x + y * z), 1.0 - 2.0 * (x * x + y * y));
}

std::array<double, 3> UnitQuaternion::rotate(
    const std::array<double, 3>& v) const {
  // v' = q v q*; expanded form.
  const double tx = 2.0 * (y * v[2] - z * v[1]);
  const double ty = 2.0 * (z * v[0] - x * v[2]);
  const double tz = 2.0 * (x * v[1] - y * v[0]);
  return {v[0] + w * tx + (y * tz - z * ty), v[1] + w * ty + (z * tx - x * tz),
          v[2] + w * tz + (x * ty - y * tx)};
}

namespace {
void require_unit(const UnitQuaternion& q, const char* which) {
  if (std::abs(q.norm() - 1.0) > 1e-6)
    throw std::invalid_argument(std::string("non-unit quaternion argument: ") +
                                which);
}
}  // namespace

double quat_distance(const UnitQuaternion& a, const UnitQuaternion& b) {
  require_unit(a, "lhs");
  require_unit(b, "rhs");
  const double d = a.dot(b);
  double out = 1.0 - d * d;
  return out < 0.0 ? 0.0 : out;
}

UnitQuaternion yaw_quat(double heading) {
  return UnitQuaternion::from_yaw(heading);
}

UnitQuaternion rp_quat(const UnitQuaternion& q) {
  return yaw_quat(q.yaw()).conjugate() * q;
}

}  // namespace sawlab
