#pragma once

namespace sawlab {

/// User velocity/heading command. Sagittal and lateral velocities are in the
/// robot's heading frame; the yaw rate is integrated into an absolute heading
/// target so orientation is rewarded against accumulated heading, not
/// instantaneous rate. The all-zero command means standing.
struct Command {
  double cx = 0.0;           // sagittal velocity, m/s
  double cy = 0.0;           // lateral velocity, m/s
  double cyaw = 0.0;         // yaw rate, rad/s
  double heading_ref = 0.0;  // absolute heading target, rad, in (-pi, pi]

  bool is_standing() const { return cx == 0.0 && cy == 0.0 && cyaw == 0.0; }

  /// Advance the heading target by one control period.
  void integrate_heading(double dt);

  /// Reflected command across the sagittal plane: (cx, -cy, -cyaw), heading
  /// target negated.
  Command mirrored() const;
};

}  // namespace sawlab
