#pragma once

#include <array>
#include <vector>

#include "sawlab/quaternion.hpp"

namespace sawlab {

using Vec3 = std::array<double, 3>;

/// Foot index convention used everywhere: 0 = left, 1 = right.
inline constexpr int kLeftFoot = 0;
inline constexpr int kRightFoot = 1;

/// Generalized robot state at one control step, the input to both the reward
/// engine and the policy feature encoder.
///
/// Frames: base_pos/base_linvel/base_acc are world-frame and gravity-aligned.
/// Foot positions are offsets from the base expressed in the gravity-aligned
/// base-heading frame (torso yaw removed), and foot roll-pitch-yaw is likewise
/// relative to the heading, so rewards are invariant to absolute heading.
struct Observation {
  std::vector<double> motor_pos;   // rad, actuated joints
  std::vector<double> motor_vel;   // rad/s
  std::vector<double> joint_pos;   // rad, passive joints (may be empty)
  std::vector<double> joint_vel;   // rad/s

  UnitQuaternion torso_orientation;
  Vec3 base_pos{0, 0, 0};      // m
  Vec3 base_linvel{0, 0, 0};   // m/s
  Vec3 base_acc{0, 0, 0};      // m/s^2, finite difference over control period

  std::array<Vec3, 2> foot_pos{{{0, 0, 0}, {0, 0, 0}}};   // m, heading frame
  std::array<Vec3, 2> foot_rpy{{{0, 0, 0}, {0, 0, 0}}};   // rad, heading frame
  std::array<bool, 2> contact{false, false};
  std::array<double, 2> airtime{0, 0};     // s since liftoff; 0 while in contact
  std::array<bool, 2> touchdown{false, false};  // contact began this step

  std::vector<double> arm_pos;         // rad, posture-group joints (may be empty)
  std::vector<double> applied_torque;  // N*m per actuator, post-clamp PD torque
  std::vector<double> prev_action;     // PD setpoints, rad
  std::vector<double> action;          // PD setpoints, rad

  double time = 0.0;  // s since episode start

  int num_actuators() const { return static_cast<int>(motor_pos.size()); }
};

}  // namespace sawlab
