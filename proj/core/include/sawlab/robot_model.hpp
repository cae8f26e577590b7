#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "sawlab/mirror.hpp"

namespace sawlab {

/// One actuated revolute joint: PD gains, torque limit and the setpoint range
/// actions are clamped into.
struct JointDef {
  std::string name;
  double kp = 0.0;            // N*m/rad
  double kd = 0.0;            // N*m*s/rad
  double torque_limit = 0.0;  // N*m
  double setpoint_min = 0.0;  // rad
  double setpoint_max = 0.0;
};

/// One rigid link of the planar tree. The link frame has its origin at the
/// proximal revolute joint; the base link's origin is the floating base.
struct LinkDef {
  std::string name;
  int parent = -1;                          // link index, -1 for the base
  int joint = -1;                           // joints[] index, -1 for the base
  Eigen::Vector2d anchor{0.0, 0.0};         // joint position in parent frame
  double mass = 0.0;                        // kg
  double inertia = 0.0;                     // kg*m^2 about the CoM
  Eigen::Vector2d com{0.0, 0.0};            // CoM in link frame
};

/// Planar sagittal-plane biped: floating base (x, z, pitch), two
/// hip-knee-ankle legs with flat feet, optional one-DOF arms. Generalized
/// coordinates are [x, z, base_angle, joint angles...] with joint i at
/// q[3 + i].
struct RobotModel {
  std::vector<LinkDef> links;   // links[0] is the base
  std::vector<JointDef> joints; // joint i drives the link with joint == i

  int foot_link[2] = {-1, -1};            // left, right
  Eigen::Vector2d heel{0.0, 0.0};         // contact points in foot frame
  Eigen::Vector2d toe{0.0, 0.0};

  std::vector<double> nominal_pose;       // per joint, rad
  double nominal_base_height = 0.0;       // m, soles resting on the ground
  double push_attach_height = 0.25;       // m above base origin, on the torso

  std::vector<int> arm_joints;            // posture group (joint indices)
  MirrorSpec mirror;

  int num_joints() const { return static_cast<int>(joints.size()); }
  int num_dof() const { return 3 + num_joints(); }
  double total_mass() const;

  std::vector<double> torque_limits() const;
  /// Clamp a setpoint vector into the per-joint ranges.
  std::vector<double> clamp_setpoints(const std::vector<double>& sp) const;

  void validate() const;  // throws std::invalid_argument

  /// Canonical serialization hash; identifies the model in logs/checkpoints.
  std::string hash() const;
};

/// Dimensions, masses and gains for the default desk-scale biped. All entries
/// are plain config values with stand-in defaults (32 kg, 0.80 m base
/// height); none are claimed to match any particular hardware.
struct PlanarBipedParams {
  bool with_arms = false;
  double torso_mass = 18.0;     // reduced to 16 when arms carry 2x1 kg
  double torso_length = 0.5;
  double torso_inertia = 0.38;
  double thigh_mass = 3.5;
  double thigh_length = 0.4;
  double shin_mass = 2.5;
  double shin_length = 0.4;
  double foot_mass = 1.0;
  double foot_ankle_height = 0.05;
  double foot_heel = 0.06;      // behind the ankle
  double foot_toe = 0.14;       // ahead of the ankle
  double arm_mass = 1.0;
  double arm_length = 0.3;
  double knee_bend = 0.35374;   // nominal crouch; base height = ankle_h + (thigh+shin)*cos

  double hip_kp = 250.0, hip_kd = 8.0, hip_torque = 150.0;
  double knee_kp = 250.0, knee_kd = 8.0, knee_torque = 150.0;
  double ankle_kp = 120.0, ankle_kd = 4.0, ankle_torque = 80.0;
  double arm_kp = 60.0, arm_kd = 2.0, arm_torque = 50.0;

  double push_attach_height = 0.25;
};

RobotModel planar_biped(const PlanarBipedParams& params = {});

}  // namespace sawlab
