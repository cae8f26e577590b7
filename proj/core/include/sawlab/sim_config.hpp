#pragma once

#include <vector>

namespace sawlab {

/// Compliant ground contact: spring-damper normal force, anchored tangential
/// spring clamped to the Coulomb cone.
struct ContactParams {
  double normal_stiffness = 5.0e4;   // N/m
  double normal_damping = 500.0;     // N*s/m
  double tangent_stiffness = 5.0e4;  // N/m
  double tangent_damping = 200.0;    // N*s/m
  double friction = 0.8;             // mu
};

/// One disturbance: a constant horizontal force on the torso over
/// [start_time, start_time + duration).
struct Push {
  int axis = 0;            // 0 = x; 1 = y reserved for non-planar data
  double force = 0.0;      // N, signed
  double duration = 0.0;   // s
  double start_time = 0.0; // s
  double height = 0.0;     // application height above the base origin, m
};

struct PushConfig {
  double probability = 0.01;    // per control step
  double force_min = 200.0;     // N (magnitude; sign is sampled)
  double force_max = 800.0;
  double duration_min = 0.02;   // s
  double duration_max = 0.02;
};

struct CommandRanges {
  double cx_min = -0.5, cx_max = 2.0;    // m/s
  double cy_min = -0.5, cy_max = 0.5;    // m/s
  double cyaw_min = -0.5, cyaw_max = 0.5;  // rad/s
};

enum class CommandCategory {
  kStanding,
  kSagittal,
  kLateral,
  kRotateInPlace,
  kOmnidirectional,
};

struct SimConfig {
  double physics_dt = 1.0 / 2000.0;
  int control_decimation = 40;  // 50 Hz policy rate
  double gravity = 9.81;
  ContactParams contact;

  double fall_height_fraction = 0.6;  // of nominal base height
  double fall_pitch = 1.0;            // rad
  double episode_length = 16.0;       // s

  int command_window_min = 100;  // control steps between command resamples
  int command_window_max = 300;
  CommandRanges command_ranges;
  // Planar preset: lateral/rotation categories produce commands the planar
  // dynamics cannot track; defaults restrict to standing + sagittal.
  std::vector<CommandCategory> categories{CommandCategory::kStanding,
                                          CommandCategory::kSagittal};

  PushConfig push;
  double init_pose_noise = 0.02;  // rad, uniform joint perturbation at reset

  double control_dt() const { return physics_dt * control_decimation; }
  int episode_steps() const;

  void validate() const;  // throws std::invalid_argument
};

struct DomainRandomization {
  bool enabled = true;
  double mass_scale_min = 0.9, mass_scale_max = 1.1;       // per link
  double friction_scale_min = 0.6, friction_scale_max = 1.2;
  double gain_scale_min = 0.9, gain_scale_max = 1.1;       // Kp/Kd per joint
  double noise_motor_pos = 0.0;     // rad, std
  double noise_motor_vel = 0.0;     // rad/s, std
  double noise_joint_pos = 0.0;
  double noise_joint_vel = 0.0;
  double noise_orientation = 0.0;   // rad, small-angle std
  int action_delay_max = 0;         // control steps, 0 or 1

  void validate() const;
};

}  // namespace sawlab
