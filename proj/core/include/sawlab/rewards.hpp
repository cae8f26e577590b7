#pragma once

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "sawlab/command.hpp"
#include "sawlab/observation.hpp"

namespace sawlab {

/// Weights, exponential scales and target constants for every reward term.
/// All values are configuration, not code constants, so experiments can be
/// replayed from their resolved config file alone.
struct RewardConfig {
  // Per-term weights.
  double w_vel_x = 0.15;
  double w_vel_y = 0.15;
  double w_yaw = 0.1;
  double w_rollpitch = 0.2;
  double w_feet_contact = 0.1;
  double w_base_height = 0.05;
  double w_feet_airtime = 1.0;  // the only sparse term
  double w_feet_orientation = 0.05;
  double w_feet_position = 0.05;
  double w_arm = 0.03;
  double w_base_accel = 0.1;
  double w_action_diff = 0.02;
  double w_torque = 0.02;

  // Exponential scales.
  double vel_scale = 5.0;
  double yaw_scale = 300.0;
  double rollpitch_scale = 30.0;
  double height_scale = 20.0;
  double feet_position_scale = 3.0;
  double feet_orientation_scale = 1.0;
  double arm_scale = 3.0;
  double accel_scale = 0.01;
  double action_diff_scale = 0.02;
  double torque_scale = 0.02;

  // Targets and timing.
  double target_height = 0.80;      // c_h, m
  double grace = 0.2;               // s of single-contact credit
  double airtime_threshold = 0.4;   // s paid back at each touchdown
  std::array<Vec3, 2> nominal_foot_pos{
      {{0.0, 0.12, -0.75}, {0.0, -0.12, -0.75}}};  // c_feet, heading frame
  std::array<Vec3, 2> nominal_foot_rpy{{{0, 0, 0}, {0, 0, 0}}};
  std::vector<double> nominal_arm_pos;             // c_arm; empty = no arms
  std::vector<double> torque_limit;                // t_max per actuator, N*m

  void validate() const;  // throws std::invalid_argument
};

/// Per-foot contact bookkeeping at the control rate. Time is tracked in
/// integer control steps so the 0.2 s grace window and the 0.4 s airtime
/// threshold are exact at 50 Hz resolution.
class ContactTracker {
 public:
  ContactTracker() = default;
  ContactTracker(double dt, double grace_seconds);

  void reset(const std::array<bool, 2>& contact);
  /// Advance one control step with the new contact flags.
  void update(const std::array<bool, 2>& contact);

  double dt() const { return dt_; }
  double time() const { return static_cast<double>(step_) * dt_; }
  const std::array<bool, 2>& contact() const { return contact_; }
  const std::array<bool, 2>& touchdown() const { return touchdown_; }
  /// Seconds since liftoff; 0 while in contact.
  std::array<double, 2> airtime() const;
  /// Airtime each foot had accumulated at its most recent touchdown step;
  /// meaningful only where touchdown() is set.
  const std::array<double, 2>& airtime_at_touchdown() const { return air_at_td_; }

  /// Most recent time at which exactly one foot touched the ground, or a
  /// large negative value if that has not happened yet.
  double last_single_contact_time() const;
  /// True if single contact occurred at any step in [now - grace, now].
  bool single_contact_within_grace(double now) const;

 private:
  double dt_ = 0.02;
  long grace_steps_ = 10;
  long step_ = 0;
  std::array<bool, 2> contact_{false, false};
  std::array<bool, 2> touchdown_{false, false};
  std::array<long, 2> air_steps_{0, 0};
  std::array<double, 2> air_at_td_{0.0, 0.0};
  long last_single_step_ = -1;
  bool seen_single_ = false;
};

// Individual reward terms. All bounded terms map any finite input into (0, 1].
// The feet-airtime term is sparse: zero except on touchdown steps (walking)
// and constant 1 when standing.

/// Velocity tracking per axis, in the heading frame. Standing uses
/// exp(-k|v - c|), walking exp(-k (v - c)^2).
std::array<double, 2> r_velocity(const Observation& obs, const Command& cmd,
                                 const RewardConfig& cfg);
double r_yaw(const Observation& obs, const Command& cmd,
             const RewardConfig& cfg);
double r_rollpitch(const Observation& obs, const RewardConfig& cfg);
double r_feet_contact(const ContactTracker& tracker, const Command& cmd,
                      double now);
double r_base_height(const Observation& obs, const RewardConfig& cfg);
double r_feet_airtime(const ContactTracker& tracker, const Command& cmd,
                      const RewardConfig& cfg);
double r_feet_orientation(const Observation& obs, const Command& cmd,
                          const RewardConfig& cfg);
double r_feet_position(const Observation& obs, const Command& cmd,
                       const RewardConfig& cfg);
double r_arm(const Observation& obs, const RewardConfig& cfg);
double r_base_accel(const Observation& obs, const RewardConfig& cfg);
double r_action_diff(const Observation& obs, const RewardConfig& cfg);
double r_torque(const Observation& obs, const RewardConfig& cfg);

/// All thirteen terms of one control step. `weighted[i]` is `weight_i *
/// raw[i]` and `total` is their sum in fixed term order, so the breakdown
/// reproduces the total exactly.
struct RewardBreakdown {
  static constexpr int kNumTerms = 13;
  static const std::array<std::string_view, kNumTerms>& term_names();
  static int term_index(std::string_view name);

  std::array<double, kNumTerms> raw{};
  std::array<double, kNumTerms> weighted{};
  double total = 0.0;

  std::map<std::string, double> to_map() const;  // weighted terms + "total"
};

RewardBreakdown total_reward(const Observation& obs, const Command& cmd,
                             const ContactTracker& tracker,
                             const RewardConfig& cfg);

/// Sum of all weights except feet-airtime: an upper bound on the total for
/// any walking step without a touchdown event.
double non_airtime_weight_sum(const RewardConfig& cfg);

}  // namespace sawlab
