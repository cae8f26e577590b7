#include "sawlab/rewards.hpp"

#include <cmath>
#include <stdexcept>

#include "sawlab/quaternion.hpp"
#include "sawlab/util.hpp"

namespace sawlab {

void RewardConfig::validate() const {
  const double weights[] = {w_vel_x,       w_vel_y,          w_yaw,
                            w_rollpitch,   w_feet_contact,   w_base_height,
                            w_feet_airtime, w_feet_orientation, w_feet_position,
                            w_arm,         w_base_accel,     w_action_diff,
                            w_torque};
  for (double w : weights)
    if (!(w >= 0.0)) throw std::invalid_argument("reward weights must be >= 0");
  if (!(grace > 0.0)) throw std::invalid_argument("grace must be > 0");
  if (!(airtime_threshold > 0.0))
    throw std::invalid_argument("airtime_threshold must be > 0");
  for (double t : torque_limit)
    if (!(t > 0.0)) throw std::invalid_argument("torque limits must be > 0");
}

ContactTracker::ContactTracker(double dt, double grace_seconds) : dt_(dt) {
  if (dt <= 0.0) throw std::invalid_argument("tracker dt must be > 0");
  grace_steps_ = std::lround(grace_seconds / dt);
  if (grace_steps_ < 0) throw std::invalid_argument("negative grace window");
}

void ContactTracker::reset(const std::array<bool, 2>& contact) {
  step_ = 0;
  contact_ = contact;
  touchdown_ = {false, false};
  air_steps_ = {0, 0};
  air_at_td_ = {0.0, 0.0};
  seen_single_ = false;
  last_single_step_ = -1;
  if (contact[0] != contact[1]) {
    seen_single_ = true;
    last_single_step_ = 0;
  }
}

void ContactTracker::update(const std::array<bool, 2>& contact) {
  ++step_;
  for (int f = 0; f < 2; ++f) {
    touchdown_[f] = contact[f] && !contact_[f];
    if (contact[f]) {
      if (touchdown_[f])
        air_at_td_[f] = static_cast<double>(air_steps_[f]) * dt_;
      air_steps_[f] = 0;
    } else {
      ++air_steps_[f];
    }
  }
  contact_ = contact;
  if (contact[0] != contact[1]) {
    seen_single_ = true;
    last_single_step_ = step_;
  }
}

std::array<double, 2> ContactTracker::airtime() const {
  return {static_cast<double>(air_steps_[0]) * dt_,
          static_cast<double>(air_steps_[1]) * dt_};
}

double ContactTracker::last_single_contact_time() const {
  if (!seen_single_) return -1e300;
  return static_cast<double>(last_single_step_) * dt_;
}

bool ContactTracker::single_contact_within_grace(double now) const {
  if (!seen_single_) return false;
  const long now_step = std::lround(now / dt_);
  return now_step - last_single_step_ <= grace_steps_;
}

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::invalid_argument(
      std::string("non-finite observation field: ") + what);
}

/// World -> heading-frame projection of a horizontal vector.
std::array<double, 2> to_heading_frame(const Vec3& v, double yaw) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  return {c * v[0] + s * v[1], -s * v[0] + c * v[1]};
}

}  // namespace

std::array<double, 2> r_velocity(const Observation& obs, const Command& cmd,
                                 const RewardConfig& cfg) {
  require_finite(obs.base_linvel[0], "base_linvel.x");
  require_finite(obs.base_linvel[1], "base_linvel.y");
  const double yaw = obs.torso_orientation.yaw();
  const auto v = to_heading_frame(obs.base_linvel, yaw);
  const double cx = cmd.cx, cy = cmd.cy;
  std::array<double, 2> r;
  if (cmd.is_standing()) {
    r[0] = std::exp(-cfg.vel_scale * std::abs(v[0] - cx));
    r[1] = std::exp(-cfg.vel_scale * std::abs(v[1] - cy));
  } else {
    r[0] = std::exp(-cfg.vel_scale * (v[0] - cx) * (v[0] - cx));
    r[1] = std::exp(-cfg.vel_scale * (v[1] - cy) * (v[1] - cy));
  }
  return r;
}

double r_yaw(const Observation& obs, const Command& cmd,
             const RewardConfig& cfg) {
  const UnitQuaternion torso_yaw = yaw_quat(obs.torso_orientation.yaw());
  const UnitQuaternion target = yaw_quat(cmd.heading_ref);
  return std::exp(-cfg.yaw_scale * quat_distance(torso_yaw, target));
}

double r_rollpitch(const Observation& obs, const RewardConfig& cfg) {
  const UnitQuaternion rp = rp_quat(obs.torso_orientation);
  return std::exp(-cfg.rollpitch_scale *
                  quat_distance(rp, UnitQuaternion::identity()));
}

double r_feet_contact(const ContactTracker& tracker, const Command& cmd,
                      double now) {
  if (cmd.is_standing()) return 1.0;
  return tracker.single_contact_within_grace(now) ? 1.0 : 0.0;
}

double r_base_height(const Observation& obs, const RewardConfig& cfg) {
  return std::exp(-cfg.height_scale *
                  std::abs(obs.base_pos[2] - cfg.target_height));
}

double r_feet_airtime(const ContactTracker& tracker, const Command& cmd,
                      const RewardConfig& cfg) {
  if (cmd.is_standing()) return 1.0;
  double r = 0.0;
  for (int f = 0; f < 2; ++f) {
    if (tracker.touchdown()[f])
      r += tracker.airtime_at_touchdown()[f] - cfg.airtime_threshold;
  }
  return r;
}

double r_feet_orientation(const Observation& obs, const Command& cmd,
                          const RewardConfig& cfg) {
  const bool rotating = std::abs(cmd.cyaw) > 0.0;
  double err = 0.0;
  for (int f = 0; f < 2; ++f) {
    err += std::abs(wrap_angle(obs.foot_rpy[f][0] - cfg.nominal_foot_rpy[f][0]));
    err += std::abs(wrap_angle(obs.foot_rpy[f][1] - cfg.nominal_foot_rpy[f][1]));
    if (!rotating)
      err +=
          std::abs(wrap_angle(obs.foot_rpy[f][2] - cfg.nominal_foot_rpy[f][2]));
  }
  return std::exp(-cfg.feet_orientation_scale * err);
}

double r_feet_position(const Observation& obs, const Command& cmd,
                       const RewardConfig& cfg) {
  if (!cmd.is_standing()) return 1.0;
  double err = 0.0;
  for (int f = 0; f < 2; ++f)
    for (int a = 0; a < 3; ++a)
      err += std::abs(obs.foot_pos[f][a] - cfg.nominal_foot_pos[f][a]);
  return std::exp(-cfg.feet_position_scale * err);
}

double r_arm(const Observation& obs, const RewardConfig& cfg) {
  if (obs.arm_pos.empty()) return 1.0;
  if (obs.arm_pos.size() != cfg.nominal_arm_pos.size())
    throw std::invalid_argument("arm_pos / nominal_arm_pos size mismatch");
  double sq = 0.0;
  for (std::size_t i = 0; i < obs.arm_pos.size(); ++i) {
    const double d = obs.arm_pos[i] - cfg.nominal_arm_pos[i];
    sq += d * d;
  }
  return std::exp(-cfg.arm_scale * std::sqrt(sq));
}

double r_base_accel(const Observation& obs, const RewardConfig& cfg) {
  const double sum = std::abs(obs.base_acc[0]) + std::abs(obs.base_acc[1]) +
                     std::abs(obs.base_acc[2]);
  return std::exp(-cfg.accel_scale * sum);
}

double r_action_diff(const Observation& obs, const RewardConfig& cfg) {
  if (obs.action.size() != obs.prev_action.size())
    throw std::invalid_argument("action / prev_action size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < obs.action.size(); ++i)
    sum += std::abs(obs.action[i] - obs.prev_action[i]);
  return std::exp(-cfg.action_diff_scale * sum);
}

double r_torque(const Observation& obs, const RewardConfig& cfg) {
  const std::size_t n = obs.applied_torque.size();
  if (n == 0) throw std::invalid_argument("torque term requires actuators");
  if (cfg.torque_limit.size() != n)
    throw std::invalid_argument("torque_limit size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(cfg.torque_limit[i] > 0.0))
      throw std::invalid_argument("torque limits must be > 0");
    sum += std::abs(obs.applied_torque[i]) / cfg.torque_limit[i];
  }
  return std::exp(-cfg.torque_scale * sum / static_cast<double>(n));
}

const std::array<std::string_view, RewardBreakdown::kNumTerms>&
RewardBreakdown::term_names() {
  static const std::array<std::string_view, kNumTerms> names = {
      "vel_x",         "vel_y",       "yaw",
      "rollpitch",     "feet_contact", "base_height",
      "feet_airtime",  "feet_orientation", "feet_position",
      "arm",           "base_accel",  "action_diff",
      "torque"};
  return names;
}

int RewardBreakdown::term_index(std::string_view name) {
  const auto& names = term_names();
  for (int i = 0; i < kNumTerms; ++i)
    if (names[i] == name) return i;
  throw std::invalid_argument("unknown reward term: " + std::string(name));
}

std::map<std::string, double> RewardBreakdown::to_map() const {
  std::map<std::string, double> m;
  const auto& names = term_names();
  for (int i = 0; i < kNumTerms; ++i) m[std::string(names[i])] = weighted[i];
  m["total"] = total;
  return m;
}

RewardBreakdown total_reward(const Observation& obs, const Command& cmd,
                             const ContactTracker& tracker,
                             const RewardConfig& cfg) {
  RewardBreakdown b;
  const auto vel = r_velocity(obs, cmd, cfg);
  b.raw[0] = vel[0];
  b.raw[1] = vel[1];
  b.raw[2] = r_yaw(obs, cmd, cfg);
  b.raw[3] = r_rollpitch(obs, cfg);
  b.raw[4] = r_feet_contact(tracker, cmd, obs.time);
  b.raw[5] = r_base_height(obs, cfg);
  b.raw[6] = r_feet_airtime(tracker, cmd, cfg);
  b.raw[7] = r_feet_orientation(obs, cmd, cfg);
  b.raw[8] = r_feet_position(obs, cmd, cfg);
  b.raw[9] = r_arm(obs, cfg);
  b.raw[10] = r_base_accel(obs, cfg);
  b.raw[11] = r_action_diff(obs, cfg);
  b.raw[12] = r_torque(obs, cfg);

  const double weights[RewardBreakdown::kNumTerms] = {
      cfg.w_vel_x,       cfg.w_vel_y,          cfg.w_yaw,
      cfg.w_rollpitch,   cfg.w_feet_contact,   cfg.w_base_height,
      cfg.w_feet_airtime, cfg.w_feet_orientation, cfg.w_feet_position,
      cfg.w_arm,         cfg.w_base_accel,     cfg.w_action_diff,
      cfg.w_torque};
  for (int i = 0; i < RewardBreakdown::kNumTerms; ++i) {
    b.weighted[i] = weights[i] * b.raw[i];
    b.total += b.weighted[i];
  }
  return b;
}

double non_airtime_weight_sum(const RewardConfig& cfg) {
  return cfg.w_vel_x + cfg.w_vel_y + cfg.w_yaw + cfg.w_rollpitch +
         cfg.w_feet_contact + cfg.w_base_height + cfg.w_feet_orientation +
         cfg.w_feet_position + cfg.w_arm + cfg.w_base_accel +
         cfg.w_action_diff + cfg.w_torque;
}

}  // namespace sawlab
