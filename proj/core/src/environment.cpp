#include "sawlab/environment.hpp"

#include <cmath>

#include "sawlab/errors.hpp"
#include "sawlab/util.hpp"

namespace sawlab {

int SimConfig::episode_steps() const {
  return static_cast<int>(std::lround(episode_length / control_dt()));
}

void SimConfig::validate() const {
  if (!(physics_dt > 0.0)) throw std::invalid_argument("physics_dt must be > 0");
  if (control_decimation < 1)
    throw std::invalid_argument("control_decimation must be >= 1");
  if (!(gravity >= 0.0)) throw std::invalid_argument("gravity must be >= 0");
  if (!(fall_height_fraction > 0.0 && fall_height_fraction < 1.0))
    throw std::invalid_argument("fall_height_fraction must be in (0,1)");
  if (!(episode_length > 0.0))
    throw std::invalid_argument("episode_length must be > 0");
  if (command_window_min < 1 || command_window_max < command_window_min)
    throw std::invalid_argument("command window range is degenerate");
  if (!(push.probability >= 0.0 && push.probability <= 1.0))
    throw std::invalid_argument("push probability must be in [0,1]");
  if (!(push.force_min <= push.force_max) ||
      !(push.duration_min <= push.duration_max) || !(push.duration_min > 0.0))
    throw std::invalid_argument("push ranges are degenerate");
  if (categories.empty())
    throw std::invalid_argument("command category set is empty");
  const CommandRanges& r = command_ranges;
  if (!(r.cx_min <= r.cx_max && r.cy_min <= r.cy_max &&
        r.cyaw_min <= r.cyaw_max))
    throw std::invalid_argument("command ranges are degenerate");
}

void DomainRandomization::validate() const {
  auto contains_one = [](double lo, double hi) {
    return lo <= 1.0 && hi >= 1.0 && lo <= hi;
  };
  if (!contains_one(mass_scale_min, mass_scale_max) ||
      !contains_one(friction_scale_min, friction_scale_max) ||
      !contains_one(gain_scale_min, gain_scale_max))
    throw std::invalid_argument("randomization scale ranges must contain 1.0");
  if (action_delay_max < 0 || action_delay_max > 1)
    throw std::invalid_argument("action delay must be 0 or 1 control steps");
  for (double s : {noise_motor_pos, noise_motor_vel, noise_joint_pos,
                   noise_joint_vel, noise_orientation})
    if (!(s >= 0.0) || !std::isfinite(s))
      throw std::invalid_argument("noise stds must be finite and >= 0");
}

Command sample_command(RandomStream& rng, const SimConfig& cfg) {
  const auto& cats = cfg.categories;
  const auto cat = cats[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(cats.size()) - 1))];
  const CommandRanges& r = cfg.command_ranges;
  Command c;
  switch (cat) {
    case CommandCategory::kStanding:
      break;
    case CommandCategory::kSagittal:
      c.cx = rng.uniform(r.cx_min, r.cx_max);
      break;
    case CommandCategory::kLateral:
      c.cy = rng.uniform(r.cy_min, r.cy_max);
      break;
    case CommandCategory::kRotateInPlace:
      c.cyaw = rng.uniform(r.cyaw_min, r.cyaw_max);
      break;
    case CommandCategory::kOmnidirectional:
      c.cx = rng.uniform(r.cx_min, r.cx_max);
      c.cy = rng.uniform(r.cy_min, r.cy_max);
      c.cyaw = rng.uniform(r.cyaw_min, r.cyaw_max);
      break;
  }
  return c;
}

int sample_command_window(RandomStream& rng, const SimConfig& cfg) {
  return static_cast<int>(
      rng.uniform_int(cfg.command_window_min, cfg.command_window_max));
}

std::optional<Push> maybe_push(RandomStream& rng, const SimConfig& cfg,
                               double t) {
  if (!rng.bernoulli(cfg.push.probability)) return std::nullopt;
  Push p;
  p.axis = 0;
  const double magnitude = rng.uniform(cfg.push.force_min, cfg.push.force_max);
  p.force = rng.bernoulli(0.5) ? magnitude : -magnitude;
  p.duration = rng.uniform(cfg.push.duration_min, cfg.push.duration_max);
  if (cfg.push.duration_min == cfg.push.duration_max)
    p.duration = cfg.push.duration_min;
  p.start_time = t;
  return p;
}

Environment::Environment(RobotModel model, SimConfig sim_cfg,
                         RewardConfig reward_cfg, DomainRandomization dr,
                         std::uint64_t seed)
    : base_model_(std::move(model)),
      sim_cfg_(std::move(sim_cfg)),
      reward_cfg_(std::move(reward_cfg)),
      dr_(dr),
      rng_(seed) {
  base_model_.validate();
  sim_cfg_.validate();
  reward_cfg_.validate();
  dr_.validate();
  if (reward_cfg_.torque_limit.empty())
    reward_cfg_.torque_limit = base_model_.torque_limits();
  if (reward_cfg_.nominal_arm_pos.size() != base_model_.arm_joints.size())
    reward_cfg_.nominal_arm_pos.assign(base_model_.arm_joints.size(), 0.0);
}

Observation Environment::reset(std::uint64_t seed) {
  rng_.seed(seed);
  return reset();
}

void Environment::randomize_and_rebuild() {
  RobotModel m = base_model_;
  SimConfig cfg = sim_cfg_;
  if (dr_.enabled) {
    for (LinkDef& l : m.links) {
      const double s = rng_.uniform(dr_.mass_scale_min, dr_.mass_scale_max);
      l.mass *= s;
      l.inertia *= s;
    }
    cfg.contact.friction *=
        rng_.uniform(dr_.friction_scale_min, dr_.friction_scale_max);
    // One gain scale per joint pair keeps the model mirror-consistent.
    const int nj = m.num_joints();
    std::vector<double> gain(nj, 1.0);
    for (int j = 0; j < nj; ++j) {
      const int partner = m.mirror.actuators.perm[j];
      if (partner >= j)
        gain[j] = rng_.uniform(dr_.gain_scale_min, dr_.gain_scale_max);
      else
        gain[j] = gain[partner];
    }
    for (int j = 0; j < nj; ++j) {
      m.joints[j].kp *= gain[j];
      m.joints[j].kd *= gain[j];
    }
    action_delay_ = static_cast<int>(rng_.uniform_int(0, dr_.action_delay_max));
  } else {
    action_delay_ = 0;
  }
  dyn_ = std::make_unique<PlanarDynamics>(m, cfg);
}

Observation Environment::reset() {
  randomize_and_rebuild();

  std::vector<double> pose = base_model_.nominal_pose;
  if (sim_cfg_.init_pose_noise > 0.0) {
    for (double& p : pose)
      p += rng_.uniform(-sim_cfg_.init_pose_noise, sim_cfg_.init_pose_noise);
  }
  state_ = dyn_->make_state(pose);

  time_ = 0.0;
  step_count_ = 0;
  terminated_ = false;
  fell_ = false;
  active_push_.reset();
  queued_pushes_.clear();

  cmd_ = Command{};
  if (auto_command_) cmd_ = sample_command(rng_, sim_cfg_);
  window_left_ = sample_command_window(rng_, sim_cfg_);

  std::array<bool, 2> contact{dyn_->foot_in_contact(state_, 0),
                              dyn_->foot_in_contact(state_, 1)};
  tracker_ = ContactTracker(sim_cfg_.control_dt(), reward_cfg_.grace);
  tracker_.reset(contact);

  prev_setpoints_ = base_model_.clamp_setpoints(base_model_.nominal_pose);
  delayed_setpoints_ = prev_setpoints_;
  prev_linvel_ = {state_.v[0], 0.0, state_.v[1]};

  Eigen::VectorXd zero_torque = Eigen::VectorXd::Zero(base_model_.num_joints());
  obs_ = build_observation(zero_torque, contact, {false, false});
  obs_.prev_action = prev_setpoints_;
  obs_.action = prev_setpoints_;
  return obs_;
}

std::vector<double> Environment::setpoints_from_offsets(
    const std::vector<double>& offsets) const {
  if (offsets.size() != base_model_.nominal_pose.size())
    throw std::invalid_argument("action dimension mismatch");
  std::vector<double> sp(offsets.size());
  for (std::size_t i = 0; i < offsets.size(); ++i)
    sp[i] = base_model_.nominal_pose[i] + offsets[i];
  return base_model_.clamp_setpoints(sp);
}

void Environment::queue_push(Push push) {
  queued_pushes_.push_back(push);
}

StepResult Environment::step(const std::vector<double>& action_offsets) {
  if (terminated_)
    throw ProtocolError("step() called on a terminated environment");

  const std::vector<double> commanded = setpoints_from_offsets(action_offsets);
  // Optional one-step action delay from domain randomization.
  std::vector<double> setpoints = commanded;
  if (action_delay_ > 0) {
    setpoints = delayed_setpoints_;
    delayed_setpoints_ = commanded;
  }

  StepResult result;

  // Push bookkeeping: queued pushes fire first; otherwise the training
  // distribution samples one when none is active.
  if (!active_push_) {
    if (!queued_pushes_.empty()) {
      Push p = queued_pushes_.front();
      queued_pushes_.erase(queued_pushes_.begin());
      p.start_time = time_;
      p.height = base_model_.push_attach_height;
      active_push_ = p;
      result.push_started = p;
    } else if (auto_push_) {
      if (auto p = maybe_push(rng_, sim_cfg_, time_)) {
        p->height = base_model_.push_attach_height;
        active_push_ = *p;
        result.push_started = *p;
      }
    }
  }

  cmd_.integrate_heading(sim_cfg_.control_dt());

  Eigen::VectorXd sp(base_model_.num_joints());
  for (int i = 0; i < base_model_.num_joints(); ++i) sp[i] = setpoints[i];

  std::array<bool, 2> contact{false, false};
  StepDetail detail;
  std::vector<ExternalForce> external;
  for (int sub = 0; sub < sim_cfg_.control_decimation; ++sub) {
    external.clear();
    if (active_push_) {
      const double t0 = state_.time;
      if (t0 >= active_push_->start_time &&
          t0 < active_push_->start_time + active_push_->duration) {
        ExternalForce f;
        f.link = 0;
        f.point = {0.0, base_model_.push_attach_height};
        f.force = {active_push_->axis == 0 ? active_push_->force : 0.0, 0.0};
        external.push_back(f);
      } else if (t0 >= active_push_->start_time + active_push_->duration) {
        active_push_.reset();
      }
    }
    dyn_->step(state_, sp, external, &detail);
    for (int c = 0; c < 4; ++c)
      if (detail.contacts[c].active) contact[detail.contacts[c].foot] = true;
  }

  time_ += sim_cfg_.control_dt();
  ++step_count_;

  tracker_.update(contact);

  Observation obs = build_observation(detail.joint_torques, contact,
                                      tracker_.touchdown());
  obs.prev_action = prev_setpoints_;
  obs.action = commanded;
  prev_setpoints_ = commanded;

  result.cmd = cmd_;
  result.reward = total_reward(obs, cmd_, tracker_, reward_cfg_);

  const double height_limit =
      sim_cfg_.fall_height_fraction * base_model_.nominal_base_height;
  fell_ = state_.q[1] < height_limit ||
          std::abs(state_.q[2]) > sim_cfg_.fall_pitch;
  terminated_ = fell_ || step_count_ >= sim_cfg_.episode_steps();

  result.obs = obs;
  result.policy_obs = apply_observation_noise(obs);
  result.done = terminated_;
  result.fell = fell_;
  obs_ = obs;
  prev_linvel_ = obs.base_linvel;

  // Command resampling happens after the step so the reward for this step
  // was judged against the command the policy was following.
  if (!terminated_ && auto_command_) {
    if (--window_left_ <= 0) {
      const double heading = cmd_.heading_ref;
      cmd_ = sample_command(rng_, sim_cfg_);
      cmd_.heading_ref = heading;
      window_left_ = sample_command_window(rng_, sim_cfg_);
    }
  }
  return result;
}

Observation Environment::build_observation(
    const Eigen::VectorXd& torque, const std::array<bool, 2>& contact,
    const std::array<bool, 2>& touchdown) const {
  Observation o;
  const int nj = base_model_.num_joints();
  o.motor_pos.resize(nj);
  o.motor_vel.resize(nj);
  for (int j = 0; j < nj; ++j) {
    o.motor_pos[j] = state_.q[3 + j];
    o.motor_vel[j] = state_.v[3 + j];
  }
  // Planar model: no passive joints.
  o.torso_orientation = UnitQuaternion::from_pitch(-state_.q[2]);
  o.base_pos = {state_.q[0], 0.0, state_.q[1]};
  o.base_linvel = {state_.v[0], 0.0, state_.v[1]};
  const double dt = sim_cfg_.control_dt();
  o.base_acc = {(o.base_linvel[0] - prev_linvel_[0]) / dt, 0.0,
                (o.base_linvel[2] - prev_linvel_[2]) / dt};
  if (step_count_ == 0) o.base_acc = {0.0, 0.0, 0.0};

  for (int f = 0; f < 2; ++f) {
    const int link = base_model_.foot_link[f];
    const Eigen::Vector2d ankle = dyn_->link_origin(state_, link);
    // Heading frame coincides with the world frame in the sagittal plane.
    o.foot_pos[f] = {ankle.x() - state_.q[0], 0.0, ankle.y() - state_.q[1]};
    const double foot_angle = dyn_->link_angle(state_, link);
    o.foot_rpy[f] = {0.0, -foot_angle, 0.0};
    o.contact[f] = contact[f];
    o.touchdown[f] = touchdown[f];
  }
  o.airtime = tracker_.airtime();

  o.arm_pos.resize(base_model_.arm_joints.size());
  for (std::size_t i = 0; i < base_model_.arm_joints.size(); ++i)
    o.arm_pos[i] = state_.q[3 + base_model_.arm_joints[i]];

  o.applied_torque.resize(nj);
  for (int j = 0; j < nj; ++j)
    o.applied_torque[j] = torque.size() == nj ? torque[j] : 0.0;

  o.time = time_;
  return o;
}

Observation Environment::apply_observation_noise(const Observation& obs) {
  const bool any_noise =
      dr_.enabled &&
      (dr_.noise_motor_pos > 0.0 || dr_.noise_motor_vel > 0.0 ||
       dr_.noise_joint_pos > 0.0 || dr_.noise_joint_vel > 0.0 ||
       dr_.noise_orientation > 0.0);
  if (!any_noise) return obs;
  Observation noisy = obs;
  for (double& v : noisy.motor_pos) v += rng_.normal(0.0, dr_.noise_motor_pos);
  for (double& v : noisy.motor_vel) v += rng_.normal(0.0, dr_.noise_motor_vel);
  for (double& v : noisy.joint_pos) v += rng_.normal(0.0, dr_.noise_joint_pos);
  for (double& v : noisy.joint_vel) v += rng_.normal(0.0, dr_.noise_joint_vel);
  if (dr_.noise_orientation > 0.0) {
    const UnitQuaternion jitter = UnitQuaternion::from_rpy(
        rng_.normal(0.0, dr_.noise_orientation),
        rng_.normal(0.0, dr_.noise_orientation),
        rng_.normal(0.0, dr_.noise_orientation));
    noisy.torso_orientation = (obs.torso_orientation * jitter).normalize();
  }
  return noisy;
}

EpisodeLog rollout(Environment& env, Controller& controller, int horizon,
                   std::uint64_t seed) {
  EpisodeLog log;
  log.dt = env.sim_config().control_dt();
  log.model_hash = env.model().hash();

  Observation obs = env.reset(seed);
  controller.reset();
  for (int t = 0; t < horizon && !env.done(); ++t) {
    const std::vector<double> action = controller.act(obs, env.command());
    StepResult r = env.step(action);

    LogRecord rec;
    rec.t = r.obs.time;
    rec.obs = r.obs;
    rec.cmd = r.cmd;
    rec.rewards = r.reward.to_map();
    if (r.push_started) {
      rec.push = PushMarker{r.push_started->axis, r.push_started->force,
                            r.push_started->duration,
                            r.push_started->start_time,
                            r.push_started->height};
    }
    rec.fall = r.fell;
    rec.done = r.done;
    log.records.push_back(rec);
    obs = r.policy_obs;
  }
  if (!log.records.empty()) log.records.back().done = true;
  return log;
}

}  // namespace sawlab
