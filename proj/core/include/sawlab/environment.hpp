#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "sawlab/episode_log.hpp"
#include "sawlab/physics.hpp"
#include "sawlab/random.hpp"
#include "sawlab/rewards.hpp"

namespace sawlab {

/// Draw a command from the configured category set: the category is uniform
/// over the set, then each active component is uniform over its range.
/// Inactive components are exactly zero.
Command sample_command(RandomStream& rng, const SimConfig& cfg);

/// Steps until the next command resample, uniform over the configured range.
int sample_command_window(RandomStream& rng, const SimConfig& cfg);

/// With the configured per-control-step probability, a push with uniform
/// force magnitude, random sign and uniform duration starting at time t.
std::optional<Push> maybe_push(RandomStream& rng, const SimConfig& cfg,
                               double t);

struct StepResult {
  Observation obs;         // privileged state; rewards are computed on this
  Observation policy_obs;  // with observation noise applied
  Command cmd;             // command the reward was judged against
  RewardBreakdown reward;
  bool done = false;
  bool fell = false;
  std::optional<Push> push_started;
};

/// One independently-owned episode instance: 2 kHz physics under 50 Hz
/// control, episodic command sampling, random pushes and per-episode domain
/// randomization. Deterministic given its seed; environments never share
/// state, so N instances may run concurrently.
class Environment {
 public:
  Environment(RobotModel model, SimConfig sim_cfg, RewardConfig reward_cfg,
              DomainRandomization dr, std::uint64_t seed);

  /// Start a new episode, continuing this environment's RNG stream.
  Observation reset();
  /// Start a new episode from an explicit seed (full determinism).
  Observation reset(std::uint64_t seed);

  /// Advance one control step (control_decimation physics substeps). Throws
  /// ProtocolError if the episode already terminated.
  StepResult step(const std::vector<double>& action_offsets);

  // Bench-protocol overrides.
  void set_auto_command(bool on) { auto_command_ = on; }
  void set_auto_push(bool on) { auto_push_ = on; }
  /// Replace the active command (heading target still integrates from here).
  void set_command(const Command& cmd) { cmd_ = cmd; }
  /// Inject a push starting at the next control step.
  void queue_push(Push push);

  bool done() const { return terminated_; }
  bool fell() const { return fell_; }
  double time() const { return time_; }
  int steps() const { return step_count_; }
  const Command& command() const { return cmd_; }
  const Observation& observation() const { return obs_; }
  const ContactTracker& tracker() const { return tracker_; }
  const RobotModel& model() const { return base_model_; }
  const SimConfig& sim_config() const { return sim_cfg_; }
  const RewardConfig& reward_config() const { return reward_cfg_; }
  const PlanarState& state() const { return state_; }
  const PlanarDynamics& dynamics() const { return *dyn_; }

  /// Convert policy offsets (relative to the nominal pose) into clamped
  /// absolute PD setpoints.
  std::vector<double> setpoints_from_offsets(
      const std::vector<double>& offsets) const;

 private:
  void randomize_and_rebuild();
  Observation build_observation(const Eigen::VectorXd& torque,
                                const std::array<bool, 2>& contact,
                                const std::array<bool, 2>& touchdown) const;
  Observation apply_observation_noise(const Observation& obs);

  RobotModel base_model_;
  SimConfig sim_cfg_;
  RewardConfig reward_cfg_;
  DomainRandomization dr_;
  RandomStream rng_;

  std::unique_ptr<PlanarDynamics> dyn_;  // randomized copy of the model
  PlanarState state_;
  ContactTracker tracker_;
  Observation obs_;
  Command cmd_;

  bool auto_command_ = true;
  bool auto_push_ = true;
  int window_left_ = 0;
  std::optional<Push> active_push_;
  std::vector<Push> queued_pushes_;

  double time_ = 0.0;
  int step_count_ = 0;
  bool terminated_ = true;
  bool fell_ = false;
  int action_delay_ = 0;
  std::vector<double> delayed_setpoints_;
  std::vector<double> prev_setpoints_;
  Vec3 prev_linvel_{0, 0, 0};
};

/// Scripted or learned controller driving an environment; implementations
/// must reset internal state (e.g. recurrent hidden state) between episodes.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual void reset() = 0;
  virtual std::vector<double> act(const Observation& obs,
                                  const Command& cmd) = 0;
};

/// Roll one full episode and record it. The log carries the clean
/// observation, per-term weighted rewards, push markers and the fall flag.
EpisodeLog rollout(Environment& env, Controller& controller, int horizon,
                   std::uint64_t seed);

}  // namespace sawlab
