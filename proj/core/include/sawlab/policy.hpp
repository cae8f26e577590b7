#pragma once

#include <string>

#include "sawlab/environment.hpp"
#include "sawlab/lstm.hpp"
#include "sawlab/mirror.hpp"
#include "sawlab/observation.hpp"

namespace sawlab {

/// Flattens the policy input: [motor_pos, motor_vel, joint_pos, joint_vel,
/// torso quaternion] followed by the command (cx, cy, cyaw).
struct FeatureEncoder {
  int n_act = 0;
  int n_joint = 0;

  static FeatureEncoder for_model(const RobotModel& model);

  int obs_dim() const { return 2 * n_act + 2 * n_joint + 4; }
  int input_dim() const { return obs_dim() + 3; }

  Eigen::VectorXd encode(const Observation& obs, const Command& cmd) const;

  /// Signed permutation mirroring the full input vector (the quaternion
  /// mirrors as componentwise signs, the command as (cx, -cy, -cyaw)).
  SignedPermutation input_mirror(const MirrorSpec& mirror) const;
};

/// Welford running mean/variance per input feature. Normalization clips to
/// +/-10 sigma; with fewer than two samples it passes inputs through.
struct RunningNormalizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd m2;
  double count = 0.0;

  explicit RunningNormalizer(int dim = 0)
      : mean(Eigen::VectorXd::Zero(dim)), m2(Eigen::VectorXd::Zero(dim)) {}

  void observe(const Eigen::VectorXd& x);
  void merge(const RunningNormalizer& other);
  Eigen::VectorXd stddev() const;
  Eigen::VectorXd normalize(const Eigen::VectorXd& x) const;
};

/// The SaW controller: a stacked-LSTM actor emitting PD-setpoint offsets with
/// state-independent Gaussian exploration, a twin LSTM critic, and shared
/// input normalization. log_std is clamped to [-4, 1] wherever it is used.
struct Policy {
  static constexpr double kLogStdMin = -4.0;
  static constexpr double kLogStdMax = 1.0;
  static constexpr int kCheckpointVersion = 1;

  FeatureEncoder encoder;
  RunningNormalizer normalizer;
  LstmNetwork actor;
  LstmNetwork critic;
  Eigen::VectorXd log_std;
  std::string config_hash;

  Policy() = default;
  Policy(FeatureEncoder enc, std::vector<int> hidden, int action_dim,
         std::uint64_t seed, double log_std_init = -1.0);

  int action_dim() const { return actor.output_dim(); }

  Eigen::VectorXd clamped_log_std() const;

  /// Action mean for a raw (unnormalized) input; advances the actor state.
  Eigen::VectorXd act_mean(const Eigen::VectorXd& raw_input,
                           LstmState& state) const;
  /// Value estimate for a raw input; advances the critic state.
  double value(const Eigen::VectorXd& raw_input, LstmState& state) const;

  /// Diagonal Gaussian sample about `mean` plus its log density.
  std::pair<Eigen::VectorXd, double> sample_action(const Eigen::VectorXd& mean,
                                                   RandomStream& rng) const;
  double log_prob(const Eigen::VectorXd& mean,
                  const Eigen::VectorXd& action) const;
  double entropy() const;

  // Whole-model flat parameter vector: actor, critic, then log_std.
  int num_params() const;
  Eigen::VectorXd get_params() const;
  void set_params(const Eigen::VectorXd& flat);

  void save(const std::string& path) const;
  static Policy load(const std::string& path);
  std::string hash() const;
};

/// Deterministic (mean-action) adapter driving an Environment.
class PolicyController : public Controller {
 public:
  explicit PolicyController(const Policy& policy)
      : policy_(&policy), state_(policy.actor.zero_state()) {}

  void reset() override { state_ = policy_->actor.zero_state(); }
  std::vector<double> act(const Observation& obs, const Command& cmd) override;

 private:
  const Policy* policy_;
  LstmState state_;
};

}  // namespace sawlab
