#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sawlab/policy.hpp"

namespace sawlab {

struct PpoConfig {
  double clip = 0.2;
  double gamma = 0.99;
  double lambda = 0.95;
  double lr = 3e-4;
  int epochs = 4;
  int seq_len = 200;            // truncated-BPTT window
  int minibatch_sequences = 8;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double mirror_weight = 1.0;
  double grad_clip = 1.0;
  int num_envs = 8;
  int batch_env_steps = 3200;   // rollout size per iteration, across envs
  int max_iterations = 100;
  int eval_cadence = 10;
  int eval_episodes = 20;
  int checkpoint_cadence = 10;

  void validate() const;  // throws std::invalid_argument
};

/// One stored BPTT window: a contiguous chunk of a single episode together
/// with the recurrent states the networks were in when the chunk began
/// (zeroed at episode starts, carried across chunks otherwise).
struct Sequence {
  std::vector<Eigen::VectorXd> inputs;  // raw features (command included)
  std::vector<Eigen::VectorXd> actions;
  std::vector<double> old_log_probs;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<std::uint8_t> dones;
  std::vector<double> advantages;
  std::vector<double> returns;
  LstmState actor_state, critic_state, mirror_state;

  int length() const { return static_cast<int>(inputs.size()); }
};

struct RolloutBatch {
  std::vector<Sequence> sequences;
  RunningNormalizer feature_stats;
  std::vector<double> episode_returns;   // completed episodes only
  std::vector<double> episode_lengths;   // s
  std::array<double, RewardBreakdown::kNumTerms> term_means{};
  long total_steps = 0;
};

/// Generalized advantage estimation over one contiguous stream.
/// delta_t = r_t + gamma*V(s_{t+1})*(1-done_t) - V(s_t), with V(s_T) given by
/// `bootstrap` (use 0 when the stream ends with done).
/// A_t = sum_k (gamma*lambda)^k delta_{t+k}, truncated at dones;
/// returns_t = A_t + V_t.
void compute_gae(std::span<const double> rewards,
                 std::span<const double> values,
                 std::span<const std::uint8_t> dones, double bootstrap,
                 double gamma, double lambda, std::span<double> advantages,
                 std::span<double> returns);

/// In-place normalization to zero mean / unit (population) std over every
/// step in the batch.
void normalize_advantages(std::vector<Sequence>& sequences);

struct LossDiagnostics {
  double loss = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double mirror = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
};

/// Clipped-surrogate PPO loss with value loss, entropy bonus and mirror loss:
///   loss = -E[min(rho*A, clip(rho)*A)] + c_v E[(V - R)^2] - c_e H
///          + w_m E||mu(M(x)) - M(mu(x))||^2.
/// When `grad_out` is non-null the exact gradient with respect to the
/// policy's flat parameter vector (actor, critic, log_std) is accumulated
/// through BPTT over each sequence. Throws TrainingError on a non-finite
/// loss.
LossDiagnostics ppo_loss(const std::vector<const Sequence*>& minibatch,
                         const Policy& policy, const PpoConfig& cfg,
                         const SignedPermutation& input_mirror,
                         const SignedPermutation& action_mirror,
                         Eigen::VectorXd* grad_out);

/// The symmetry penalty alone: E||mu(M(x)) - M(mu(x))||^2 with the mirrored
/// branch run from the stored mirrored hidden states.
double mirror_loss(const std::vector<const Sequence*>& minibatch,
                   const Policy& policy, const SignedPermutation& input_mirror,
                   const SignedPermutation& action_mirror);

/// Standard Adam on a flat parameter vector.
class AdamOptimizer {
 public:
  AdamOptimizer(int dim, double lr, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8);
  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);
  double lr() const { return lr_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  Eigen::VectorXd m_, v_;
};

/// Global-norm gradient clipping; returns the pre-clip norm.
double clip_gradient(Eigen::VectorXd& grad, double max_norm);

}  // namespace sawlab
