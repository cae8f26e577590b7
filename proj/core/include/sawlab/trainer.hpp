#pragma once

#include <functional>
#include <memory>
#include <string>

#include "sawlab/ppo.hpp"

namespace sawlab {

using EnvFactory = std::function<std::unique_ptr<Environment>(std::uint64_t seed)>;

struct EvalStats {
  double mean_return = 0.0;
  double mean_episode_length = 0.0;     // s
  double feet_contact_rate = 0.0;       // raw single-contact term mean
  double mirror_rms = 0.0;              // sqrt of the mirror diagnostic
};

struct TrainResult {
  int iterations = 0;
  long env_steps = 0;
  std::string final_checkpoint;
  std::string metrics_path;
  EvalStats first_eval;
  EvalStats last_eval;
};

/// Episodic PPO training: collect rollouts across independently seeded
/// environments, estimate advantages, run clipped-surrogate updates with the
/// mirror loss, periodically evaluate the deterministic policy and write
/// checkpoints plus a metrics CSV. Fully reproducible from (seed, config);
/// worker results merge in environment order so the thread count does not
/// change the result.
class Trainer {
 public:
  Trainer(EnvFactory factory, Policy policy, PpoConfig cfg, std::uint64_t seed,
          int jobs = 1);

  /// Run up to max_iterations (or cfg.max_iterations when <= 0). Writes
  /// metrics.csv and checkpoints under out_dir when it is non-empty.
  TrainResult run(const std::string& out_dir, int max_iterations = 0,
                  std::function<bool(int, const EvalStats&)> stop = {});

  const Policy& policy() const { return policy_; }
  Policy& policy() { return policy_; }

  /// Deterministic-policy evaluation over cfg.eval_episodes episodes.
  EvalStats evaluate(std::uint64_t seed);

 private:
  struct EnvSlot;

  RolloutBatch collect_rollout();

  EnvFactory factory_;
  Policy policy_;
  PpoConfig cfg_;
  SignedPermutation input_mirror_;
  SignedPermutation action_mirror_;
  std::uint64_t seed_;
  int jobs_;
  std::vector<std::unique_ptr<EnvSlot>> slots_;
  long env_steps_total_ = 0;
};

/// Run fn(i) for i in [0, n) across up to `jobs` threads; any exception is
/// rethrown on the caller. Results must be written to per-index slots so the
/// outcome is independent of scheduling.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

}  // namespace sawlab
