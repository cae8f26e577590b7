#include "sawlab/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <thread>

#include "sawlab/errors.hpp"
#include "sawlab/util.hpp"

namespace sawlab {

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(jobs);
  std::atomic<int> next{0};
  for (int w = 0; w < jobs; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct Trainer::EnvSlot {
  std::unique_ptr<Environment> env;
  RandomStream action_rng;
  LstmState actor_state, critic_state, mirror_state;
  Eigen::VectorXd pending_input;  // features of the state to act on
  bool episode_open = false;
  double episode_return = 0.0;
  int episode_steps = 0;

  // Per-iteration scratch, merged in env order after collection.
  std::vector<Sequence> sequences;
  RunningNormalizer stats;
  std::vector<double> episode_returns, episode_lengths;
  std::array<double, RewardBreakdown::kNumTerms> term_sums{};
  long term_count = 0;
};

Trainer::Trainer(EnvFactory factory, Policy policy, PpoConfig cfg,
                 std::uint64_t seed, int jobs)
    : factory_(std::move(factory)),
      policy_(std::move(policy)),
      cfg_(cfg),
      seed_(seed),
      jobs_(std::max(1, jobs)) {
  cfg_.validate();
  slots_.resize(cfg_.num_envs);
  for (int e = 0; e < cfg_.num_envs; ++e) {
    auto slot = std::make_unique<EnvSlot>();
    slot->env = factory_(derive_seed(seed_, 1000 + e));
    slot->action_rng.seed(derive_seed(seed_, 2000 + e));
    slots_[e] = std::move(slot);
  }
  const MirrorSpec& mirror = slots_[0]->env->model().mirror;
  input_mirror_ = policy_.encoder.input_mirror(mirror);
  action_mirror_ = mirror.actuators;
  if (action_mirror_.size() != policy_.action_dim())
    throw std::invalid_argument("policy action dim != model actuator count");
}

RolloutBatch Trainer::collect_rollout() {
  const int steps_per_env =
      (cfg_.batch_env_steps + cfg_.num_envs - 1) / cfg_.num_envs;
  const bool track_mirror = cfg_.mirror_weight > 0.0;

  parallel_for(cfg_.num_envs, jobs_, [&](int e) {
    EnvSlot& slot = *slots_[e];
    Environment& env = *slot.env;
    slot.sequences.clear();
    slot.stats = RunningNormalizer(policy_.encoder.input_dim());
    slot.episode_returns.clear();
    slot.episode_lengths.clear();
    slot.term_sums.fill(0.0);
    slot.term_count = 0;

    if (!slot.episode_open) {
      const Observation obs = env.reset();
      slot.actor_state = policy_.actor.zero_state();
      slot.critic_state = policy_.critic.zero_state();
      slot.mirror_state = policy_.actor.zero_state();
      slot.pending_input = policy_.encoder.encode(obs, env.command());
      slot.episode_open = true;
      slot.episode_return = 0.0;
      slot.episode_steps = 0;
    }

    Sequence seq;
    seq.actor_state = slot.actor_state;
    seq.critic_state = slot.critic_state;
    seq.mirror_state = slot.mirror_state;

    auto flush_sequence = [&](bool start_next) {
      if (seq.length() > 0) slot.sequences.push_back(std::move(seq));
      seq = Sequence{};
      if (start_next) {
        seq.actor_state = slot.actor_state;
        seq.critic_state = slot.critic_state;
        seq.mirror_state = slot.mirror_state;
      }
    };

    for (int t = 0; t < steps_per_env; ++t) {
      const Eigen::VectorXd& input = slot.pending_input;
      slot.stats.observe(input);

      const Eigen::VectorXd mean = policy_.act_mean(input, slot.actor_state);
      const double value = policy_.value(input, slot.critic_state);
      if (track_mirror) {
        std::vector<double> raw(input.data(), input.data() + input.size());
        const std::vector<double> mirrored = input_mirror_.apply(raw);
        policy_.act_mean(
            Eigen::Map<const Eigen::VectorXd>(mirrored.data(),
                                              static_cast<long>(mirrored.size())),
            slot.mirror_state);
      }
      auto [action, log_prob] = policy_.sample_action(mean, slot.action_rng);

      StepResult sr = env.step(
          std::vector<double>(action.data(), action.data() + action.size()));

      seq.inputs.push_back(input);
      seq.actions.push_back(action);
      seq.old_log_probs.push_back(log_prob);
      seq.rewards.push_back(sr.reward.total);
      seq.values.push_back(value);
      seq.dones.push_back(sr.done ? 1 : 0);

      slot.episode_return += sr.reward.total;
      slot.episode_steps += 1;
      for (int k = 0; k < RewardBreakdown::kNumTerms; ++k)
        slot.term_sums[k] += sr.reward.raw[k];
      ++slot.term_count;

      if (sr.done) {
        slot.episode_returns.push_back(slot.episode_return);
        slot.episode_lengths.push_back(env.sim_config().control_dt() *
                                       slot.episode_steps);
        const Observation obs = env.reset();
        slot.actor_state = policy_.actor.zero_state();
        slot.critic_state = policy_.critic.zero_state();
        slot.mirror_state = policy_.actor.zero_state();
        slot.pending_input = policy_.encoder.encode(obs, env.command());
        slot.episode_return = 0.0;
        slot.episode_steps = 0;
        flush_sequence(t + 1 < steps_per_env);
      } else {
        slot.pending_input = policy_.encoder.encode(sr.policy_obs, env.command());
        if (seq.length() >= cfg_.seq_len) flush_sequence(t + 1 < steps_per_env);
      }
    }
    flush_sequence(false);

    // Bootstrap with the value of the state the stream stopped in.
    double bootstrap = 0.0;
    if (!slot.sequences.empty() && !slot.sequences.back().dones.back()) {
      LstmState tmp = slot.critic_state;
      bootstrap = policy_.value(slot.pending_input, tmp);
    }

    // GAE over the env's contiguous stream (sequences are back-to-back).
    std::vector<double> rewards, values;
    std::vector<std::uint8_t> dones;
    for (const Sequence& s : slot.sequences) {
      rewards.insert(rewards.end(), s.rewards.begin(), s.rewards.end());
      values.insert(values.end(), s.values.begin(), s.values.end());
      dones.insert(dones.end(), s.dones.begin(), s.dones.end());
    }
    std::vector<double> adv(rewards.size()), ret(rewards.size());
    compute_gae(rewards, values, dones, bootstrap, cfg_.gamma, cfg_.lambda,
                adv, ret);
    std::size_t off = 0;
    for (Sequence& s : slot.sequences) {
      s.advantages.assign(adv.begin() + off, adv.begin() + off + s.length());
      s.returns.assign(ret.begin() + off, ret.begin() + off + s.length());
      off += s.length();
    }
  });

  RolloutBatch batch;
  batch.feature_stats = RunningNormalizer(policy_.encoder.input_dim());
  for (auto& slot : slots_) {
    for (Sequence& s : slot->sequences) {
      batch.total_steps += s.length();
      batch.sequences.push_back(std::move(s));
    }
    slot->sequences.clear();
    batch.feature_stats.merge(slot->stats);
    batch.episode_returns.insert(batch.episode_returns.end(),
                                 slot->episode_returns.begin(),
                                 slot->episode_returns.end());
    batch.episode_lengths.insert(batch.episode_lengths.end(),
                                 slot->episode_lengths.begin(),
                                 slot->episode_lengths.end());
  }
  long term_count = 0;
  std::array<double, RewardBreakdown::kNumTerms> sums{};
  for (auto& slot : slots_) {
    for (int k = 0; k < RewardBreakdown::kNumTerms; ++k)
      sums[k] += slot->term_sums[k];
    term_count += slot->term_count;
  }
  if (term_count > 0)
    for (int k = 0; k < RewardBreakdown::kNumTerms; ++k)
      batch.term_means[k] = sums[k] / static_cast<double>(term_count);
  return batch;
}

EvalStats Trainer::evaluate(std::uint64_t seed) {
  const int n = cfg_.eval_episodes;
  std::vector<double> returns(n), lengths(n), contact(n);
  parallel_for(n, jobs_, [&](int i) {
    auto env = factory_(derive_seed(seed, 3000 + i));
    PolicyController controller(policy_);
    controller.reset();
    Observation obs = env->reset(derive_seed(seed, 4000 + i));
    double ret = 0.0, contact_sum = 0.0;
    int steps = 0;
    while (!env->done()) {
      StepResult sr = env->step(controller.act(obs, env->command()));
      ret += sr.reward.total;
      contact_sum +=
          sr.reward.raw[RewardBreakdown::term_index("feet_contact")];
      ++steps;
      obs = sr.policy_obs;
    }
    returns[i] = ret;
    lengths[i] = env->sim_config().control_dt() * steps;
    contact[i] = steps ? contact_sum / steps : 0.0;
  });
  EvalStats st;
  st.mean_return = std::accumulate(returns.begin(), returns.end(), 0.0) / n;
  st.mean_episode_length =
      std::accumulate(lengths.begin(), lengths.end(), 0.0) / n;
  st.feet_contact_rate =
      std::accumulate(contact.begin(), contact.end(), 0.0) / n;
  return st;
}

TrainResult Trainer::run(const std::string& out_dir, int max_iterations,
                         std::function<bool(int, const EvalStats&)> stop) {
  const int iterations =
      max_iterations > 0 ? max_iterations : cfg_.max_iterations;
  TrainResult result;

  std::ofstream metrics;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    result.metrics_path = out_dir + "/metrics.csv";
    metrics.open(result.metrics_path);
    std::vector<std::string> header = {"iteration",   "env_steps",
                                       "mean_return", "mean_ep_len_s"};
    for (auto name : RewardBreakdown::term_names())
      header.push_back("rew_" + std::string(name));
    for (const char* c :
         {"loss", "policy_loss", "value_loss", "entropy", "clip_fraction",
          "approx_kl", "mirror_loss", "grad_norm", "eval_return",
          "eval_ep_len_s", "eval_feet_contact_rate"})
      header.push_back(c);
    metrics << csv_row(header);
  }

  AdamOptimizer opt(policy_.num_params(), cfg_.lr);
  RandomStream shuffle_rng(derive_seed(seed_, 77));
  bool have_first_eval = false;

  for (int iter = 1; iter <= iterations; ++iter) {
    RolloutBatch batch = collect_rollout();
    env_steps_total_ += batch.total_steps;
    normalize_advantages(batch.sequences);

    LossDiagnostics diag;
    double grad_norm = 0.0;
    int updates = 0;

    std::vector<int> order(batch.sequences.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 engine(shuffle_rng.fork());
    for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), engine);
      for (std::size_t start = 0; start < order.size();
           start += cfg_.minibatch_sequences) {
        std::vector<const Sequence*> minibatch;
        for (std::size_t i = start;
             i < std::min(order.size(),
                          start + static_cast<std::size_t>(
                                      cfg_.minibatch_sequences));
             ++i)
          minibatch.push_back(&batch.sequences[order[i]]);

        Eigen::VectorXd grad = Eigen::VectorXd::Zero(policy_.num_params());
        const LossDiagnostics d = ppo_loss(minibatch, policy_, cfg_,
                                           input_mirror_, action_mirror_,
                                           &grad);
        grad_norm += clip_gradient(grad, cfg_.grad_clip);
        if (cfg_.lr > 0.0) {
          Eigen::VectorXd params = policy_.get_params();
          opt.step(params, grad);
          policy_.set_params(params);
        }
        diag.loss += d.loss;
        diag.policy_loss += d.policy_loss;
        diag.value_loss += d.value_loss;
        diag.entropy += d.entropy;
        diag.mirror += d.mirror;
        diag.clip_fraction += d.clip_fraction;
        diag.approx_kl += d.approx_kl;
        ++updates;
      }
    }
    if (updates > 0) {
      const double inv = 1.0 / updates;
      diag.loss *= inv;
      diag.policy_loss *= inv;
      diag.value_loss *= inv;
      diag.entropy *= inv;
      diag.mirror *= inv;
      diag.clip_fraction *= inv;
      diag.approx_kl *= inv;
      grad_norm *= inv;
    }

    // Feature statistics feed the next iteration's normalization.
    policy_.normalizer.merge(batch.feature_stats);

    const bool do_eval = iter % cfg_.eval_cadence == 0 || iter == iterations;
    EvalStats eval;
    if (do_eval) {
      eval = evaluate(derive_seed(seed_, 50000 + iter));
      eval.mirror_rms = std::sqrt(std::max(0.0, diag.mirror));
      if (!have_first_eval) {
        result.first_eval = eval;
        have_first_eval = true;
      }
      result.last_eval = eval;
    }

    if (metrics.is_open()) {
      const double mean_ret =
          batch.episode_returns.empty()
              ? 0.0
              : std::accumulate(batch.episode_returns.begin(),
                                batch.episode_returns.end(), 0.0) /
                    batch.episode_returns.size();
      const double mean_len =
          batch.episode_lengths.empty()
              ? 0.0
              : std::accumulate(batch.episode_lengths.begin(),
                                batch.episode_lengths.end(), 0.0) /
                    batch.episode_lengths.size();
      std::vector<std::string> row = {std::to_string(iter),
                                      std::to_string(env_steps_total_),
                                      format_double(mean_ret),
                                      format_double(mean_len)};
      for (int k = 0; k < RewardBreakdown::kNumTerms; ++k)
        row.push_back(format_double(batch.term_means[k]));
      for (double v : {diag.loss, diag.policy_loss, diag.value_loss,
                       diag.entropy, diag.clip_fraction, diag.approx_kl,
                       diag.mirror, grad_norm})
        row.push_back(format_double(v));
      if (do_eval) {
        row.push_back(format_double(eval.mean_return));
        row.push_back(format_double(eval.mean_episode_length));
        row.push_back(format_double(eval.feet_contact_rate));
      } else {
        row.insert(row.end(), {"", "", ""});
      }
      metrics << csv_row(row);
      metrics.flush();
    }

    if (!out_dir.empty() &&
        (iter % cfg_.checkpoint_cadence == 0 || iter == iterations)) {
      char name[64];
      std::snprintf(name, sizeof(name), "/ckpt_%06d.json", iter);
      policy_.save(out_dir + name);
    }

    result.iterations = iter;
    if (do_eval && stop && stop(iter, eval)) break;
  }

  result.env_steps = env_steps_total_;
  if (!out_dir.empty()) {
    result.final_checkpoint = out_dir + "/ckpt_final.json";
    policy_.save(result.final_checkpoint);
  }
  return result;
}

}  // namespace sawlab
