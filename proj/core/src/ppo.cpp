#include "sawlab/ppo.hpp"

#include <cmath>

#include "sawlab/errors.hpp"

namespace sawlab {

void PpoConfig::validate() const {
  if (!(clip > 0.0)) throw std::invalid_argument("ppo: clip must be > 0");
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw std::invalid_argument("ppo: gamma must be in (0,1]");
  if (!(lambda > 0.0 && lambda <= 1.0))
    throw std::invalid_argument("ppo: lambda must be in (0,1]");
  if (!(lr >= 0.0)) throw std::invalid_argument("ppo: lr must be >= 0");
  if (epochs < 1 || seq_len < 1 || minibatch_sequences < 1 || num_envs < 1 ||
      batch_env_steps < 1 || max_iterations < 1 || eval_cadence < 1 ||
      eval_episodes < 1 || checkpoint_cadence < 1)
    throw std::invalid_argument("ppo: counts must be >= 1");
  if (!(mirror_weight >= 0.0))
    throw std::invalid_argument("ppo: mirror weight must be >= 0");
  if (!(entropy_coef >= 0.0) || !(value_coef >= 0.0) || !(grad_clip > 0.0))
    throw std::invalid_argument("ppo: bad loss coefficients");
}

void compute_gae(std::span<const double> rewards,
                 std::span<const double> values,
                 std::span<const std::uint8_t> dones, double bootstrap,
                 double gamma, double lambda, std::span<double> advantages,
                 std::span<double> returns) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n || advantages.size() != n ||
      returns.size() != n)
    throw std::invalid_argument("gae: span size mismatch");
  double gae = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double next_value = (i + 1 < n) ? values[i + 1] : bootstrap;
    const double not_done = dones[i] ? 0.0 : 1.0;
    const double delta = rewards[i] + gamma * next_value * not_done - values[i];
    gae = delta + gamma * lambda * not_done * gae;
    advantages[i] = gae;
    returns[i] = gae + values[i];
  }
}

void normalize_advantages(std::vector<Sequence>& sequences) {
  double sum = 0.0;
  long n = 0;
  for (const Sequence& s : sequences)
    for (double a : s.advantages) {
      sum += a;
      ++n;
    }
  if (n == 0) return;
  const double mean = sum / static_cast<double>(n);
  double sq = 0.0;
  for (const Sequence& s : sequences)
    for (double a : s.advantages) sq += (a - mean) * (a - mean);
  const double std = std::sqrt(sq / static_cast<double>(n)) + 1e-8;
  for (Sequence& s : sequences)
    for (double& a : s.advantages) a = (a - mean) / std;
}

namespace {

struct SeqForward {
  LstmNetwork::Cache actor_cache, critic_cache, mirror_cache;
  std::vector<Eigen::VectorXd> mu, mu_mirror;
  std::vector<double> v;
};

void run_forward(const Sequence& seq, const Policy& policy,
                 const SignedPermutation& input_mirror, bool with_mirror,
                 bool with_value, SeqForward& out) {
  LstmState actor_state = seq.actor_state;
  LstmState critic_state = seq.critic_state;
  LstmState mirror_state = seq.mirror_state;
  const int T = seq.length();
  out.mu.reserve(T);
  for (int t = 0; t < T; ++t) {
    const Eigen::VectorXd norm = policy.normalizer.normalize(seq.inputs[t]);
    out.mu.push_back(
        policy.actor.forward_cached(norm, actor_state, out.actor_cache));
    if (with_value) {
      out.v.push_back(policy.critic.forward_cached(norm, critic_state,
                                                   out.critic_cache)[0]);
    }
    if (with_mirror) {
      std::vector<double> raw(seq.inputs[t].data(),
                              seq.inputs[t].data() + seq.inputs[t].size());
      const std::vector<double> mirrored = input_mirror.apply(raw);
      const Eigen::VectorXd m_norm = policy.normalizer.normalize(
          Eigen::Map<const Eigen::VectorXd>(mirrored.data(),
                                            static_cast<long>(mirrored.size())));
      out.mu_mirror.push_back(
          policy.actor.forward_cached(m_norm, mirror_state, out.mirror_cache));
    }
  }
}

Eigen::VectorXd apply_signed_perm(const SignedPermutation& p,
                                  const Eigen::VectorXd& v) {
  Eigen::VectorXd out(v.size());
  for (int i = 0; i < p.size(); ++i) out[i] = p.signs[i] * v[p.perm[i]];
  return out;
}

}  // namespace

double mirror_loss(const std::vector<const Sequence*>& minibatch,
                   const Policy& policy, const SignedPermutation& input_mirror,
                   const SignedPermutation& action_mirror) {
  double sum = 0.0;
  long steps = 0;
  for (const Sequence* seq : minibatch) {
    SeqForward fwd;
    run_forward(*seq, policy, input_mirror, true, false, fwd);
    for (int t = 0; t < seq->length(); ++t) {
      const Eigen::VectorXd diff =
          fwd.mu_mirror[t] - apply_signed_perm(action_mirror, fwd.mu[t]);
      sum += diff.squaredNorm();
      ++steps;
    }
  }
  return steps ? sum / static_cast<double>(steps) : 0.0;
}

LossDiagnostics ppo_loss(const std::vector<const Sequence*>& minibatch,
                         const Policy& policy, const PpoConfig& cfg,
                         const SignedPermutation& input_mirror,
                         const SignedPermutation& action_mirror,
                         Eigen::VectorXd* grad_out) {
  LossDiagnostics diag;
  long total_steps = 0;
  for (const Sequence* s : minibatch) total_steps += s->length();
  if (total_steps == 0) return diag;
  const double inv_n = 1.0 / static_cast<double>(total_steps);

  const bool with_mirror = cfg.mirror_weight > 0.0;
  const Eigen::VectorXd ls = policy.clamped_log_std();
  const Eigen::VectorXd sigma = ls.array().exp();
  const Eigen::VectorXd inv_var = (-2.0 * ls.array()).exp();

  LstmGradients actor_grads = policy.actor.zero_gradients();
  LstmGradients critic_grads = policy.critic.zero_gradients();
  Eigen::VectorXd log_std_grad = Eigen::VectorXd::Zero(policy.log_std.size());

  double clip_hits = 0.0;

  for (const Sequence* seq : minibatch) {
    const int T = seq->length();
    SeqForward fwd;
    run_forward(*seq, policy, input_mirror, with_mirror, true, fwd);

    std::vector<Eigen::VectorXd> d_mu(T), d_mu_mirror, d_v(T);
    if (with_mirror) d_mu_mirror.resize(T);

    for (int t = 0; t < T; ++t) {
      const Eigen::VectorXd& mu = fwd.mu[t];
      const Eigen::VectorXd& a = seq->actions[t];
      const double new_logp = policy.log_prob(mu, a);
      const double old_logp = seq->old_log_probs[t];
      const double adv = seq->advantages[t];
      const double ratio = std::exp(new_logp - old_logp);
      const double clipped =
          std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip);
      const double s1 = ratio * adv;
      const double s2 = clipped * adv;
      diag.policy_loss += -std::min(s1, s2) * inv_n;
      diag.approx_kl += (old_logp - new_logp) * inv_n;
      if (std::abs(ratio - 1.0) > cfg.clip) clip_hits += 1.0;

      const double verr = fwd.v[t] - seq->returns[t];
      diag.value_loss += verr * verr * inv_n;

      d_v[t] = Eigen::VectorXd::Constant(
          1, cfg.value_coef * 2.0 * verr * inv_n);

      // d(-min(s1,s2))/d new_logp = -ratio*adv when the unclipped branch is
      // active, else 0.
      const double gate = (s1 <= s2) ? 1.0 : 0.0;
      const double dlogp = -gate * ratio * adv * inv_n;
      const Eigen::VectorXd z = (a - mu).cwiseProduct(inv_var);
      d_mu[t] = dlogp * z;  // dlogp/dmu = (a-mu)/sigma^2
      // dlogp/dlog_std_i = z_i^2 - 1 (through the clamp gate, handled below).
      const Eigen::VectorXd zs = (a - mu).cwiseQuotient(sigma);
      log_std_grad += dlogp * (zs.array().square() - 1.0).matrix();

      if (with_mirror) {
        const Eigen::VectorXd diff =
            fwd.mu_mirror[t] - apply_signed_perm(action_mirror, fwd.mu[t]);
        diag.mirror += diff.squaredNorm() * inv_n;
        const Eigen::VectorXd up = 2.0 * cfg.mirror_weight * inv_n * diff;
        d_mu_mirror[t] = up;
        d_mu[t] -= apply_signed_perm(action_mirror, up);
      }
    }

    if (grad_out) {
      policy.actor.backward(fwd.actor_cache, d_mu, actor_grads);
      if (with_mirror)
        policy.actor.backward(fwd.mirror_cache, d_mu_mirror, actor_grads);
      policy.critic.backward(fwd.critic_cache, d_v, critic_grads);
    }
  }

  diag.entropy = policy.entropy();
  diag.clip_fraction = clip_hits / static_cast<double>(total_steps);
  diag.loss = diag.policy_loss + cfg.value_coef * diag.value_loss -
              cfg.entropy_coef * diag.entropy + cfg.mirror_weight * diag.mirror;
  if (!std::isfinite(diag.loss))
    throw TrainingError("non-finite PPO loss (policy=" +
                        std::to_string(diag.policy_loss) +
                        ", value=" + std::to_string(diag.value_loss) +
                        ", mirror=" + std::to_string(diag.mirror) + ")");

  if (grad_out) {
    // Entropy bonus and clamp gating on log_std.
    for (int i = 0; i < policy.log_std.size(); ++i) {
      const bool inside = policy.log_std[i] > Policy::kLogStdMin &&
                          policy.log_std[i] < Policy::kLogStdMax;
      log_std_grad[i] = inside ? log_std_grad[i] - cfg.entropy_coef : 0.0;
    }
    Eigen::VectorXd flat(policy.num_params());
    const int na = policy.actor.num_params();
    const int nc = policy.critic.num_params();
    flat.segment(0, na) = LstmNetwork::flatten(actor_grads);
    flat.segment(na, nc) = LstmNetwork::flatten(critic_grads);
    flat.tail(policy.log_std.size()) = log_std_grad;
    if (!flat.allFinite()) throw TrainingError("non-finite PPO gradient");
    *grad_out += flat;
  }
  return diag;
}

AdamOptimizer::AdamOptimizer(int dim, double lr, double beta1, double beta2,
                             double eps)
    : lr_(lr),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps),
      m_(Eigen::VectorXd::Zero(dim)),
      v_(Eigen::VectorXd::Zero(dim)) {}

void AdamOptimizer::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params -= (lr_ / bc1) * m_.cwiseQuotient(
                (v_ / bc2).cwiseSqrt() + Eigen::VectorXd::Constant(
                                             v_.size(), eps_));
}

double clip_gradient(Eigen::VectorXd& grad, double max_norm) {
  const double norm = grad.norm();
  if (norm > max_norm && norm > 0.0) grad *= max_norm / norm;
  return norm;
}

}  // namespace sawlab
