#include "sawlab/policy.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <sstream>

#include "sawlab/errors.hpp"
#include "sawlab/util.hpp"

namespace sawlab {

using json = nlohmann::json;

FeatureEncoder FeatureEncoder::for_model(const RobotModel& model) {
  FeatureEncoder e;
  e.n_act = model.num_joints();
  e.n_joint = static_cast<int>(model.mirror.passive.size());
  return e;
}

Eigen::VectorXd FeatureEncoder::encode(const Observation& obs,
                                       const Command& cmd) const {
  if (static_cast<int>(obs.motor_pos.size()) != n_act ||
      static_cast<int>(obs.joint_pos.size()) != n_joint)
    throw std::invalid_argument("feature encoder: observation size mismatch");
  Eigen::VectorXd x(input_dim());
  int off = 0;
  for (int i = 0; i < n_act; ++i) x[off++] = obs.motor_pos[i];
  for (int i = 0; i < n_act; ++i) x[off++] = obs.motor_vel[i];
  for (int i = 0; i < n_joint; ++i) x[off++] = obs.joint_pos[i];
  for (int i = 0; i < n_joint; ++i) x[off++] = obs.joint_vel[i];
  x[off++] = obs.torso_orientation.w;
  x[off++] = obs.torso_orientation.x;
  x[off++] = obs.torso_orientation.y;
  x[off++] = obs.torso_orientation.z;
  x[off++] = cmd.cx;
  x[off++] = cmd.cy;
  x[off++] = cmd.cyaw;
  return x;
}

SignedPermutation FeatureEncoder::input_mirror(const MirrorSpec& m) const {
  if (m.actuators.size() != n_act || m.passive.size() != n_joint)
    throw std::invalid_argument("feature encoder: mirror spec size mismatch");
  SignedPermutation p = SignedPermutation::identity(input_dim());
  auto place = [&](const SignedPermutation& block, int off) {
    for (int i = 0; i < block.size(); ++i) {
      p.perm[off + i] = off + block.perm[i];
      p.signs[off + i] = block.signs[i];
    }
  };
  place(m.actuators, 0);
  place(m.actuators, n_act);
  place(m.passive, 2 * n_act);
  place(m.passive, 2 * n_act + n_joint);
  const int q = 2 * n_act + 2 * n_joint;
  p.signs[q + 1] = -1.0;  // quaternion x
  p.signs[q + 3] = -1.0;  // quaternion z
  p.signs[q + 5] = -1.0;  // cy
  p.signs[q + 6] = -1.0;  // cyaw
  p.validate();
  return p;
}

void RunningNormalizer::observe(const Eigen::VectorXd& x) {
  if (mean.size() == 0) {
    mean = Eigen::VectorXd::Zero(x.size());
    m2 = Eigen::VectorXd::Zero(x.size());
  }
  count += 1.0;
  const Eigen::VectorXd delta = x - mean;
  mean += delta / count;
  m2 += delta.cwiseProduct(x - mean);
}

void RunningNormalizer::merge(const RunningNormalizer& other) {
  if (other.count == 0.0) return;
  if (count == 0.0) {
    *this = other;
    return;
  }
  const double total = count + other.count;
  const Eigen::VectorXd delta = other.mean - mean;
  mean += delta * (other.count / total);
  m2 += other.m2 +
        delta.cwiseProduct(delta) * (count * other.count / total);
  count = total;
}

Eigen::VectorXd RunningNormalizer::stddev() const {
  if (count < 2.0) return Eigen::VectorXd::Ones(mean.size());
  return (m2 / (count - 1.0)).cwiseMax(1e-8).cwiseSqrt();
}

Eigen::VectorXd RunningNormalizer::normalize(const Eigen::VectorXd& x) const {
  if (count < 2.0) return x;
  Eigen::VectorXd out =
      (x - mean).cwiseQuotient(stddev());
  return out.cwiseMax(-10.0).cwiseMin(10.0);
}

Policy::Policy(FeatureEncoder enc, std::vector<int> hidden, int action_dim,
               std::uint64_t seed, double log_std_init)
    : encoder(enc),
      normalizer(enc.input_dim()),
      actor(enc.input_dim(), hidden, action_dim),
      critic(enc.input_dim(), hidden, 1),
      log_std(Eigen::VectorXd::Constant(action_dim, log_std_init)) {
  RandomStream rng(seed);
  actor.init_params(rng);
  critic.init_params(rng, 1.0);
}

Eigen::VectorXd Policy::clamped_log_std() const {
  return log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
}

Eigen::VectorXd Policy::act_mean(const Eigen::VectorXd& raw_input,
                                 LstmState& state) const {
  return actor.forward(normalizer.normalize(raw_input), state);
}

double Policy::value(const Eigen::VectorXd& raw_input,
                     LstmState& state) const {
  return critic.forward(normalizer.normalize(raw_input), state)[0];
}

std::pair<Eigen::VectorXd, double> Policy::sample_action(
    const Eigen::VectorXd& mean, RandomStream& rng) const {
  const Eigen::VectorXd sigma = clamped_log_std().array().exp();
  Eigen::VectorXd action(mean.size());
  for (int i = 0; i < mean.size(); ++i)
    action[i] = mean[i] + sigma[i] * rng.normal();
  return {action, log_prob(mean, action)};
}

double Policy::log_prob(const Eigen::VectorXd& mean,
                        const Eigen::VectorXd& action) const {
  const Eigen::VectorXd ls = clamped_log_std();
  const Eigen::VectorXd sigma = ls.array().exp();
  double lp = -0.5 * static_cast<double>(mean.size()) *
              std::log(2.0 * std::numbers::pi);
  for (int i = 0; i < mean.size(); ++i) {
    const double z = (action[i] - mean[i]) / sigma[i];
    lp += -0.5 * z * z - ls[i];
  }
  return lp;
}

double Policy::entropy() const {
  const Eigen::VectorXd ls = clamped_log_std();
  return ls.sum() + 0.5 * static_cast<double>(ls.size()) *
                        std::log(2.0 * std::numbers::pi * std::numbers::e);
}

int Policy::num_params() const {
  return actor.num_params() + critic.num_params() +
         static_cast<int>(log_std.size());
}

Eigen::VectorXd Policy::get_params() const {
  Eigen::VectorXd flat(num_params());
  flat.segment(0, actor.num_params()) = actor.get_params();
  flat.segment(actor.num_params(), critic.num_params()) = critic.get_params();
  flat.tail(log_std.size()) = log_std;
  return flat;
}

void Policy::set_params(const Eigen::VectorXd& flat) {
  if (flat.size() != num_params())
    throw std::invalid_argument("policy: flat parameter size mismatch");
  actor.set_params(flat.segment(0, actor.num_params()));
  critic.set_params(flat.segment(actor.num_params(), critic.num_params()));
  log_std = flat.tail(log_std.size());
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.size();
  if (rows == 0) return Eigen::MatrixXd(0, 0);
  const auto cols = j.at(0).size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          j.at(r).at(c).get<double>();
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = j.at(i).get<double>();
  return v;
}

json network_to_json(const LstmNetwork& net) {
  json j;
  j["input_dim"] = net.input_dim();
  j["output_dim"] = net.output_dim();
  j["hidden"] = net.hidden_sizes();
  json layers = json::array();
  for (const LstmLayerParams& l : net.layers()) {
    layers.push_back(json{{"w_ih", matrix_to_json(l.w_ih)},
                          {"w_hh", matrix_to_json(l.w_hh)},
                          {"b", vector_to_json(l.b)}});
  }
  j["layers"] = layers;
  j["head"] = json{{"w", matrix_to_json(net.head().w)},
                   {"b", vector_to_json(net.head().b)}};
  return j;
}

LstmNetwork network_from_json(const json& j) {
  LstmNetwork net(j.at("input_dim").get<int>(),
                  j.at("hidden").get<std::vector<int>>(),
                  j.at("output_dim").get<int>());
  const json& layers = j.at("layers");
  if (layers.size() != net.layers().size())
    throw SchemaError("checkpoint: layer count mismatch");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    net.layers()[l].w_ih = matrix_from_json(layers.at(l).at("w_ih"));
    net.layers()[l].w_hh = matrix_from_json(layers.at(l).at("w_hh"));
    net.layers()[l].b = vector_from_json(layers.at(l).at("b"));
  }
  net.head().w = matrix_from_json(j.at("head").at("w"));
  net.head().b = vector_from_json(j.at("head").at("b"));
  return net;
}

json policy_to_json(const Policy& p) {
  json j;
  j["schema"] = "sawlab.checkpoint";
  j["version"] = Policy::kCheckpointVersion;
  j["config_hash"] = p.config_hash;
  j["encoder"] = json{{"n_act", p.encoder.n_act}, {"n_joint", p.encoder.n_joint}};
  j["actor"] = network_to_json(p.actor);
  j["critic"] = network_to_json(p.critic);
  j["log_std"] = vector_to_json(p.log_std);
  j["normalizer"] = json{{"count", p.normalizer.count},
                         {"mean", vector_to_json(p.normalizer.mean)},
                         {"m2", vector_to_json(p.normalizer.m2)}};
  return j;
}

}  // namespace

void Policy::save(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f << policy_to_json(*this).dump(2) << '\n';
}

Policy Policy::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open for read: " + path);
  json j = json::parse(f, nullptr, false);
  if (j.is_discarded() || j.value("schema", "") != "sawlab.checkpoint")
    throw SchemaError("not a sawlab checkpoint: " + path);
  if (j.at("version").get<int>() != kCheckpointVersion)
    throw SchemaError("unsupported checkpoint version in " + path);
  Policy p;
  p.config_hash = j.value("config_hash", "");
  p.encoder.n_act = j.at("encoder").at("n_act").get<int>();
  p.encoder.n_joint = j.at("encoder").at("n_joint").get<int>();
  p.actor = network_from_json(j.at("actor"));
  p.critic = network_from_json(j.at("critic"));
  p.log_std = vector_from_json(j.at("log_std"));
  p.normalizer = RunningNormalizer(p.encoder.input_dim());
  p.normalizer.count = j.at("normalizer").at("count").get<double>();
  p.normalizer.mean = vector_from_json(j.at("normalizer").at("mean"));
  p.normalizer.m2 = vector_from_json(j.at("normalizer").at("m2"));
  if (p.actor.input_dim() != p.encoder.input_dim())
    throw SchemaError("checkpoint: encoder/actor dimension mismatch");
  return p;
}

std::string Policy::hash() const {
  return hash_hex(policy_to_json(*this).dump());
}

std::vector<double> PolicyController::act(const Observation& obs,
                                          const Command& cmd) {
  const Eigen::VectorXd mean =
      policy_->act_mean(policy_->encoder.encode(obs, cmd), state_);
  return std::vector<double>(mean.data(), mean.data() + mean.size());
}

}  // namespace sawlab
