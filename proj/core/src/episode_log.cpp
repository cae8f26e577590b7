#include "sawlab/episode_log.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "sawlab/errors.hpp"

namespace sawlab {

using json = nlohmann::json;

namespace {

json to_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

Vec3 vec3_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw SchemaError("expected 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json to_json(const Observation& o) {
  json j;
  j["motor_pos"] = o.motor_pos;
  j["motor_vel"] = o.motor_vel;
  j["joint_pos"] = o.joint_pos;
  j["joint_vel"] = o.joint_vel;
  j["quat"] = json::array({o.torso_orientation.w, o.torso_orientation.x,
                           o.torso_orientation.y, o.torso_orientation.z});
  j["base_pos"] = to_json(o.base_pos);
  j["base_linvel"] = to_json(o.base_linvel);
  j["base_acc"] = to_json(o.base_acc);
  j["foot_pos"] = json::array({to_json(o.foot_pos[0]), to_json(o.foot_pos[1])});
  j["foot_rpy"] = json::array({to_json(o.foot_rpy[0]), to_json(o.foot_rpy[1])});
  j["contact"] = json::array({o.contact[0], o.contact[1]});
  j["airtime"] = json::array({o.airtime[0], o.airtime[1]});
  j["touchdown"] = json::array({o.touchdown[0], o.touchdown[1]});
  j["arm_pos"] = o.arm_pos;
  j["torque"] = o.applied_torque;
  j["prev_action"] = o.prev_action;
  j["action"] = o.action;
  j["time"] = o.time;
  return j;
}

Observation obs_from(const json& j) {
  Observation o;
  o.motor_pos = j.at("motor_pos").get<std::vector<double>>();
  o.motor_vel = j.at("motor_vel").get<std::vector<double>>();
  o.joint_pos = j.at("joint_pos").get<std::vector<double>>();
  o.joint_vel = j.at("joint_vel").get<std::vector<double>>();
  const json& q = j.at("quat");
  o.torso_orientation = {q.at(0).get<double>(), q.at(1).get<double>(),
                         q.at(2).get<double>(), q.at(3).get<double>()};
  o.base_pos = vec3_from(j.at("base_pos"));
  o.base_linvel = vec3_from(j.at("base_linvel"));
  o.base_acc = vec3_from(j.at("base_acc"));
  for (int f = 0; f < 2; ++f) {
    o.foot_pos[f] = vec3_from(j.at("foot_pos").at(f));
    o.foot_rpy[f] = vec3_from(j.at("foot_rpy").at(f));
    o.contact[f] = j.at("contact").at(f).get<bool>();
    o.airtime[f] = j.at("airtime").at(f).get<double>();
    o.touchdown[f] = j.at("touchdown").at(f).get<bool>();
  }
  o.arm_pos = j.at("arm_pos").get<std::vector<double>>();
  o.applied_torque = j.at("torque").get<std::vector<double>>();
  o.prev_action = j.at("prev_action").get<std::vector<double>>();
  o.action = j.at("action").get<std::vector<double>>();
  o.time = j.at("time").get<double>();
  return o;
}

json to_json(const LogRecord& r) {
  json j;
  j["t"] = r.t;
  j["obs"] = to_json(r.obs);
  j["cmd"] = json{{"cx", r.cmd.cx},
                  {"cy", r.cmd.cy},
                  {"cyaw", r.cmd.cyaw},
                  {"heading_ref", r.cmd.heading_ref}};
  j["rew"] = r.rewards;
  if (r.push) {
    j["push"] = json{{"axis", r.push->axis},
                     {"force", r.push->force},
                     {"duration", r.push->duration},
                     {"start", r.push->start_time},
                     {"height", r.push->height}};
  }
  j["fall"] = r.fall;
  j["done"] = r.done;
  return j;
}

LogRecord record_from(const json& j) {
  LogRecord r;
  r.t = j.at("t").get<double>();
  r.obs = obs_from(j.at("obs"));
  const json& c = j.at("cmd");
  r.cmd = {c.at("cx").get<double>(), c.at("cy").get<double>(),
           c.at("cyaw").get<double>(), c.at("heading_ref").get<double>()};
  r.rewards = j.at("rew").get<std::map<std::string, double>>();
  if (j.contains("push")) {
    const json& p = j.at("push");
    r.push = PushMarker{p.at("axis").get<int>(), p.at("force").get<double>(),
                        p.at("duration").get<double>(),
                        p.at("start").get<double>(),
                        p.at("height").get<double>()};
  }
  r.fall = j.at("fall").get<bool>();
  r.done = j.at("done").get<bool>();
  return r;
}

}  // namespace

void EpisodeLog::validate() const {
  if (dt <= 0.0) throw SchemaError("episode log: dt must be positive");
  if (records.empty()) throw SchemaError("episode log: no records");
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (i > 0) {
      const double gap = records[i].t - records[i - 1].t;
      if (!(gap > 0.0) || std::abs(gap - dt) > 1e-9)
        throw SchemaError("episode log: records not spaced by dt at index " +
                          std::to_string(i));
      if (records[i - 1].fall && !records[i].fall)
        throw SchemaError("episode log: fall flag not monotone");
      if (records[i - 1].done)
        throw SchemaError("episode log: record after terminal record");
    }
  }
  if (!records.back().done)
    throw SchemaError("episode log: missing terminal record");
}

void EpisodeLog::save(std::ostream& out) const {
  json header{{"schema", "sawlab.episode_log"},
              {"version", kSchemaVersion},
              {"dt", dt},
              {"model_hash", model_hash},
              {"config_hash", config_hash}};
  out << header.dump() << '\n';
  for (const LogRecord& r : records) out << to_json(r).dump() << '\n';
}

void EpisodeLog::save_file(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  save(f);
}

EpisodeLog EpisodeLog::load(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("episode log: empty stream");
  json header = json::parse(line, nullptr, false);
  if (header.is_discarded() || header.value("schema", "") != "sawlab.episode_log")
    throw SchemaError("episode log: bad header line");
  if (header.at("version").get<int>() != kSchemaVersion)
    throw SchemaError("episode log: unsupported schema version");
  EpisodeLog log;
  log.dt = header.at("dt").get<double>();
  log.model_hash = header.value("model_hash", "");
  log.config_hash = header.value("config_hash", "");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw SchemaError("episode log: bad record line");
    log.records.push_back(record_from(j));
  }
  return log;
}

EpisodeLog EpisodeLog::load_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open for read: " + path);
  return load(f);
}

bool operator==(const LogRecord& a, const LogRecord& b) {
  return to_json(a) == to_json(b);
}

bool operator==(const EpisodeLog& a, const EpisodeLog& b) {
  if (a.dt != b.dt || a.model_hash != b.model_hash ||
      a.config_hash != b.config_hash || a.records.size() != b.records.size())
    return false;
  for (std::size_t i = 0; i < a.records.size(); ++i)
    if (!(a.records[i] == b.records[i])) return false;
  return true;
}

}  // namespace sawlab
