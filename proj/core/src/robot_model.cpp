#include "sawlab/robot_model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sawlab/util.hpp"

namespace sawlab {

double RobotModel::total_mass() const {
  double m = 0.0;
  for (const LinkDef& l : links) m += l.mass;
  return m;
}

std::vector<double> RobotModel::torque_limits() const {
  std::vector<double> t;
  t.reserve(joints.size());
  for (const JointDef& j : joints) t.push_back(j.torque_limit);
  return t;
}

std::vector<double> RobotModel::clamp_setpoints(
    const std::vector<double>& sp) const {
  if (sp.size() != joints.size())
    throw std::invalid_argument("setpoint vector size mismatch");
  std::vector<double> out(sp.size());
  for (std::size_t i = 0; i < sp.size(); ++i)
    out[i] = std::clamp(sp[i], joints[i].setpoint_min, joints[i].setpoint_max);
  return out;
}

void RobotModel::validate() const {
  if (links.empty() || links[0].parent != -1 || links[0].joint != -1)
    throw std::invalid_argument("links[0] must be the floating base");
  for (std::size_t i = 1; i < links.size(); ++i) {
    const LinkDef& l = links[i];
    if (l.parent < 0 || l.parent >= static_cast<int>(i))
      throw std::invalid_argument("link parents must precede children");
    if (l.joint < 0 || l.joint >= num_joints())
      throw std::invalid_argument("link joint index out of range");
  }
  for (const LinkDef& l : links) {
    if (!(l.mass > 0.0) || !(l.inertia > 0.0))
      throw std::invalid_argument("link masses and inertias must be > 0");
  }
  for (const JointDef& j : joints) {
    if (!(j.kp > 0.0) || !(j.kd > 0.0) || !(j.torque_limit > 0.0))
      throw std::invalid_argument("joint gains and torque limits must be > 0");
    if (!(j.setpoint_min < j.setpoint_max))
      throw std::invalid_argument("joint setpoint range is empty");
  }
  for (int f = 0; f < 2; ++f)
    if (foot_link[f] < 0 || foot_link[f] >= static_cast<int>(links.size()))
      throw std::invalid_argument("foot link index out of range");
  if (static_cast<int>(nominal_pose.size()) != num_joints())
    throw std::invalid_argument("nominal pose size mismatch");
  if (mirror.actuators.size() != num_joints())
    throw std::invalid_argument("mirror spec inconsistent with joint count");
  mirror.validate();
  // Mirror consistency: paired joints must share gains and limits.
  for (int i = 0; i < num_joints(); ++i) {
    const int j = mirror.actuators.perm[i];
    if (joints[i].torque_limit != joints[j].torque_limit ||
        joints[i].kp != joints[j].kp || joints[i].kd != joints[j].kd)
      throw std::invalid_argument(
          "mirrored joint pairs must share gains and torque limits");
  }
}

std::string RobotModel::hash() const {
  std::ostringstream os;
  for (const LinkDef& l : links)
    os << l.name << ',' << l.parent << ',' << l.joint << ','
       << format_double(l.anchor.x()) << ',' << format_double(l.anchor.y())
       << ',' << format_double(l.mass) << ',' << format_double(l.inertia)
       << ',' << format_double(l.com.x()) << ',' << format_double(l.com.y())
       << ';';
  for (const JointDef& j : joints)
    os << j.name << ',' << format_double(j.kp) << ',' << format_double(j.kd)
       << ',' << format_double(j.torque_limit) << ','
       << format_double(j.setpoint_min) << ',' << format_double(j.setpoint_max)
       << ';';
  os << foot_link[0] << ',' << foot_link[1] << ','
     << format_double(heel.x()) << ',' << format_double(heel.y()) << ','
     << format_double(toe.x()) << ',' << format_double(toe.y());
  for (double p : nominal_pose) os << ',' << format_double(p);
  return hash_hex(os.str());
}

RobotModel planar_biped(const PlanarBipedParams& p) {
  RobotModel m;
  const double torso_mass = p.with_arms ? p.torso_mass - 2.0 * p.arm_mass
                                        : p.torso_mass;

  LinkDef torso;
  torso.name = "torso";
  torso.mass = torso_mass;
  torso.inertia = p.torso_inertia;
  torso.com = {0.0, 0.5 * p.torso_length};
  m.links.push_back(torso);

  auto rod_inertia = [](double mass, double len) {
    return mass * len * len / 12.0;
  };

  auto add_leg = [&](const std::string& side) {
    const int hip_joint = static_cast<int>(m.joints.size());
    m.joints.push_back({side + "_hip", p.hip_kp, p.hip_kd, p.hip_torque,
                        -1.2, 1.2});
    m.joints.push_back({side + "_knee", p.knee_kp, p.knee_kd, p.knee_torque,
                        -2.2, 0.3});
    m.joints.push_back({side + "_ankle", p.ankle_kp, p.ankle_kd,
                        p.ankle_torque, -1.0, 1.0});

    LinkDef thigh;
    thigh.name = side + "_thigh";
    thigh.parent = 0;
    thigh.joint = hip_joint;
    thigh.anchor = {0.0, 0.0};  // hips at the base origin
    thigh.mass = p.thigh_mass;
    thigh.inertia = rod_inertia(p.thigh_mass, p.thigh_length);
    thigh.com = {0.0, -0.5 * p.thigh_length};
    m.links.push_back(thigh);
    const int thigh_idx = static_cast<int>(m.links.size()) - 1;

    LinkDef shin;
    shin.name = side + "_shin";
    shin.parent = thigh_idx;
    shin.joint = hip_joint + 1;
    shin.anchor = {0.0, -p.thigh_length};
    shin.mass = p.shin_mass;
    shin.inertia = rod_inertia(p.shin_mass, p.shin_length);
    shin.com = {0.0, -0.5 * p.shin_length};
    m.links.push_back(shin);
    const int shin_idx = static_cast<int>(m.links.size()) - 1;

    LinkDef foot;
    foot.name = side + "_foot";
    foot.parent = shin_idx;
    foot.joint = hip_joint + 2;
    foot.anchor = {0.0, -p.shin_length};
    foot.mass = p.foot_mass;
    const double foot_len = p.foot_heel + p.foot_toe;
    foot.inertia = rod_inertia(p.foot_mass, foot_len) + 0.001;
    foot.com = {0.5 * (p.foot_toe - p.foot_heel), -0.5 * p.foot_ankle_height};
    m.links.push_back(foot);
    return static_cast<int>(m.links.size()) - 1;
  };

  m.foot_link[kLeftFoot] = add_leg("left");
  m.foot_link[kRightFoot] = add_leg("right");

  if (p.with_arms) {
    auto add_arm = [&](const std::string& side) {
      const int j = static_cast<int>(m.joints.size());
      m.joints.push_back({side + "_shoulder", p.arm_kp, p.arm_kd,
                          p.arm_torque, -1.5, 1.5});
      LinkDef arm;
      arm.name = side + "_arm";
      arm.parent = 0;
      arm.joint = j;
      arm.anchor = {0.0, 0.8 * p.torso_length};
      arm.mass = p.arm_mass;
      arm.inertia = rod_inertia(p.arm_mass, p.arm_length);
      arm.com = {0.0, -0.5 * p.arm_length};
      m.links.push_back(arm);
      m.arm_joints.push_back(j);
    };
    add_arm("left");
    add_arm("right");
  }

  m.heel = {-p.foot_heel, -p.foot_ankle_height};
  m.toe = {p.foot_toe, -p.foot_ankle_height};

  // Nominal crouch: hip a, knee -2a, ankle a keeps the ankle under the hip
  // and the sole level.
  const double a = p.knee_bend;
  m.nominal_pose.assign(m.joints.size(), 0.0);
  for (int leg = 0; leg < 2; ++leg) {
    m.nominal_pose[3 * leg + 0] = a;
    m.nominal_pose[3 * leg + 1] = -2.0 * a;
    m.nominal_pose[3 * leg + 2] = a;
  }
  m.nominal_base_height =
      p.foot_ankle_height + (p.thigh_length + p.shin_length) * std::cos(a);
  m.push_attach_height = p.push_attach_height;

  // Left/right swap; planar joints keep their sign under reflection.
  const int n = m.num_joints();
  SignedPermutation act = SignedPermutation::identity(n);
  for (int i = 0; i < 3; ++i) std::swap(act.perm[i], act.perm[3 + i]);
  if (p.with_arms) std::swap(act.perm[6], act.perm[7]);
  m.mirror.actuators = act;
  m.mirror.passive = SignedPermutation::identity(0);
  SignedPermutation posture =
      SignedPermutation::identity(p.with_arms ? 2 : 0);
  if (p.with_arms) std::swap(posture.perm[0], posture.perm[1]);
  m.mirror.posture = posture;

  m.validate();
  return m;
}

}  // namespace sawlab
