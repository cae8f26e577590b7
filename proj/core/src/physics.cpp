#include "sawlab/physics.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "sawlab/errors.hpp"

namespace sawlab {

namespace {
inline Eigen::Vector2d perp(const Eigen::Vector2d& v) {
  return {-v.y(), v.x()};
}
}  // namespace

struct PlanarDynamics::Kinematics {
  std::vector<double> angle, omega;
  std::vector<Eigen::Vector2d> origin, v_origin, a_origin;
  std::vector<Eigen::Vector2d> com, v_com, a_com;
  // Rotation pivots per angular dof (world position and velocity).
  std::vector<Eigen::Vector2d> pivot, v_pivot;

  void resize(int links, int dof) {
    angle.resize(links);
    omega.resize(links);
    origin.resize(links);
    v_origin.resize(links);
    a_origin.resize(links);
    com.resize(links);
    v_com.resize(links);
    a_com.resize(links);
    pivot.resize(dof);
    v_pivot.resize(dof);
  }
};

PlanarDynamics::PlanarDynamics(const RobotModel& model, const SimConfig& cfg)
    : model_(model), cfg_(cfg), n_(model.num_dof()) {
  model_.validate();
  // Angular-dof path from the base to each link (base angle first).
  path_.resize(model_.links.size());
  for (std::size_t i = 0; i < model_.links.size(); ++i) {
    if (model_.links[i].parent < 0) {
      path_[i] = {2};
    } else {
      path_[i] = path_[model_.links[i].parent];
      path_[i].push_back(3 + model_.links[i].joint);
    }
  }
  for (int f = 0; f < 2; ++f) {
    contact_points_[2 * f + 0] = {model_.foot_link[f], f, model_.heel};
    contact_points_[2 * f + 1] = {model_.foot_link[f], f, model_.toe};
  }
}

void PlanarDynamics::forward_kinematics(const PlanarState& s,
                                        Kinematics& k) const {
  const int links = static_cast<int>(model_.links.size());
  k.resize(links, n_);
  for (int i = 0; i < links; ++i) {
    const LinkDef& l = model_.links[i];
    if (l.parent < 0) {
      k.angle[i] = s.q[2];
      k.omega[i] = s.v[2];
      k.origin[i] = {s.q[0], s.q[1]};
      k.v_origin[i] = {s.v[0], s.v[1]};
      k.a_origin[i].setZero();
      k.pivot[2] = k.origin[i];
      k.v_pivot[2] = k.v_origin[i];
    } else {
      const int p = l.parent;
      const double cp = std::cos(k.angle[p]), sp = std::sin(k.angle[p]);
      const Eigen::Vector2d anchor_w{cp * l.anchor.x() - sp * l.anchor.y(),
                                     sp * l.anchor.x() + cp * l.anchor.y()};
      k.origin[i] = k.origin[p] + anchor_w;
      k.v_origin[i] = k.v_origin[p] + k.omega[p] * perp(anchor_w);
      // Acceleration of a parent-fixed point under zero generalized accel.
      k.a_origin[i] =
          k.a_origin[p] + k.omega[p] * perp(k.v_origin[i] - k.v_origin[p]);
      k.angle[i] = k.angle[p] + s.q[3 + l.joint];
      k.omega[i] = k.omega[p] + s.v[3 + l.joint];
      k.pivot[3 + l.joint] = k.origin[i];
      k.v_pivot[3 + l.joint] = k.v_origin[i];
    }
    const double ci = std::cos(k.angle[i]), si = std::sin(k.angle[i]);
    const LinkDef& l2 = model_.links[i];
    const Eigen::Vector2d com_w{ci * l2.com.x() - si * l2.com.y(),
                                si * l2.com.x() + ci * l2.com.y()};
    k.com[i] = k.origin[i] + com_w;
    k.v_com[i] = k.v_origin[i] + k.omega[i] * perp(com_w);
    k.a_com[i] =
        k.a_origin[i] + k.omega[i] * perp(k.v_com[i] - k.v_origin[i]);
  }
}

PlanarState PlanarDynamics::make_state(const std::vector<double>& pose) const {
  if (static_cast<int>(pose.size()) != model_.num_joints())
    throw std::invalid_argument("pose size mismatch");
  PlanarState s;
  s.q = Eigen::VectorXd::Zero(n_);
  s.v = Eigen::VectorXd::Zero(n_);
  for (int i = 0; i < model_.num_joints(); ++i) s.q[3 + i] = pose[i];
  s.anchors.assign(4, {});

  Kinematics k;
  forward_kinematics(s, k);
  double min_z = 1e300;
  for (const ContactDef& c : contact_points_) {
    const double a = k.angle[c.link];
    const Eigen::Vector2d p =
        k.origin[c.link] + Eigen::Vector2d{std::cos(a) * c.local.x() -
                                               std::sin(a) * c.local.y(),
                                           std::sin(a) * c.local.x() +
                                               std::cos(a) * c.local.y()};
    min_z = std::min(min_z, p.y());
  }
  // Rest the lowest point at the static penetration depth so a nominal reset
  // starts in supported contact rather than mid-air.
  const double static_pen = model_.total_mass() * cfg_.gravity /
                            (4.0 * cfg_.contact.normal_stiffness);
  s.q[1] = -min_z - static_pen;
  return s;
}

double PlanarDynamics::link_angle(const PlanarState& s, int link) const {
  double a = s.q[2];
  // Walk up from the link accumulating joint angles.
  for (int i = link; model_.links[i].parent >= 0; i = model_.links[i].parent)
    a += s.q[3 + model_.links[i].joint];
  return a;
}

Eigen::Vector2d PlanarDynamics::link_origin(const PlanarState& s,
                                            int link) const {
  if (model_.links[link].parent < 0) return {s.q[0], s.q[1]};
  const int p = model_.links[link].parent;
  const double ap = link_angle(s, p);
  const Eigen::Vector2d& anchor = model_.links[link].anchor;
  return link_origin(s, p) +
         Eigen::Vector2d{std::cos(ap) * anchor.x() - std::sin(ap) * anchor.y(),
                         std::sin(ap) * anchor.x() + std::cos(ap) * anchor.y()};
}

Eigen::Vector2d PlanarDynamics::point_world(const PlanarState& s, int link,
                                            const Eigen::Vector2d& local) const {
  const double a = link_angle(s, link);
  return link_origin(s, link) +
         Eigen::Vector2d{std::cos(a) * local.x() - std::sin(a) * local.y(),
                         std::sin(a) * local.x() + std::cos(a) * local.y()};
}

Eigen::Vector2d PlanarDynamics::point_velocity(
    const PlanarState& s, int link, const Eigen::Vector2d& local) const {
  Kinematics k;
  forward_kinematics(s, k);
  const double a = k.angle[link];
  const Eigen::Vector2d p =
      k.origin[link] +
      Eigen::Vector2d{std::cos(a) * local.x() - std::sin(a) * local.y(),
                      std::sin(a) * local.x() + std::cos(a) * local.y()};
  return k.v_origin[link] + k.omega[link] * perp(p - k.origin[link]);
}

Eigen::Vector2d PlanarDynamics::push_point(const PlanarState& s) const {
  return point_world(s, 0, {0.0, model_.push_attach_height});
}

bool PlanarDynamics::foot_in_contact(const PlanarState& s, int foot) const {
  for (int c = 2 * foot; c < 2 * foot + 2; ++c) {
    if (point_world(s, contact_points_[c].link, contact_points_[c].local).y() <
        0.0)
      return true;
  }
  return false;
}

void PlanarDynamics::step(PlanarState& state, const Eigen::VectorXd& setpoints,
                          const std::vector<ExternalForce>& external,
                          StepDetail* detail) const {
  const int nj = model_.num_joints();
  if (setpoints.size() != nj)
    throw std::invalid_argument("setpoint vector size mismatch");

  thread_local Kinematics k;
  forward_kinematics(state, k);

  Eigen::VectorXd generalized = Eigen::VectorXd::Zero(n_);

  // PD servo torques, clamped to the actuator limits.
  Eigen::VectorXd tau(nj);
  for (int j = 0; j < nj; ++j) {
    const JointDef& jd = model_.joints[j];
    double t = jd.kp * (setpoints[j] - state.q[3 + j]) - jd.kd * state.v[3 + j];
    t = std::clamp(t, -jd.torque_limit, jd.torque_limit);
    tau[j] = t;
    generalized[3 + j] += t;
  }

  // Applies a world force at a world point on a link through the point
  // Jacobian transpose.
  auto apply_point_force = [&](int link, const Eigen::Vector2d& p,
                               const Eigen::Vector2d& f) {
    generalized[0] += f.x();
    generalized[1] += f.y();
    for (int dof : path_[link]) generalized[dof] += f.dot(perp(p - k.pivot[dof]));
  };

  // Ground contact.
  const ContactParams& cp = cfg_.contact;
  for (int c = 0; c < 4; ++c) {
    const ContactDef& cd = contact_points_[c];
    const double a = k.angle[cd.link];
    const Eigen::Vector2d p =
        k.origin[cd.link] +
        Eigen::Vector2d{std::cos(a) * cd.local.x() - std::sin(a) * cd.local.y(),
                        std::sin(a) * cd.local.x() + std::cos(a) * cd.local.y()};
    const Eigen::Vector2d vp =
        k.v_origin[cd.link] + k.omega[cd.link] * perp(p - k.origin[cd.link]);
    PlanarState::Anchor& anchor = state.anchors[c];
    const double pen = -p.y();

    StepDetail::ContactPoint info;
    info.foot = cd.foot;
    info.position = p;
    info.penetration = pen;

    if (pen > 0.0) {
      double fn = cp.normal_stiffness * pen - cp.normal_damping * vp.y();
      if (fn < 0.0) fn = 0.0;
      if (!anchor.engaged) {
        anchor.engaged = true;
        anchor.x = p.x();
      }
      double ft = -cp.tangent_stiffness * (p.x() - anchor.x) -
                  cp.tangent_damping * vp.x();
      const double limit = cp.friction * fn;
      if (ft > limit) ft = limit;
      if (ft < -limit) ft = -limit;
      // Drag the anchor so the spring is consistent with the clamped force.
      anchor.x = p.x() + (ft + cp.tangent_damping * vp.x()) / cp.tangent_stiffness;
      apply_point_force(cd.link, p, {ft, fn});
      info.normal_force = fn;
      info.tangent_force = ft;
      info.active = true;
    } else {
      anchor.engaged = false;
    }
    if (detail) detail->contacts[c] = info;
  }

  for (const ExternalForce& ef : external)
    apply_point_force(ef.link, point_world(state, ef.link, ef.point), ef.force);

  // Bias forces: generalized force required for zero acceleration, i.e.
  // Coriolis/centrifugal plus gravity, via the CoM Jacobians.
  const Eigen::Vector2d g_vec{0.0, -cfg_.gravity};
  Eigen::VectorXd bias = Eigen::VectorXd::Zero(n_);
  const int links = static_cast<int>(model_.links.size());
  for (int i = 0; i < links; ++i) {
    const Eigen::Vector2d f = model_.links[i].mass * (k.a_com[i] - g_vec);
    bias[0] += f.x();
    bias[1] += f.y();
    for (int dof : path_[i]) bias[dof] += f.dot(perp(k.com[i] - k.pivot[dof]));
  }

  // Mass matrix from CoM Jacobians plus rotational inertia over path pairs.
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n_, n_);
  std::vector<std::pair<int, Eigen::Vector2d>> cols;
  for (int i = 0; i < links; ++i) {
    const double m = model_.links[i].mass;
    const double inertia = model_.links[i].inertia;
    cols.clear();
    cols.emplace_back(0, Eigen::Vector2d{1.0, 0.0});
    cols.emplace_back(1, Eigen::Vector2d{0.0, 1.0});
    for (int dof : path_[i]) cols.emplace_back(dof, perp(k.com[i] - k.pivot[dof]));
    for (const auto& [ca, ja] : cols)
      for (const auto& [cb, jb] : cols) M(ca, cb) += m * ja.dot(jb);
    for (int da : path_[i])
      for (int db : path_[i]) M(da, db) += inertia;
  }

  const Eigen::VectorXd acc = M.ldlt().solve(generalized - bias);

  const Eigen::VectorXd v_new = state.v + cfg_.physics_dt * acc;
  state.q += cfg_.physics_dt * 0.5 * (state.v + v_new);
  state.v = v_new;
  state.time += cfg_.physics_dt;

  if (detail) detail->joint_torques = tau;

  for (int i = 0; i < n_; ++i) {
    if (!std::isfinite(state.q[i]) || !std::isfinite(state.v[i]) ||
        std::abs(state.q[i]) > 1e6 || std::abs(state.v[i]) > 1e6)
      throw SimulationBlowup("planar dynamics diverged", state.time);
  }
}

double PlanarDynamics::mechanical_energy(const PlanarState& s) const {
  Kinematics k;
  forward_kinematics(s, k);
  double e = 0.0;
  for (std::size_t i = 0; i < model_.links.size(); ++i) {
    const LinkDef& l = model_.links[i];
    e += 0.5 * l.mass * k.v_com[i].squaredNorm() +
         0.5 * l.inertia * k.omega[i] * k.omega[i];
    e += l.mass * cfg_.gravity * k.com[i].y();
  }
  for (int c = 0; c < 4; ++c) {
    const ContactDef& cd = contact_points_[c];
    const double a = k.angle[cd.link];
    const Eigen::Vector2d p =
        k.origin[cd.link] +
        Eigen::Vector2d{std::cos(a) * cd.local.x() - std::sin(a) * cd.local.y(),
                        std::sin(a) * cd.local.x() + std::cos(a) * cd.local.y()};
    const double pen = -p.y();
    if (pen > 0.0) {
      e += 0.5 * cfg_.contact.normal_stiffness * pen * pen;
      if (s.anchors[c].engaged) {
        const double stretch = p.x() - s.anchors[c].x;
        e += 0.5 * cfg_.contact.tangent_stiffness * stretch * stretch;
      }
    }
  }
  return e;
}

Eigen::Vector2d PlanarDynamics::linear_momentum(const PlanarState& s) const {
  Kinematics k;
  forward_kinematics(s, k);
  Eigen::Vector2d p{0.0, 0.0};
  for (std::size_t i = 0; i < model_.links.size(); ++i)
    p += model_.links[i].mass * k.v_com[i];
  return p;
}

}  // namespace sawlab
