#pragma once

#include <Eigen/Core>
#include <array>
#include <vector>

#include "sawlab/robot_model.hpp"
#include "sawlab/sim_config.hpp"

namespace sawlab {

/// Generalized state of the planar mechanism plus the tangential contact
/// anchors (part of the dynamic state: the friction model is a stick-slip
/// spring about a dragged anchor point).
struct PlanarState {
  Eigen::VectorXd q;  // [x, z, base_angle, joints...]
  Eigen::VectorXd v;
  struct Anchor {
    bool engaged = false;
    double x = 0.0;
  };
  std::vector<Anchor> anchors;  // one per contact point
  double time = 0.0;
};

/// External force on one link at a point given in link coordinates.
struct ExternalForce {
  int link = 0;
  Eigen::Vector2d point{0.0, 0.0};
  Eigen::Vector2d force{0.0, 0.0};  // world frame, N
};

/// Per-substep diagnostics for tests and validation scenarios.
struct StepDetail {
  struct ContactPoint {
    int foot = 0;
    Eigen::Vector2d position{0, 0};
    double penetration = 0.0;
    double normal_force = 0.0;
    double tangent_force = 0.0;
    bool active = false;
  };
  std::array<ContactPoint, 4> contacts;
  Eigen::VectorXd joint_torques;  // clamped PD torques
};

/// Articulated planar rigid-body dynamics with PD joint servos and compliant
/// ground contact, integrated with semi-implicit Euler (velocity first, then
/// positions from the velocity midpoint, which reproduces constant-force
/// trajectories exactly).
class PlanarDynamics {
 public:
  PlanarDynamics(const RobotModel& model, const SimConfig& cfg);

  const RobotModel& model() const { return model_; }
  int num_dof() const { return n_; }
  int num_contact_points() const { return 4; }

  /// Initial state with joints at `pose` and the lowest contact point resting
  /// at the static penetration depth (or at `base_height` when given).
  PlanarState make_state(const std::vector<double>& pose) const;

  /// Advance one physics_dt. Setpoints are per-joint PD targets (already
  /// clamped by the caller). Throws SimulationBlowup on divergence.
  void step(PlanarState& state, const Eigen::VectorXd& setpoints,
            const std::vector<ExternalForce>& external,
            StepDetail* detail = nullptr) const;

  // Kinematic queries.
  double link_angle(const PlanarState& s, int link) const;
  Eigen::Vector2d link_origin(const PlanarState& s, int link) const;
  Eigen::Vector2d point_world(const PlanarState& s, int link,
                              const Eigen::Vector2d& local) const;
  Eigen::Vector2d point_velocity(const PlanarState& s, int link,
                                 const Eigen::Vector2d& local) const;
  /// World position of the push attachment point on the torso.
  Eigen::Vector2d push_point(const PlanarState& s) const;

  /// Kinetic + gravitational + contact-spring energy; the audit quantity for
  /// passive-drop validation.
  double mechanical_energy(const PlanarState& s) const;
  Eigen::Vector2d linear_momentum(const PlanarState& s) const;

  /// True if any contact point of the foot penetrates the ground.
  bool foot_in_contact(const PlanarState& s, int foot) const;

 private:
  struct Kinematics;  // per-substep scratch, defined in the .cpp
  void forward_kinematics(const PlanarState& s, Kinematics& k) const;

  RobotModel model_;
  SimConfig cfg_;
  int n_ = 0;
  std::vector<std::vector<int>> path_;  // per link: angular dof indices
  struct ContactDef {
    int link = 0;
    int foot = 0;
    Eigen::Vector2d local{0, 0};
  };
  std::array<ContactDef, 4> contact_points_;
};

/// Spec-level convenience wrapper: one substep on `state`.
inline void step_physics(PlanarState& state, const Eigen::VectorXd& setpoints,
                         const std::vector<ExternalForce>& external,
                         const PlanarDynamics& dyn,
                         StepDetail* detail = nullptr) {
  dyn.step(state, setpoints, external, detail);
}

}  // namespace sawlab
