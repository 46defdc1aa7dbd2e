#pragma once

#include "latgeo/dataset.hpp"
#include "latgeo/rng.hpp"

#include <utility>

namespace latgeo {

/// Simulated 6-DOF serial arm tracing a planar circle. The chain is a fixed
/// stand-in with documented segment lengths (0.20 + 0.40 + 0.35 + 0.10 +
/// 0.10 + 0.05 = 1.20 m); joint angles come from damped-least-squares inverse
/// kinematics with a weak nullspace pull toward the home posture, warm-started
/// from the previous timestep so the trajectory closes.
struct RobotArmConfig {
    Index timesteps = 6284;
    double radius = 0.4;
    double center_x = 0.45, center_y = 0.0, center_z = 0.45;
    double noise_std = 0.03;
    Index validation_count = 150;
    std::uint64_t rng_seed = 0;
    double ik_damping = 1e-3;
    int ik_max_iters = 200;

    void validate() const;
};

inline constexpr int kRobotDof = 6;

/// End-effector position for a joint vector.
Eigen::Vector3d robot_fk(const Vector& q);
/// Geometric position Jacobian, 3 x 6.
Matrix robot_position_jacobian(const Vector& q);
/// Home posture used as IK warm start and nullspace reference.
Vector robot_home_posture();

/// Damped-least-squares IK; raises NumericError when the residual stays
/// above 1e-6 m after the iteration budget.
Vector robot_ik(const Eigen::Vector3d& target, const Vector& q_init, const RobotArmConfig& cfg);

/// (train, validation) joint-angle datasets; annotations carry timestep,
/// circle phase and the commanded Cartesian point. Noise is added after IK.
std::pair<Dataset, Dataset> robot_generate(const RobotArmConfig& cfg);

} // namespace latgeo
