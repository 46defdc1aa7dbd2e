#include "latgeo/robot.hpp"

#include <cmath>
#include <numbers>

namespace latgeo {
namespace {

enum class Axis { X, Y, Z };

struct Segment {
    Axis axis;
    Eigen::Vector3d offset;
};

// Fixed chain: base yaw, shoulder and elbow pitch, forearm roll, wrist pitch,
// wrist yaw. Offsets are applied after each joint rotation.
const std::array<Segment, kRobotDof>& chain() {
    static const std::array<Segment, kRobotDof> c = {{
        {Axis::Z, {0.0, 0.0, 0.20}},
        {Axis::Y, {0.40, 0.0, 0.0}},
        {Axis::Y, {0.35, 0.0, 0.0}},
        {Axis::X, {0.0, 0.10, 0.0}},
        {Axis::Y, {0.10, 0.0, 0.0}},
        {Axis::Z, {0.05, 0.0, 0.0}},
    }};
    return c;
}

Eigen::Matrix3d axis_rotation(Axis axis, double q) {
    const double cq = std::cos(q), sq = std::sin(q);
    Eigen::Matrix3d R;
    switch (axis) {
    case Axis::X:
        R << 1, 0, 0, 0, cq, -sq, 0, sq, cq;
        return R;
    case Axis::Y:
        R << cq, 0, sq, 0, 1, 0, -sq, 0, cq;
        return R;
    case Axis::Z:
        R << cq, -sq, 0, sq, cq, 0, 0, 0, 1;
        return R;
    }
    throw std::invalid_argument("bad axis");
}

Eigen::Vector3d axis_vector(Axis axis) {
    switch (axis) {
    case Axis::X: return {1, 0, 0};
    case Axis::Y: return {0, 1, 0};
    case Axis::Z: return {0, 0, 1};
    }
    throw std::invalid_argument("bad axis");
}

} // namespace

void RobotArmConfig::validate() const {
    require(timesteps >= 2, "robot trajectory needs at least two timesteps");
    require(radius > 0, "robot circle radius must be positive");
    require(noise_std >= 0, "robot noise std must be nonnegative");
    require(validation_count >= 2, "robot validation trajectory needs at least two timesteps");
    require(ik_damping > 0 && ik_max_iters >= 1, "bad IK parameters");
}

Eigen::Vector3d robot_fk(const Vector& q) {
    require(q.size() == kRobotDof, "robot_fk: expected 6 joint angles");
    Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    for (int i = 0; i < kRobotDof; ++i) {
        R = R * axis_rotation(chain()[static_cast<std::size_t>(i)].axis, q[i]);
        p += R * chain()[static_cast<std::size_t>(i)].offset;
    }
    return p;
}

Matrix robot_position_jacobian(const Vector& q) {
    require(q.size() == kRobotDof, "robot_position_jacobian: expected 6 joint angles");
    // joint origins and world axes from a forward sweep
    std::array<Eigen::Vector3d, kRobotDof> origin, axis;
    Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    for (int i = 0; i < kRobotDof; ++i) {
        origin[static_cast<std::size_t>(i)] = p;
        axis[static_cast<std::size_t>(i)] =
            R * axis_vector(chain()[static_cast<std::size_t>(i)].axis);
        R = R * axis_rotation(chain()[static_cast<std::size_t>(i)].axis, q[i]);
        p += R * chain()[static_cast<std::size_t>(i)].offset;
    }
    Matrix J(3, kRobotDof);
    for (int i = 0; i < kRobotDof; ++i)
        J.col(i) = axis[static_cast<std::size_t>(i)].cross(
            (p - origin[static_cast<std::size_t>(i)]).eval());
    return J;
}

Vector robot_home_posture() {
    Vector q(kRobotDof);
    q << 0.0, 0.55, 0.75, 0.1, 0.35, 0.1;
    return q;
}

Vector robot_ik(const Eigen::Vector3d& target, const Vector& q_init, const RobotArmConfig& cfg) {
    Vector q = q_init;
    const Vector q_home = robot_home_posture();
    const double damp2 = cfg.ik_damping * cfg.ik_damping;
    constexpr double kNullspaceGain = 0.05;
    constexpr double kMaxStep = 0.5;
    for (int it = 0; it < cfg.ik_max_iters; ++it) {
        const Eigen::Vector3d e = target - robot_fk(q);
        if (e.norm() < 1e-10) return q;
        Matrix J = robot_position_jacobian(q);
        Eigen::Matrix3d JJt = (J * J.transpose()).eval();
        JJt.diagonal().array() += damp2;
        const Eigen::Vector3d y = JJt.ldlt().solve(e);
        Vector dq = J.transpose() * y;
        // weak posture pull projected onto the nullspace to anchor the
        // redundant directions (keeps closed target loops closed in q)
        Vector bias = kNullspaceGain * (q_home - q);
        const Eigen::Vector3d yb = JJt.ldlt().solve((J * bias).eval());
        dq += bias - J.transpose() * yb;
        const double norm = dq.norm();
        if (norm > kMaxStep) dq *= kMaxStep / norm;
        q += dq;
    }
    const double resid = (target - robot_fk(q)).norm();
    if (resid > 1e-6)
        throw NumericError("robot_ik: residual " + std::to_string(resid) +
                           " m after iteration budget (unreachable target?)");
    return q;
}

namespace {

Dataset trace_circle(const RobotArmConfig& cfg, Index steps, Rng noise_rng) {
    Dataset ds;
    ds.samples.resize(steps, kRobotDof);
    ds.annotation_names = {"timestep", "alpha", "px", "py", "pz"};
    ds.annotations.resize(steps, 5);
    Vector q = robot_home_posture();
    for (Index t = 0; t < steps; ++t) {
        const double alpha =
            2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(steps - 1);
        Eigen::Vector3d target(cfg.center_x + cfg.radius * std::cos(alpha),
                               cfg.center_y + cfg.radius * std::sin(alpha), cfg.center_z);
        q = robot_ik(target, q, cfg);
        ds.samples.row(t) = q.transpose();
        ds.annotations(t, 0) = static_cast<double>(t);
        ds.annotations(t, 1) = alpha;
        ds.annotations(t, 2) = target.x();
        ds.annotations(t, 3) = target.y();
        ds.annotations(t, 4) = target.z();
    }
    if (cfg.noise_std > 0.0) {
        for (Index t = 0; t < steps; ++t)
            for (Index j = 0; j < kRobotDof; ++j)
                ds.samples(t, j) += cfg.noise_std * noise_rng.normal();
    }
    return ds;
}

} // namespace

std::pair<Dataset, Dataset> robot_generate(const RobotArmConfig& cfg) {
    cfg.validate();
    Rng root(cfg.rng_seed);
    Dataset train = trace_circle(cfg, cfg.timesteps, root.substream("train-noise"));
    Dataset valid = trace_circle(cfg, cfg.validation_count, root.substream("valid-noise"));
    const Json config_echo = {{"timesteps", cfg.timesteps},
                              {"radius", cfg.radius},
                              {"center", {cfg.center_x, cfg.center_y, cfg.center_z}},
                              {"noise_std", cfg.noise_std},
                              {"validation_count", cfg.validation_count},
                              {"ik_damping", cfg.ik_damping},
                              {"ik_max_iters", cfg.ik_max_iters}};
    train.provenance = {{"generator", "robot"},
                        {"split", "train"},
                        {"seed", cfg.rng_seed},
                        {"config", config_echo}};
    valid.provenance = {{"generator", "robot"},
                        {"split", "validation"},
                        {"seed", cfg.rng_seed},
                        {"config", config_echo}};
    return {std::move(train), std::move(valid)};
}

} // namespace latgeo
