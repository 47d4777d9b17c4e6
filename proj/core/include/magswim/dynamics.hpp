#pragma once

#include "magswim/atlas.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace magswim::dynamics {

/// Rotation represented by q (any nonzero norm): maps rotating-frame vectors to the body frame.
Mat3 rotation_of(const Vec4& q);
/// 3x4 matrix F(q) with qdot = F^T u / 2 for body angular velocity u.
Eigen::Matrix<double, 3, 4> f_matrix(const Vec4& q);
/// Unit quaternion of a rotation matrix, canonical sign q4 >= 0.
Vec4 quaternion_of(const Mat3& Q);
/// Canonical representative with q4 >= 0 (first nonzero component positive when q4 = 0).
Vec4 canonical(const Vec4& q);

/// (sin psi, 0, cos psi)
Vec3 field_direction(double cos_psi);

/// Quaternion whose rotation sends e_z to e3 and the field direction to B.
Vec4 equilibrium_quaternion(const Vec3& e3, const Vec3& B, double cos_psi);
Vec4 equilibrium_quaternion(const atlas::Equilibrium& eq);

/// Body-frame angular-velocity mismatch u = Ma e3 - P B; zero exactly at relative equilibria.
Vec3 mismatch(const PDecomposition& dec, const Vec4& q, double Ma, double cos_psi);
/// F^T u / 2 - (|q|^2 - 1) q / 2
Vec4 rhs(const PDecomposition& dec, const Vec4& q, double Ma, double cos_psi);
/// F^T u / 2 without the norm correction.
Vec4 rhs_uncorrected(const PDecomposition& dec, const Vec4& q, double Ma, double cos_psi);

/// Angle of the relative rotation, with q and -q identified.
double geodesic_distance(const Vec4& a, const Vec4& b);

struct SimState {
    double t = 0.0;
    Vec4 q = Vec4(0, 0, 0, 1);
    Vec3 x = Vec3::Zero();
};

struct IntegrateOptions {
    double output_dt = 0.0;       // 0 records every accepted step
    bool stop_at_steady = false;  // stop once |u| < steady_tol for steady_steps consecutive steps
    double steady_tol = 1e-10;
    int steady_steps = 10;
    std::size_t max_steps = 50'000'000;
};

struct Trajectory {
    std::vector<SimState> samples;
    std::size_t steps = 0;
    double max_norm_drift = 0.0;  // max ||q| - 1|
    bool steady = false;
    double t_steady = 0.0;
    std::string error;  // step-size underflow or step budget exhausted
};

/// Adaptive Dormand-Prince 5(4) with absolute and relative tolerance tol (in [1e-12, 1e-6]).
Trajectory integrate_orientation(const PDecomposition& dec, const Vec4& q0, double Ma, double cos_psi, double t_end,
                                 double tol, const IntegrateOptions& opt = {});

/// Orientation plus lab-frame position: xdot = R3(Ma t) Q^T M12 [m]x B.
Trajectory integrate_full(const PDecomposition& dec, const Vec4& q0, const Vec3& x0, double Ma, double cos_psi,
                          double t_end, double tol, const IntegrateOptions& opt = {});

struct HelixDescriptor {
    Vec3 axis = Vec3::UnitZ();  // lab frame
    double pitch = 0.0;
    double radius = 0.0;
    double v_ax = 0.0;
};

HelixDescriptor helix_of(const PDecomposition& dec, const atlas::Equilibrium& eq);

/// Least-squares helix fit of a lab trajectory about the z axis, for a known angular rate.
HelixDescriptor fit_helix(const std::vector<SimState>& samples, double Ma);

/// Uniform random orientation for sample `index` of stream `seed`.
Vec4 random_orientation(std::uint64_t seed, std::uint64_t index);

inline constexpr int attractor_unconverged = -1;
inline constexpr int attractor_periodic = -2;

struct BasinSample {
    Vec4 q0;
    int attractor = attractor_unconverged;  // index into stable, or one of the codes above
    double t_converge = 0.0;
    double distance = 0.0;  // angular distance to the matched equilibrium at the end
};

struct BasinResult {
    std::vector<atlas::Equilibrium> stable;
    std::vector<BasinSample> samples;
    double max_norm_drift = 0.0;
};

struct BasinOptions {
    double t_end = 5000.0;
    double tol = 1e-10;
    double match_tol = 1e-6;       // angular distance for a converged sample
    double periodic_gap = 1e-2;    // farther than this from every equilibrium at t_end: periodic
    unsigned threads = 0;
};

BasinResult basin_sample(const PDecomposition& dec, double Ma, double cos_psi, std::size_t n, std::uint64_t seed,
                         const BasinOptions& opt = {});
/// Same, with explicit initial orientations.
BasinResult basin_from(const PDecomposition& dec, double Ma, double cos_psi, const std::vector<Vec4>& q0s,
                       const BasinOptions& opt = {});

struct Waypoint {
    double t, Ma, cos_psi;
};

struct Schedule {
    std::vector<Waypoint> waypoints;  // piecewise linear, t strictly increasing
    double rate_bound = 1e-5;         // max |d(Ma, cos psi)/dt| per component

    /// Appends a ramp to (Ma, cos_psi) whose duration respects the rate bound (plus an optional hold).
    Schedule& ramp_to(double Ma, double cos_psi, double hold = 0.0);
    void validate() const;
    std::pair<double, double> at(double t) const;
    double t_end() const { return waypoints.empty() ? 0.0 : waypoints.back().t; }
};

Schedule make_schedule(double Ma0, double cos_psi0, double rate_bound);

struct TrackedEquilibrium {
    double theta = 0.0, phi = 0.0, v_ax = 0.0;
    int index = 0;
    double distance = 0.0;  // geodesic distance from the state
};

struct ScheduleEvent {
    std::string kind;  // "lock", "unlock", "jump", "step_out", "step_in", "waypoint", "final"
    double t = 0.0, Ma = 0.0, cos_psi = 0.0;
    std::optional<TrackedEquilibrium> eq;
    int branch = -1;
    std::string note;
};

struct ScheduleResult {
    std::vector<ScheduleEvent> events;
    Vec4 q_final;
    std::optional<TrackedEquilibrium> final_eq;
    int jumps = 0;
    double max_norm_drift = 0.0;
    std::string error;
};

struct ScheduleOptions {
    double tol = 1e-10;
    double check_dt = 5.0;     // spacing of the branch-tracking checks
    double lock_tol = 0.1;     // geodesic distance for "on a branch"; covers the quasi-static lag
    double same_branch = 0.3;  // chart distance that still counts as the same branch between checks
};

/// Integrates under slowly varying (Ma, cos psi) and logs branch locks, jumps and step-out.
ScheduleResult run_schedule(const PDecomposition& dec, const Schedule& s, const Vec4& q0,
                            const ScheduleOptions& opt = {});

}  // namespace magswim::dynamics

namespace magswim::dynamics {

/// The seven-step low-Ma procedure for bringing a bistable swimmer onto its faster stable branch.
struct LoopConfig {
    double Ma_star = 0.0, cos_psi_star = 0.0;  // target operating point
    double Ma_low = 0.0;                       // 0 selects 0.1 sigma2
    double probe_max = 0.5;                    // step 1 ramps cos psi from 0 towards this value
    double side_fraction = 0.6;                // step 2 sets cos psi = side_fraction * (boundary of I)
    int first_side = +1;
    double rate_bound = 1e-6;
    double settle = 2000.0;  // hold after each ramp
    ScheduleOptions options;
};

struct LoopStep {
    int step = 0;
    std::string description;
    ScheduleResult run;
};

struct LoopResult {
    std::vector<LoopStep> steps;
    double interval_boundary = 0.0;  // estimate of sup I from step 1
    double v_ax_step3 = 0.0, v_ax_step6 = 0.0;
    std::optional<TrackedEquilibrium> final_eq;
    bool returned_to_step3 = false;
};

LoopResult two_parameter_loop(const PDecomposition& dec, const LoopConfig& cfg);

}  // namespace magswim::dynamics
