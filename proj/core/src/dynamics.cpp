#include "magswim/dynamics.hpp"
#include "magswim/parallel.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace magswim::dynamics {

namespace odeint = boost::numeric::odeint;
using std::numbers::pi;

Mat3 rotation_of(const Vec4& q)
{
    const double q1 = q(0), q2 = q(1), q3 = q(2), q4 = q(3);
    Mat3 Q;
    Q << q1 * q1 - q2 * q2 - q3 * q3 + q4 * q4, 2 * (q1 * q2 - q3 * q4), 2 * (q1 * q3 + q2 * q4),
        2 * (q1 * q2 + q3 * q4), -q1 * q1 + q2 * q2 - q3 * q3 + q4 * q4, 2 * (q2 * q3 - q1 * q4),
        2 * (q1 * q3 - q2 * q4), 2 * (q2 * q3 + q1 * q4), -q1 * q1 - q2 * q2 + q3 * q3 + q4 * q4;
    return Q / q.squaredNorm();
}

Eigen::Matrix<double, 3, 4> f_matrix(const Vec4& q)
{
    Eigen::Matrix<double, 3, 4> F;
    F << q(3), -q(2), q(1), -q(0),
         q(2), q(3), -q(0), -q(1),
        -q(1), q(0), q(3), -q(2);
    return F;
}

Vec4 canonical(const Vec4& q)
{
    for (int k : {3, 0, 1, 2}) {
        if (q(k) > 0.0) return q;
        if (q(k) < 0.0) return -q;
    }
    return q;
}

Vec4 quaternion_of(const Mat3& Q)
{
    const Eigen::Quaterniond e(Q);
    return canonical(Vec4(e.x(), e.y(), e.z(), e.w()).normalized());
}

Vec3 field_direction(double cos_psi)
{
    const double c = std::clamp(cos_psi, -1.0, 1.0);
    return {std::sqrt(1.0 - c * c), 0.0, c};
}

Vec4 equilibrium_quaternion(const Vec3& e3, const Vec3& B, double cos_psi)
{
    // Columns: images of e_x, e_y, e_z. B = sin(psi) ex + cos(psi) e3.
    const double sp = std::sqrt(std::max(0.0, 1.0 - cos_psi * cos_psi));
    Vec3 ex;
    if (sp > 1e-12) {
        ex = (B - cos_psi * e3) / sp;
    } else {
        ex = e3.unitOrthogonal();
    }
    ex = (ex - ex.dot(e3) * e3).normalized();
    Mat3 Q;
    Q.col(0) = ex;
    Q.col(1) = e3.cross(ex);
    Q.col(2) = e3;
    return quaternion_of(Q);
}

Vec4 equilibrium_quaternion(const atlas::Equilibrium& eq)
{
    return equilibrium_quaternion(eq.e3, eq.B, eq.cos_psi);
}

Vec3 mismatch(const PDecomposition& dec, const Vec4& q, double Ma, double cos_psi)
{
    const Mat3 Q = rotation_of(q);
    return Ma * Q.col(2) - dec.P * (Q * field_direction(cos_psi));
}

Vec4 rhs_uncorrected(const PDecomposition& dec, const Vec4& q, double Ma, double cos_psi)
{
    return 0.5 * f_matrix(q).transpose() * mismatch(dec, q, Ma, cos_psi);
}

Vec4 rhs(const PDecomposition& dec, const Vec4& q, double Ma, double cos_psi)
{
    return rhs_uncorrected(dec, q, Ma, cos_psi) - 0.5 * (q.squaredNorm() - 1.0) * q;
}

double geodesic_distance(const Vec4& a, const Vec4& b)
{
    const Vec4 ua = a.normalized();
    Vec4 ub = b.normalized();
    if (ua.dot(ub) < 0.0) ub = -ub;
    return 4.0 * std::atan2((ua - ub).norm(), (ua + ub).norm());
}

namespace {

using State4 = std::array<double, 4>;
using State7 = std::array<double, 7>;

Vec4 q_of(const double* s) { return {s[0], s[1], s[2], s[3]}; }

void check_tol(double tol)
{
    if (!(tol >= 1e-12 && tol <= 1e-6)) throw std::invalid_argument("integrator tolerance must lie in [1e-12, 1e-6]");
}

// Drives a dense-output DP5(4) stepper from t0 to t_end. on_step(t, state) is called after every accepted step
// and may return false to stop; on_output(t, state) is called at requested output times.
template <class State, class System, class OnStep, class OnOutput>
std::string drive(System sys, State x, double t0, double t_end, double tol, double output_dt, std::size_t max_steps,
                  OnStep&& on_step, OnOutput&& on_output, std::size_t& steps)
{
    auto stepper = odeint::make_dense_output(tol, tol, odeint::runge_kutta_dopri5<State>());
    stepper.initialize(x, t0, std::min(1e-2, t_end - t0));
    on_output(t0, x);
    double next_out = output_dt > 0.0 ? t0 + output_dt : t_end;
    State buf;
    double last_out = t0;
    steps = 0;
    try {
        while (stepper.current_time() < t_end) {
            if (steps >= max_steps) return "step budget exhausted";
            stepper.do_step(sys);
            ++steps;
            const double t = stepper.current_time();
            if (output_dt > 0.0) {
                while (next_out <= std::min(t, t_end) + 1e-12 * std::abs(next_out)) {
                    stepper.calc_state(next_out, buf);
                    on_output(next_out, buf);
                    last_out = next_out;
                    next_out += output_dt;
                }
            }
            if (t >= t_end) {
                if (output_dt <= 0.0 || last_out < t_end - 1e-12 * std::abs(t_end)) {
                    stepper.calc_state(t_end, buf);
                    on_output(t_end, buf);
                }
                break;
            }
            if (output_dt <= 0.0) on_output(t, stepper.current_state());
            if (!on_step(t, stepper.current_state())) break;
            if (stepper.current_time_step() < 1e-14 * std::max(1.0, std::abs(t))) return "step-size underflow";
        }
    } catch (const std::exception& e) {
        return std::string("step-size underflow: ") + e.what();
    }
    return {};
}

}  // namespace

Trajectory integrate_orientation(const PDecomposition& dec, const Vec4& q0, double Ma, double cos_psi, double t_end,
                                 double tol, const IntegrateOptions& opt)
{
    check_tol(tol);
    if (q0.squaredNorm() == 0.0) throw std::invalid_argument("integrate_orientation: q0 must be nonzero");
    Trajectory tr;
    auto sys = [&](const State4& s, State4& ds, double) {
        const Vec4 d = rhs(dec, q_of(s.data()), Ma, cos_psi);
        for (int k = 0; k < 4; ++k) ds[k] = d(k);
    };
    int quiet = 0;
    auto on_step = [&](double t, const State4& s) {
        const Vec4 q = q_of(s.data());
        tr.max_norm_drift = std::max(tr.max_norm_drift, std::abs(q.norm() - 1.0));
        if (!opt.stop_at_steady) return true;
        quiet = mismatch(dec, q, Ma, cos_psi).norm() < opt.steady_tol ? quiet + 1 : 0;
        if (quiet >= opt.steady_steps) {
            tr.steady = true;
            tr.t_steady = t;
            tr.samples.push_back({t, q, Vec3::Zero()});
            return false;
        }
        return true;
    };
    auto on_output = [&](double t, const State4& s) {
        const Vec4 q = q_of(s.data());
        tr.max_norm_drift = std::max(tr.max_norm_drift, std::abs(q.norm() - 1.0));
        tr.samples.push_back({t, q, Vec3::Zero()});
    };
    State4 x{q0(0), q0(1), q0(2), q0(3)};
    tr.error = drive(sys, x, 0.0, t_end, tol, opt.output_dt, opt.max_steps, on_step, on_output, tr.steps);
    return tr;
}

Trajectory integrate_full(const PDecomposition& dec, const Vec4& q0, const Vec3& x0, double Ma, double cos_psi,
                          double t_end, double tol, const IntegrateOptions& opt)
{
    check_tol(tol);
    if (q0.squaredNorm() == 0.0) throw std::invalid_argument("integrate_full: q0 must be nonzero");
    Trajectory tr;
    const Vec3 b = field_direction(cos_psi);
    const Mat3 Mm = dec.M12 * skew(dec.m);
    auto sys = [&](const State7& s, State7& ds, double t) {
        const Vec4 q = q_of(s.data());
        const Vec4 d = rhs(dec, q, Ma, cos_psi);
        const Mat3 Q = rotation_of(q);
        const Vec3 v_rot = Q.transpose() * (Mm * (Q * b));
        const double c = std::cos(Ma * t), sn = std::sin(Ma * t);
        for (int k = 0; k < 4; ++k) ds[k] = d(k);
        ds[4] = c * v_rot(0) - sn * v_rot(1);
        ds[5] = sn * v_rot(0) + c * v_rot(1);
        ds[6] = v_rot(2);
    };
    int quiet = 0;
    auto push = [&](double t, const State7& s) {
        const Vec4 q = q_of(s.data());
        tr.max_norm_drift = std::max(tr.max_norm_drift, std::abs(q.norm() - 1.0));
        tr.samples.push_back({t, q, Vec3(s[4], s[5], s[6])});
    };
    auto on_step = [&](double t, const State7& s) {
        const Vec4 q = q_of(s.data());
        tr.max_norm_drift = std::max(tr.max_norm_drift, std::abs(q.norm() - 1.0));
        if (!opt.stop_at_steady) return true;
        quiet = mismatch(dec, q, Ma, cos_psi).norm() < opt.steady_tol ? quiet + 1 : 0;
        if (quiet >= opt.steady_steps) {
            tr.steady = true;
            tr.t_steady = t;
            push(t, s);
            return false;
        }
        return true;
    };
    State7 x{q0(0), q0(1), q0(2), q0(3), x0(0), x0(1), x0(2)};
    tr.error = drive(sys, x, 0.0, t_end, tol, opt.output_dt, opt.max_steps, on_step, push, tr.steps);
    return tr;
}

HelixDescriptor helix_of(const PDecomposition& dec, const atlas::Equilibrium& eq)
{
    const Vec3 che = dec.Ch * eq.e3;
    HelixDescriptor h;
    h.axis = Vec3::UnitZ();
    h.pitch = 2.0 * pi * eq.e3.dot(che);
    h.radius = eq.e3.cross(che).norm();
    h.v_ax = eq.Ma * eq.e3.dot(che);
    return h;
}

HelixDescriptor fit_helix(const std::vector<SimState>& samples, double Ma)
{
    // x = cx + a cos(Ma t) - b sin(Ma t), y = cy + a sin(Ma t) + b cos(Ma t), z = cz + v t
    const auto n = static_cast<Eigen::Index>(samples.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3 * n, 6);
    Eigen::VectorXd y(3 * n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto& s = samples[static_cast<std::size_t>(k)];
        const double c = std::cos(Ma * s.t), sn = std::sin(Ma * s.t);
        A.row(3 * k) << 1, 0, c, -sn, 0, 0;
        A.row(3 * k + 1) << 0, 1, sn, c, 0, 0;
        A.row(3 * k + 2) << 0, 0, 0, 0, 1, s.t;
        y.segment<3>(3 * k) = s.x;
    }
    const Eigen::VectorXd p = A.colPivHouseholderQr().solve(y);
    HelixDescriptor h;
    h.radius = std::hypot(p(2), p(3));
    h.v_ax = p(5);
    h.pitch = 2.0 * pi * p(5) / Ma;
    return h;
}

Vec4 random_orientation(std::uint64_t seed, std::uint64_t index)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    std::mt19937_64 gen(seq);
    std::normal_distribution<double> normal;
    Vec4 q;
    do {
        for (int k = 0; k < 4; ++k) q(k) = normal(gen);
    } while (q.norm() < 1e-8);
    return q.normalized();
}

BasinResult basin_from(const PDecomposition& dec, double Ma, double cos_psi, const std::vector<Vec4>& q0s,
                       const BasinOptions& opt)
{
    BasinResult res;
    const auto all = atlas::solve_equilibria(dec, Ma, cos_psi);
    std::vector<Vec4> all_q, stable_q;
    for (const auto& e : all) {
        all_q.push_back(equilibrium_quaternion(e));
        if (e.index == 3 && !e.marginal) {
            res.stable.push_back(e);
            stable_q.push_back(all_q.back());
        }
    }
    res.samples.resize(q0s.size());
    std::vector<double> drift(q0s.size(), 0.0);
    IntegrateOptions io;
    io.output_dt = opt.t_end;  // only the endpoints are kept
    io.stop_at_steady = true;
    parallel_for(q0s.size(), opt.threads, [&](std::size_t i) {
        BasinSample& s = res.samples[i];
        s.q0 = q0s[i];
        const Trajectory tr = integrate_orientation(dec, q0s[i], Ma, cos_psi, opt.t_end, opt.tol, io);
        drift[i] = tr.max_norm_drift;
        const Vec4 qf = tr.samples.back().q;
        double best = 1e300;
        int k_best = -1;
        for (std::size_t k = 0; k < stable_q.size(); ++k) {
            const double d = geodesic_distance(qf, stable_q[k]);
            if (d < best) { best = d; k_best = static_cast<int>(k); }
        }
        double nearest_any = 1e300;
        for (const auto& qa : all_q) nearest_any = std::min(nearest_any, geodesic_distance(qf, qa));
        s.distance = best;
        if (k_best >= 0 && best < opt.match_tol) {
            s.attractor = k_best;
            s.t_converge = tr.steady ? tr.t_steady : tr.samples.back().t;
        } else if (nearest_any > opt.periodic_gap) {
            s.attractor = attractor_periodic;
            s.t_converge = tr.samples.back().t;
        } else {
            s.attractor = attractor_unconverged;
            s.t_converge = tr.samples.back().t;
        }
    });
    for (double d : drift) res.max_norm_drift = std::max(res.max_norm_drift, d);
    return res;
}

BasinResult basin_sample(const PDecomposition& dec, double Ma, double cos_psi, std::size_t n, std::uint64_t seed,
                         const BasinOptions& opt)
{
    if (n < 1) throw std::invalid_argument("basin_sample: n must be at least 1");
    std::vector<Vec4> q0s(n);
    for (std::size_t i = 0; i < n; ++i) q0s[i] = random_orientation(seed, i);
    return basin_from(dec, Ma, cos_psi, q0s, opt);
}

Schedule make_schedule(double Ma0, double cos_psi0, double rate_bound)
{
    Schedule s;
    s.rate_bound = rate_bound;
    s.waypoints.push_back({0.0, Ma0, cos_psi0});
    return s;
}

Schedule& Schedule::ramp_to(double Ma, double cos_psi, double hold)
{
    if (waypoints.empty()) throw std::logic_error("Schedule::ramp_to: schedule has no start point");
    const Waypoint& w = waypoints.back();
    const double delta = std::max(std::abs(Ma - w.Ma), std::abs(cos_psi - w.cos_psi));
    const double dur = std::max(delta / rate_bound, 1e-9);
    waypoints.push_back({w.t + dur, Ma, cos_psi});
    if (hold > 0.0) waypoints.push_back({w.t + dur + hold, Ma, cos_psi});
    return *this;
}

void Schedule::validate() const
{
    if (waypoints.empty()) throw std::invalid_argument("schedule: no waypoints");
    for (std::size_t k = 1; k < waypoints.size(); ++k) {
        const Waypoint &a = waypoints[k - 1], &b = waypoints[k];
        if (!(b.t > a.t)) throw std::invalid_argument("schedule: waypoint times must increase strictly");
        const double dt = b.t - a.t;
        const double rate = std::max(std::abs(b.Ma - a.Ma), std::abs(b.cos_psi - a.cos_psi)) / dt;
        if (rate > rate_bound * (1.0 + 1e-9)) throw std::invalid_argument("schedule: rate bound exceeded");
        if (b.Ma < 0.0 || std::abs(b.cos_psi) > 1.0) throw std::invalid_argument("schedule: parameters out of range");
    }
}

std::pair<double, double> Schedule::at(double t) const
{
    if (t <= waypoints.front().t) return {waypoints.front().Ma, waypoints.front().cos_psi};
    for (std::size_t k = 1; k < waypoints.size(); ++k) {
        const Waypoint &a = waypoints[k - 1], &b = waypoints[k];
        if (t <= b.t) {
            const double s = (t - a.t) / (b.t - a.t);
            return {a.Ma + s * (b.Ma - a.Ma), a.cos_psi + s * (b.cos_psi - a.cos_psi)};
        }
    }
    return {waypoints.back().Ma, waypoints.back().cos_psi};
}

namespace {

double chart_distance(double t1, double p1, double t2, double p2)
{
    return std::hypot(atlas::wrap_angle(t1 - t2), p1 - p2);
}

}  // namespace

ScheduleResult run_schedule(const PDecomposition& dec, const Schedule& s, const Vec4& q0, const ScheduleOptions& opt)
{
    s.validate();
    check_tol(opt.tol);
    ScheduleResult res;

    auto sys = [&](const State4& x, State4& dx, double t) {
        const auto [Ma, cp] = s.at(t);
        const Vec4 d = rhs(dec, q_of(x.data()), Ma, cp);
        for (int k = 0; k < 4; ++k) dx[k] = d(k);
    };

    auto nearest = [&](const Vec4& q, double Ma, double cp) -> std::optional<TrackedEquilibrium> {
        const double ma_eval = Ma == 0.0 ? 1e-3 * dec.sigma2 : Ma;
        std::optional<TrackedEquilibrium> best;
        for (const auto& e : atlas::solve_equilibria(dec, ma_eval, cp)) {
            const double d = geodesic_distance(q, equilibrium_quaternion(e));
            if (!best || d < best->distance) best = TrackedEquilibrium{e.theta, e.phi, e.v_ax, e.index, d};
        }
        return best;
    };

    bool locked = false, stepped_out = false;
    std::optional<TrackedEquilibrium> tracked;  // last equilibrium the state was locked to
    int branch = -1, next_branch = 0;
    std::size_t next_wp = 1;

    auto check = [&](double t, const Vec4& q) {
        const auto [Ma, cp] = s.at(t);
        const auto nb = nearest(q, Ma, cp);
        if (!nb) {
            if (!stepped_out) res.events.push_back({"step_out", t, Ma, cp, std::nullopt, branch, "no relative equilibrium"});
            stepped_out = true;
            if (locked) res.events.push_back({"unlock", t, Ma, cp, tracked, branch, "existence region left"});
            locked = false;
            return;
        }
        if (stepped_out) {
            res.events.push_back({"step_in", t, Ma, cp, nb, branch, {}});
            stepped_out = false;
        }
        if (nb->distance < opt.lock_tol) {
            const bool same = tracked && chart_distance(tracked->theta, tracked->phi, nb->theta, nb->phi) < opt.same_branch;
            if (!same) {
                if (branch >= 0) {
                    ++res.jumps;
                    res.events.push_back({"jump", t, Ma, cp, nb, next_branch, "from branch " + std::to_string(branch)});
                }
                branch = next_branch++;
            }
            if (!locked) res.events.push_back({"lock", t, Ma, cp, nb, branch, {}});
            locked = true;
            tracked = nb;
        } else if (locked) {
            res.events.push_back({"unlock", t, Ma, cp, tracked, branch, {}});
            locked = false;
        }
    };

    auto on_output = [&](double t, const State4& x) {
        const Vec4 q = q_of(x.data());
        res.max_norm_drift = std::max(res.max_norm_drift, std::abs(q.norm() - 1.0));
        check(t, q);
        while (next_wp < s.waypoints.size() && s.waypoints[next_wp].t <= t + 1e-9) {
            const auto& w = s.waypoints[next_wp];
            res.events.push_back({"waypoint", t, w.Ma, w.cos_psi, nearest(q, w.Ma, w.cos_psi), locked ? branch : -1, {}});
            ++next_wp;
        }
        res.q_final = canonical(q.normalized());
    };
    auto on_step = [&](double, const State4& x) {
        res.max_norm_drift = std::max(res.max_norm_drift, std::abs(q_of(x.data()).norm() - 1.0));
        return true;
    };

    const double t0 = s.waypoints.front().t;
    State4 x{q0(0), q0(1), q0(2), q0(3)};
    std::size_t steps = 0;
    if (s.t_end() > t0)
        res.error = drive(sys, x, t0, s.t_end(), opt.tol, opt.check_dt, 50'000'000, on_step, on_output, steps);
    else
        on_output(t0, x);
    const auto [Ma, cp] = s.at(s.t_end());
    res.final_eq = nearest(res.q_final, Ma, cp);
    res.events.push_back({"final", s.t_end(), Ma, cp, res.final_eq, locked ? branch : -1, {}});
    return res;
}

}  // namespace magswim::dynamics

namespace magswim::dynamics {

LoopResult two_parameter_loop(const PDecomposition& dec, const LoopConfig& cfg)
{
    LoopResult out;
    const double ma_low = cfg.Ma_low > 0.0 ? cfg.Ma_low : 0.1 * dec.sigma2;

    Vec4 q;
    {
        const auto eqs = atlas::solve_equilibria(dec, ma_low, 0.0);
        const atlas::Equilibrium* st = nullptr;
        for (const auto& e : eqs)
            if (e.index == 3 && !e.marginal) st = &e;
        if (!st) throw std::runtime_error("two_parameter_loop: no stable equilibrium at low Ma and cos psi = 0");
        q = equilibrium_quaternion(*st);
    }
    double ma = ma_low, cp = 0.0;

    auto run = [&](int step, std::string what, auto&& build) {
        Schedule s = make_schedule(ma, cp, cfg.rate_bound);
        build(s);
        ScheduleResult r = run_schedule(dec, s, q, cfg.options);
        q = r.q_final;
        ma = s.waypoints.back().Ma;
        cp = s.waypoints.back().cos_psi;
        out.steps.push_back({step, std::move(what), std::move(r)});
        return out.steps.back().run.final_eq;
    };

    // Step 1: the loss of stability at low Ma marks the edge of I. Unlock events alone are not used:
    // relaxation is slow at low Ma and the quasi-static lag can exceed the lock tolerance.
    run(1, "probe the edge of I at low Ma", [&](Schedule& s) { s.ramp_to(ma_low, cfg.probe_max); });
    out.interval_boundary = cfg.probe_max;
    for (const auto& e : out.steps.back().run.events)
        if (e.kind == "jump" || e.kind == "step_out") {
            out.interval_boundary = e.cos_psi;
            break;
        }
    const double side_cp = cfg.side_fraction * out.interval_boundary;

    auto go_side = [&](int step, int side) {
        run(step, side > 0 ? "cos psi to the upper side of I" : "cos psi to the lower side of I",
            [&](Schedule& s) { s.ramp_to(ma_low, side * side_cp, cfg.settle); });
    };
    auto go_target = [&](int step) {
        return run(step, "raise Ma, then bring cos psi to the target", [&](Schedule& s) {
            s.ramp_to(cfg.Ma_star, cp, cfg.settle);
            s.ramp_to(cfg.Ma_star, cfg.cos_psi_star, cfg.settle);
        });
    };
    auto go_back = [&](int step) {
        run(step, "cos psi back to zero, then lower Ma", [&](Schedule& s) {
            s.ramp_to(ma, 0.0, cfg.settle);
            s.ramp_to(ma_low, 0.0, cfg.settle);
        });
    };

    go_side(2, cfg.first_side);
    const auto e3 = go_target(3);
    out.v_ax_step3 = e3 ? e3->v_ax : 0.0;
    go_back(4);
    go_side(5, -cfg.first_side);
    const auto e6 = go_target(6);
    out.v_ax_step6 = e6 ? e6->v_ax : 0.0;
    out.final_eq = e6;

    if (std::abs(out.v_ax_step3) > std::abs(out.v_ax_step6)) {
        // Step 7: the state of step 3 was faster; repeat steps 4 to 6 on the first side.
        out.returned_to_step3 = true;
        go_back(7);
        go_side(7, cfg.first_side);
        out.final_eq = go_target(7);
    } else {
        run(7, "keep the current branch", [&](Schedule& s) { s.ramp_to(ma, cp, cfg.settle); });
        out.final_eq = out.steps.back().run.final_eq;
    }
    return out;
}

}  // namespace magswim::dynamics
