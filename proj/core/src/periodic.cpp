#include "magswim/periodic.hpp"

#include <boost/numeric/odeint.hpp>
#include <unsupported/Eigen/AutoDiff>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace magswim::periodic {

namespace odeint = boost::numeric::odeint;
using std::numbers::pi;

namespace {

using Deriv = Eigen::Matrix<double, 6, 1>;
using AD = Eigen::AutoDiffScalar<Deriv>;
using Vec4AD = Eigen::Matrix<AD, 4, 1>;
using Mat34 = Eigen::Matrix<double, 4, 6>;

// The corrected quaternion right-hand side, generic in the scalar type.
template <class T>
Eigen::Matrix<T, 4, 1> rhs_generic(const Mat3& P, const Eigen::Matrix<T, 4, 1>& q, const T& Ma, const T& cp)
{
    using std::sqrt;
    const T q1 = q(0), q2 = q(1), q3 = q(2), q4 = q(3);
    const T n2 = q.squaredNorm();
    Eigen::Matrix<T, 3, 3> Q;
    Q << q1 * q1 - q2 * q2 - q3 * q3 + q4 * q4, 2 * (q1 * q2 - q3 * q4), 2 * (q1 * q3 + q2 * q4),
        2 * (q1 * q2 + q3 * q4), -q1 * q1 + q2 * q2 - q3 * q3 + q4 * q4, 2 * (q2 * q3 - q1 * q4),
        2 * (q1 * q3 - q2 * q4), 2 * (q2 * q3 + q1 * q4), -q1 * q1 - q2 * q2 + q3 * q3 + q4 * q4;
    Q /= n2;
    const Eigen::Matrix<T, 3, 1> b(sqrt(1 - cp * cp), T(0), cp);
    const Eigen::Matrix<T, 3, 1> u = Ma * Q.col(2) - P.cast<T>() * (Q * b);
    Eigen::Matrix<T, 3, 4> F;
    F << q4, -q3, q2, -q1,
         q3, q4, -q1, -q2,
        -q2, q1, q4, -q3;
    return T(0.5) * F.transpose() * u - T(0.5) * (n2 - T(1)) * q;
}

// Value and Jacobian with respect to (q, Ma, cos psi).
void rhs_jacobian(const Mat3& P, const Vec4& q, double Ma, double cp, Vec4& f, Mat34& J)
{
    Vec4AD qa;
    for (int k = 0; k < 4; ++k) qa(k) = AD(q(k), 6, k);
    const AD ma(Ma, 6, 4), c(cp, 6, 5);
    const Vec4AD r = rhs_generic<AD>(P, qa, ma, c);
    for (int k = 0; k < 4; ++k) {
        f(k) = r(k).value();
        J.row(k) = r(k).derivatives().transpose();
    }
}

Vec4 rhs_value(const Mat3& P, const Vec4& q, double Ma, double cp)
{
    return rhs_generic<double>(P, q, Ma, cp);
}

using VarState = std::array<double, 28>;

struct Flow {
    Vec4 q;
    Eigen::Matrix4d M;
    Eigen::Matrix<double, 4, 2> S;
    std::vector<dynamics::SimState> samples;
};

Flow flow(const PDecomposition& dec, const Vec4& q0, double Ma, double cp, double T, double tol, int n_samples)
{
    auto sys = [&](const VarState& x, VarState& dx, double) {
        const Vec4 q(x[0], x[1], x[2], x[3]);
        Vec4 f;
        Mat34 J;
        rhs_jacobian(dec.P, q, Ma, cp, f, J);
        const Eigen::Map<const Eigen::Matrix4d> Phi(x.data() + 4);
        const Eigen::Map<const Eigen::Matrix<double, 4, 2>> S(x.data() + 20);
        Eigen::Map<Eigen::Matrix4d> dPhi(dx.data() + 4);
        Eigen::Map<Eigen::Matrix<double, 4, 2>> dS(dx.data() + 20);
        for (int k = 0; k < 4; ++k) dx[k] = f(k);
        dPhi = J.leftCols<4>() * Phi;
        dS = J.leftCols<4>() * S + J.rightCols<2>();
    };
    VarState x{};
    for (int k = 0; k < 4; ++k) x[k] = q0(k);
    Eigen::Map<Eigen::Matrix4d>(x.data() + 4).setIdentity();

    const int n = std::max(n_samples, 1);
    std::vector<double> times(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) times[k] = T * k / n;
    Flow out;
    VarState last{};
    auto obs = [&](const VarState& s, double t) {
        out.samples.push_back({t, Vec4(s[0], s[1], s[2], s[3]), Vec3::Zero()});
        last = s;
    };
    odeint::integrate_times(odeint::make_dense_output(tol, tol, odeint::runge_kutta_dopri5<VarState>()), sys, x,
                            times.begin(), times.end(), std::min(1e-2, T / n), obs);
    out.q = Vec4(last[0], last[1], last[2], last[3]);
    out.M = Eigen::Map<const Eigen::Matrix4d>(last.data() + 4);
    out.S = Eigen::Map<const Eigen::Matrix<double, 4, 2>>(last.data() + 20);
    return out;
}

// Orthonormal basis of the complement of q.
Eigen::Matrix<double, 4, 3> complement(const Vec4& q)
{
    Eigen::HouseholderQR<Eigen::Matrix<double, 4, 1>> qr(q.normalized());
    const Eigen::Matrix4d H = qr.householderQ();
    return H.rightCols<3>();
}

void fill_record(PeriodicOrbit& o, const Flow& fl)
{
    o.samples = fl.samples;
    o.residual = (fl.q - o.q0).norm();
    o.closure = dynamics::geodesic_distance(fl.q, o.q0);

    // The norm direction q0 is an eigenvector of the monodromy (multiplier ~ e^-T); quotient it out.
    const Eigen::Matrix<double, 4, 3> U = complement(o.q0);
    const Mat3 Mt = U.transpose() * fl.M * U;
    const numerics::Spectrum3 sp = numerics::eig3(Mt);
    std::array<cplx, 3> mu = sp.eigenvalues;
    std::size_t k1 = 0;
    for (std::size_t k = 1; k < 3; ++k)
        if (std::abs(mu[k] - 1.0) < std::abs(mu[k1] - 1.0)) k1 = k;
    std::swap(mu[0], mu[k1]);
    if (std::abs(mu[2]) > std::abs(mu[1])) std::swap(mu[1], mu[2]);
    o.floquet = mu;
    o.trivial_error = std::abs(mu[0] - 1.0);
    o.max_nontrivial = std::max(std::abs(mu[1]), std::abs(mu[2]));
    o.stable = o.max_nontrivial < 1.0 - 1e-8;

    Vec4 mean = Vec4::Zero();
    for (const auto& s : fl.samples) mean += s.q;
    mean /= static_cast<double>(fl.samples.size());
    o.amplitude = 0.0;
    for (const auto& s : fl.samples) o.amplitude = std::max(o.amplitude, (s.q - mean).norm());
}

Vec4 phase_normal(const PDecomposition& dec, const Vec4& q, double Ma, double cp)
{
    const Vec4 f = rhs_value(dec.P, q, Ma, cp);
    const double n = f.norm();
    if (n == 0.0) throw std::runtime_error("periodic: phase condition through an equilibrium");
    return f / n;
}

bool admissible(double Ma, double cp) { return Ma > 0.0 && std::abs(cp) < 1.0; }

}  // namespace

OrbitGuess hopf_seed(const PDecomposition& dec, const stability::CurvePoint& hopf, double amplitude)
{
    if (!(hopf.lambda_i >= 1e-6))
        throw std::domain_error("hopf_seed: imaginary part below 1e-6, period unbounded; seeding refused");
    const atlas::Equilibrium e = atlas::eval_chart(dec, hopf.theta, hopf.phi);
    const Mat3 A = stability::linearize(dec, e);
    Eigen::EigenSolver<Mat3> es(A);
    int k = 0;
    for (int j = 1; j < 3; ++j)
        if (es.eigenvalues()(j).imag() > es.eigenvalues()(k).imag()) k = j;
    Vec3 v = es.eigenvectors().col(k).real();
    if (v.norm() < 1e-12) v = es.eigenvectors().col(k).imag();
    v.normalize();

    OrbitGuess g;
    g.q_eq = dynamics::equilibrium_quaternion(e);
    g.direction = (0.5 * dynamics::f_matrix(g.q_eq).transpose() * v).normalized();
    g.q0 = g.q_eq + amplitude * g.direction;
    g.T = 2.0 * pi / hopf.lambda_i;
    g.Ma = e.Ma;
    g.cos_psi = e.cos_psi;
    g.lambda_i = hopf.lambda_i;
    return g;
}

PeriodicOrbit evaluate_orbit(const PDecomposition& dec, double Ma, double cos_psi, const Vec4& q0, double T,
                             const ShootOptions& opt)
{
    PeriodicOrbit o;
    o.Ma = Ma;
    o.cos_psi = cos_psi;
    o.T = T;
    o.q0 = q0;
    fill_record(o, flow(dec, q0, Ma, cos_psi, T, opt.tol, opt.samples));
    return o;
}

PeriodicOrbit shoot_orbit(const PDecomposition& dec, double Ma, double cos_psi, const OrbitGuess& guess,
                          const ShootOptions& opt)
{
    Vec4 q = guess.q0;
    double T = guess.T;
    const Vec4 q_ref = guess.q0;
    const Vec4 n_ref = phase_normal(dec, q_ref, Ma, cos_psi);
    for (int it = 1; it <= opt.max_iter; ++it) {
        const Flow fl = flow(dec, q, Ma, cos_psi, T, opt.tol, 1);
        Eigen::Matrix<double, 5, 1> r;
        r.head<4>() = fl.q - q;
        r(4) = n_ref.dot(q - q_ref);
        Eigen::Matrix<double, 5, 5> J = Eigen::Matrix<double, 5, 5>::Zero();
        J.topLeftCorner<4, 4>() = fl.M - Eigen::Matrix4d::Identity();
        J.topRightCorner<4, 1>() = rhs_value(dec.P, fl.q, Ma, cos_psi);
        J.bottomLeftCorner<1, 4>() = n_ref.transpose();
        const Eigen::Matrix<double, 5, 1> dz = J.fullPivLu().solve(-r);
        q += dz.head<4>();
        T += dz(4);
        if (!(T > 0.0) || !dz.allFinite()) break;
        if (dz.norm() < opt.newton_tol) {
            PeriodicOrbit o = evaluate_orbit(dec, Ma, cos_psi, q, T, opt);
            o.iterations = it;
            return o;
        }
    }
    throw std::runtime_error("shoot_orbit: Newton did not converge");
}

PeriodicOrbit first_orbit(const PDecomposition& dec, const OrbitGuess& seed, double amplitude, const ShootOptions& opt)
{
    const double T = seed.T;
    const Vec4 q_ref = seed.q_eq + amplitude * seed.direction;
    const Vec4 n_ref = phase_normal(dec, q_ref, seed.Ma, seed.cos_psi);
    Vec4 q = q_ref;
    double Ma = seed.Ma, cp = seed.cos_psi;
    for (int it = 1; it <= opt.max_iter; ++it) {
        const Flow fl = flow(dec, q, Ma, cp, T, opt.tol, 1);
        Eigen::Matrix<double, 6, 1> r;
        r.head<4>() = fl.q - q;
        r(4) = n_ref.dot(q - q_ref);
        r(5) = seed.direction.dot(q - seed.q_eq) - amplitude;
        Eigen::Matrix<double, 6, 6> J = Eigen::Matrix<double, 6, 6>::Zero();
        J.topLeftCorner<4, 4>() = fl.M - Eigen::Matrix4d::Identity();
        J.topRightCorner<4, 2>() = fl.S;
        J.block<1, 4>(4, 0) = n_ref.transpose();
        J.block<1, 4>(5, 0) = seed.direction.transpose();
        const Eigen::Matrix<double, 6, 1> dz = J.fullPivLu().solve(-r);
        if (!dz.allFinite()) break;
        q += dz.head<4>();
        Ma += dz(4);
        cp += dz(5);
        if (!admissible(Ma, cp)) break;
        if (dz.norm() < opt.newton_tol) {
            PeriodicOrbit o = evaluate_orbit(dec, Ma, cp, q, T, opt);
            o.iterations = it;
            if (o.amplitude < 0.25 * amplitude) break;  // collapsed onto an equilibrium
            return o;
        }
    }
    throw std::runtime_error("first_orbit: no periodic orbit found off the Hopf point");
}

namespace {

using Vec6 = Eigen::Matrix<double, 6, 1>;

Vec6 pack(const PeriodicOrbit& o)
{
    Vec6 z;
    z << o.q0, o.Ma, o.cos_psi;
    return z;
}

Vec6 tangent(const PDecomposition& dec, const PeriodicOrbit& o, const ShootOptions& opt)
{
    const Flow fl = flow(dec, o.q0, o.Ma, o.cos_psi, o.T, opt.tol, 1);
    const Vec4 n_ref = phase_normal(dec, o.q0, o.Ma, o.cos_psi);
    Eigen::Matrix<double, 5, 6> J = Eigen::Matrix<double, 5, 6>::Zero();
    J.topLeftCorner<4, 4>() = fl.M - Eigen::Matrix4d::Identity();
    J.topRightCorner<4, 2>() = fl.S;
    J.block<1, 4>(4, 0) = n_ref.transpose();
    Eigen::JacobiSVD<Eigen::Matrix<double, 5, 6>> svd(J, Eigen::ComputeFullV);
    return svd.matrixV().col(5);
}

// Corrector for one pseudo-arclength step; returns nullopt on failure.
std::optional<PeriodicOrbit> correct(const PDecomposition& dec, const PeriodicOrbit& base, const Vec6& t, double ds,
                                     const ShootOptions& opt)
{
    const double T = base.T;
    const Vec6 zp = pack(base) + ds * t;
    const Vec4 q_ref = base.q0;
    const Vec4 n_ref = phase_normal(dec, q_ref, base.Ma, base.cos_psi);
    Vec6 z = zp;
    for (int it = 1; it <= 10; ++it) {
        const Vec4 q = z.head<4>();
        if (!admissible(z(4), z(5))) return std::nullopt;
        const Flow fl = flow(dec, q, z(4), z(5), T, opt.tol, 1);
        Vec6 r;
        r.head<4>() = fl.q - q;
        r(4) = n_ref.dot(q - q_ref);
        r(5) = t.dot(z - zp);
        Eigen::Matrix<double, 6, 6> J = Eigen::Matrix<double, 6, 6>::Zero();
        J.topLeftCorner<4, 4>() = fl.M - Eigen::Matrix4d::Identity();
        J.topRightCorner<4, 2>() = fl.S;
        J.block<1, 4>(4, 0) = n_ref.transpose();
        J.row(5) = t.transpose();
        const Vec6 dz = J.fullPivLu().solve(-r);
        if (!dz.allFinite() || dz.norm() > 10.0 * std::abs(ds) + 1e-3) return std::nullopt;
        z += dz;
        if (dz.norm() < opt.newton_tol) {
            // A corrector that lands far off the predictor has jumped to another part of the branch.
            if (!admissible(z(4), z(5)) || (z - zp).norm() > std::abs(ds)) return std::nullopt;
            PeriodicOrbit o = evaluate_orbit(dec, z(4), z(5), z.head<4>(), T, opt);
            o.iterations = it;
            if (o.residual > 1e-9) return std::nullopt;
            return o;
        }
    }
    return std::nullopt;
}

// Chart point of the equilibrium nearest to the orbit's mean orientation.
std::optional<std::pair<double, double>> nearest_equilibrium(const PDecomposition& dec, const PeriodicOrbit& o)
{
    Vec4 mean = Vec4::Zero();
    for (const auto& s : o.samples) mean += s.q;
    std::optional<std::pair<double, double>> best;
    double dmin = 1e300;
    for (const auto& e : atlas::solve_equilibria(dec, o.Ma, o.cos_psi)) {
        const double d = dynamics::geodesic_distance(mean, dynamics::equilibrium_quaternion(e));
        if (d < dmin) {
            dmin = d;
            best = std::make_pair(e.theta, e.phi);
        }
    }
    return best;
}

Branch run_branch(const PDecomposition& dec, PeriodicOrbit start, Vec6 t, const ContinuationOptions& opt,
                  const stability::CurvePoint& from)
{
    Branch br;
    br.T = start.T;
    br.start = from;
    br.orbits.push_back(start);
    double ds = opt.ds, peak = start.amplitude;
    for (int step = 0; step < opt.max_steps; ++step) {
        const PeriodicOrbit& cur = br.orbits.back();
        std::optional<PeriodicOrbit> next;
        while (!next) {
            next = correct(dec, cur, t, ds, opt.shoot);
            if (next) break;
            ds *= 0.5;
            if (ds < opt.ds_min) {
                br.reason = "step-size underflow";
                return br;
            }
        }
        Vec6 tn = tangent(dec, *next, opt.shoot);
        if (tn.dot(t) < 0.0) tn = -tn;
        t = tn;
        if (next->iterations <= 4) ds = std::min(ds * 1.5, opt.ds_max);
        br.orbits.push_back(*next);
        peak = std::max(peak, next->amplitude);

        if (next->amplitude < opt.stop_amplitude && peak > 1.5 * opt.stop_amplitude) {
            const auto eq = nearest_equilibrium(dec, *next);
            if (eq) {
                const auto hp = stability::hopf_point_with_frequency(dec, eq->first, eq->second, 2.0 * pi / br.T);
                if (hp && std::hypot(hp->Ma - next->Ma, hp->cos_psi - next->cos_psi) < opt.hopf_match &&
                    std::hypot(hp->Ma - from.Ma, hp->cos_psi - from.cos_psi) > 1e-3) {
                    br.end = hp;
                    br.complete = true;
                    br.reason = "terminal Hopf point reached";
                    return br;
                }
            }
            if (next->amplitude < 0.1 * opt.stop_amplitude) {
                br.reason = "amplitude vanished without a matching Hopf point";
                return br;
            }
        }
    }
    br.reason = "step budget exhausted";
    return br;
}

}  // namespace

Branch continue_constant_period(const PDecomposition& dec, const PeriodicOrbit& start, int direction,
                                const ContinuationOptions& opt)
{
    Vec6 t = tangent(dec, start, opt.shoot);
    if ((t(4) < 0.0) == (direction > 0)) t = -t;
    stability::CurvePoint none{0.0, 0.0, -1.0, -1.0, 0.0};
    return run_branch(dec, start, t, opt, none);
}

Branch continue_constant_period(const PDecomposition& dec, const stability::CurvePoint& hopf, int direction,
                                const ContinuationOptions& opt)
{
    const OrbitGuess seed = hopf_seed(dec, hopf);
    Branch br;
    br.start = hopf;
    br.T = seed.T;
    PeriodicOrbit first;
    try {
        first = first_orbit(dec, seed, opt.first_amplitude, opt.shoot);
    } catch (const std::exception& e) {
        br.reason = e.what();
        return br;
    }
    Vec6 t = tangent(dec, first, opt.shoot);
    if ((t.head<4>().dot(seed.direction) < 0.0) == (direction > 0)) t = -t;
    return run_branch(dec, first, t, opt, hopf);
}

void write_branch_csv(std::ostream& os, const Branch& b)
{
    os << "Ma,cos_psi,T,max_abs_multiplier,stable,trivial_error,closure,amplitude\n";
    os << std::setprecision(12);
    for (const auto& o : b.orbits)
        os << o.Ma << ',' << o.cos_psi << ',' << o.T << ',' << o.max_nontrivial << ',' << (o.stable ? 1 : 0) << ','
           << o.trivial_error << ',' << o.closure << ',' << o.amplitude << '\n';
}

void write_orbit_csv(std::ostream& os, const PeriodicOrbit& o)
{
    os << "t,q1,q2,q3,q4\n";
    os << std::setprecision(12);
    for (const auto& s : o.samples)
        os << s.t << ',' << s.q(0) << ',' << s.q(1) << ',' << s.q(2) << ',' << s.q(3) << '\n';
}

}  // namespace magswim::periodic
