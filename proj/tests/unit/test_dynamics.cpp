#include "fixtures.hpp"
#include "magswim/dynamics.hpp"

#include <catch_amalgamated.hpp>

#include <numbers>

using namespace magswim;
using namespace magswim::dynamics;
using Catch::Approx;

namespace {

const atlas::Equilibrium& stable_A(bool fast)
{
    static const auto eqs = atlas::solve_equilibria(fixtures::A(), 0.015, 0.01);
    const atlas::Equilibrium* best = nullptr;
    for (const auto& e : eqs)
        if (e.index == 3 && !e.marginal && (!best || (std::abs(e.v_ax) > std::abs(best->v_ax)) == fast)) best = &e;
    return *best;
}

}  // namespace

TEST_CASE("quaternion and rotation round trip")
{
    for (std::uint64_t k = 0; k < 50; ++k) {
        const Vec4 q = random_orientation(99, k);
        CHECK(q.norm() == Approx(1.0).margin(1e-15));
        const Mat3 Q = rotation_of(q);
        CHECK((Q * Q.transpose() - Mat3::Identity()).norm() < 1e-14);
        CHECK(Q.determinant() == Approx(1.0).margin(1e-14));
        CHECK(geodesic_distance(quaternion_of(Q), q) < 1e-7);
        CHECK(geodesic_distance(q, -q) == 0.0);
        // Scale invariance of the rotation.
        CHECK((rotation_of(3.0 * q) - Q).norm() < 1e-14);
    }
}

TEST_CASE("geodesic distance is the rotation angle")
{
    const Vec4 id(0, 0, 0, 1);
    for (double a : {0.0, 0.3, 1.5, 3.0}) {
        const Vec4 q(0, 0, std::sin(a / 2), std::cos(a / 2));
        CHECK(geodesic_distance(id, q) == Approx(a).margin(1e-14));
    }
}

TEST_CASE("random orientations are reproducible")
{
    CHECK(random_orientation(42, 7) == random_orientation(42, 7));
    CHECK(random_orientation(42, 7) != random_orientation(42, 8));
    CHECK(random_orientation(42, 7) != random_orientation(43, 7));
}

TEST_CASE("equilibria are fixed points of the quaternion field")
{
    for (const auto& e : atlas::solve_equilibria(fixtures::A(), 0.015, 0.01)) {
        const Vec4 q = equilibrium_quaternion(e);
        CHECK(mismatch(fixtures::A(), q, e.Ma, e.cos_psi).norm() < 1e-12);
        CHECK(rhs(fixtures::A(), q, e.Ma, e.cos_psi).norm() < 1e-12);
        const Mat3 Q = rotation_of(q);
        CHECK((Q * Vec3::UnitZ() - e.e3).norm() < 1e-12);
        CHECK((Q * field_direction(e.cos_psi) - e.B).norm() < 1e-12);
    }
}

TEST_CASE("norm correction pulls |q| back to one")
{
    const auto& d = fixtures::A();
    const Vec4 q = 1.1 * random_orientation(1, 0);
    CHECK(rhs(d, q, 0.01, 0.0).dot(q) < 0.0);
    CHECK(std::abs(rhs_uncorrected(d, q, 0.01, 0.0).dot(q)) < 1e-15);
}

TEST_CASE("integration keeps the norm and converges to a stable equilibrium")
{
    const auto& d = fixtures::A();
    const auto& e = stable_A(true);
    Vec4 q0 = equilibrium_quaternion(e);
    q0 = (q0 + 0.02 * random_orientation(5, 0)).normalized();
    IntegrateOptions o;
    o.output_dt = 10.0;
    const auto tr = integrate_orientation(d, q0, 0.015, 0.01, 20000.0, 1e-10, o);
    CHECK(tr.error.empty());
    CHECK(tr.max_norm_drift < 1e-9);
    CHECK(geodesic_distance(tr.samples.back().q, equilibrium_quaternion(e)) < 1e-6);
    CHECK(tr.samples.back().t == Approx(20000.0));
}

TEST_CASE("integrator tolerance range is enforced")
{
    const auto& d = fixtures::A();
    const Vec4 q(0, 0, 0, 1);
    CHECK_THROWS_AS(integrate_orientation(d, q, 0.01, 0.0, 1.0, 1e-13), std::invalid_argument);
    CHECK_THROWS_AS(integrate_orientation(d, q, 0.01, 0.0, 1.0, 1e-5), std::invalid_argument);
    CHECK_THROWS_AS(integrate_orientation(d, Vec4::Zero(), 0.01, 0.0, 1.0, 1e-10), std::invalid_argument);
}

TEST_CASE("lab trajectory at an equilibrium is the closed-form helix")
{
    const auto& d = fixtures::A();
    for (bool fast : {true, false}) {
        const auto& e = stable_A(fast);
        const auto h = helix_of(d, e);
        CHECK(h.v_ax == Approx(e.v_ax).epsilon(1e-12));
        IntegrateOptions o;
        o.output_dt = 2.0;
        const double period = 2 * std::numbers::pi / e.Ma;
        const auto tr = integrate_full(d, equilibrium_quaternion(e), Vec3::Zero(), e.Ma, e.cos_psi, 3 * period, 1e-12, o);
        const auto fit = fit_helix(tr.samples, e.Ma);
        CHECK(std::abs(fit.pitch - h.pitch) < 1e-6 * std::abs(h.pitch));
        CHECK(std::abs(fit.radius - h.radius) < 1e-6 * h.radius);
        CHECK(std::abs(fit.v_ax - h.v_ax) < 1e-6 * std::abs(h.v_ax));
    }
}

TEST_CASE("schedules respect the rate bound")
{
    auto s = make_schedule(0.01, 0.0, 1e-4);
    s.ramp_to(0.02, 0.05, 10.0).ramp_to(0.02, -0.05);
    CHECK_NOTHROW(s.validate());
    for (std::size_t k = 1; k < s.waypoints.size(); ++k) {
        const auto& a = s.waypoints[k - 1];
        const auto& b = s.waypoints[k];
        const double dt = b.t - a.t;
        CHECK(std::abs(b.Ma - a.Ma) <= 1e-4 * dt * (1 + 1e-12));
        CHECK(std::abs(b.cos_psi - a.cos_psi) <= 1e-4 * dt * (1 + 1e-12));
    }
    const auto [ma, cp] = s.at(s.waypoints[1].t / 2);
    CHECK(ma == Approx(0.015));
    CHECK(cp == Approx(0.025));

    Schedule bad = s;
    bad.waypoints.back().cos_psi = 0.9;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("a fold sweep at fixed Ma switches branch")
{
    const auto& d = fixtures::A();
    const auto& fast = stable_A(true);
    const auto& slow = stable_A(false);
    auto s = make_schedule(0.015, 0.01, 1e-5);
    s.ramp_to(0.015, -0.09, 500).ramp_to(0.015, 0.01, 2000);
    const auto r = run_schedule(d, s, equilibrium_quaternion(fast));
    CHECK(r.error.empty());
    CHECK(r.jumps >= 1);
    REQUIRE(r.final_eq.has_value());
    CHECK(r.final_eq->theta == Approx(slow.theta).margin(1e-3));
    CHECK(r.max_norm_drift < 1e-9);
}
