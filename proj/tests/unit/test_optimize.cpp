#include "fixtures.hpp"
#include "magswim/optimize.hpp"

#include <catch_amalgamated.hpp>

#include <numbers>

using namespace magswim;
using Catch::Approx;

namespace {

double sphere_scan_max(const Mat3& M12, const Mat3& M22, int n)
{
    double best = 0.0;
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j < 2 * n; ++j) {
            const double t = std::numbers::pi * i / n, p = std::numbers::pi * j / n;
            best = std::max(best, optimize::axial_objective(M12, M22, Vec3(std::sin(t) * std::cos(p), std::sin(t) * std::sin(p), std::cos(t))));
        }
    return best;
}

double up_to_sign(const Vec3& a, const Vec3& b) { return std::min((a - b).cwiseAbs().maxCoeff(), (a + b).cwiseAbs().maxCoeff()); }

}  // namespace

TEST_CASE("canonical direction")
{
    CHECK(optimize::canonical_direction(Vec3(-1, 2, 3)) == Vec3(1, -2, -3));
    CHECK(optimize::canonical_direction(Vec3(0, -0.5, 1)) == Vec3(0, 0.5, -1));
    CHECK(optimize::canonical_direction(Vec3(0, 0, 2)) == Vec3(0, 0, 2));
}

TEST_CASE("optimal axis beats a dense sphere scan")
{
    for (const auto* d : {&fixtures::A(), &fixtures::B()}) {
        const auto opt = optimize::optimal_n(d->M12, d->M22);
        const double scan = sphere_scan_max(d->M12, d->M22, 300);
        CHECK(opt.value >= scan * (1 - 1e-12));
        CHECK(opt.value <= scan * (1 + 1e-3));
        CHECK(opt.n.norm() == Approx(1.0).margin(1e-14));
        CHECK(optimize::axial_objective(d->M12, d->M22, opt.n) == Approx(opt.value).epsilon(1e-14));
    }
}

TEST_CASE("optimal magnetisation of the swimmer shapes")
{
    struct Want {
        const char* stem;
        double v, Ma;
        Vec3 m;
    };
    const Want want[] = {
        {"swimmer_A", 9.7261e-4, 0.0333, Vec3(-0.9833, 0.0, -0.1819)},
        {"swimmer_B", 0.0223, 0.9880, Vec3(0.0, 0.9955, -0.0949)},
    };
    for (const auto& w : want) {
        INFO(w.stem);
        const auto& d = fixtures::swimmer(w.stem);
        const auto o = optimize::optimal_magnetisation(d.M12, d.M22);
        CHECK(o.hopf_found);
        CHECK(std::abs(o.v_ax_star - w.v) < 1e-3 * w.v);
        CHECK(std::abs(o.Ma_star - w.Ma) < 1e-3);
        CHECK(up_to_sign(o.m_star, w.m) < 5e-3);
        CHECK(std::abs(o.m_star.dot(o.n_star)) < 1e-12);
        CHECK(std::abs(o.cos_psi_star) < 1e-9);
    }
}

TEST_CASE("optimize_drive finds a stable maximum over the chart")
{
    const auto& d = fixtures::A();
    const auto o = optimize::optimize_drive(d, true, 120, 2);
    CHECK(o.stable);
    CHECK_FALSE(o.empty_stable_set);
    const auto e = atlas::eval_chart(d, o.theta, o.phi);
    CHECK(e.index == 3);
    double best = 0.0;
    for (int i = 0; i < 200; ++i)
        for (int j = 1; j < 100; ++j) {
            const auto p = atlas::eval_chart(d, -std::numbers::pi + 2 * std::numbers::pi * i / 200, std::numbers::pi * j / 100);
            if (p.index == 3 && !p.marginal) best = std::max(best, std::abs(p.v_ax));
        }
    CHECK(std::abs(o.v_ax) >= best * (1 - 1e-9));
    const auto all = optimize::optimize_drive(d, false, 120, 2);
    CHECK(std::abs(all.v_ax) >= std::abs(o.v_ax));
}

TEST_CASE("v_ax curves stay on the requested cone angle")
{
    const auto& d = fixtures::swimmer("morozov_122_m11r2");
    const auto c = optimize::vax_vs_ma_curve(d, 0.0, 200);
    REQUIRE_FALSE(c.branches.empty());
    for (const auto& b : c.branches)
        for (const auto& p : b) {
            const auto s = atlas::surface(d, p.theta, p.phi);
            CHECK(std::abs(s.cos_psi) < 1e-9);
            CHECK(s.Ma == Approx(p.Ma).margin(1e-12));
        }
    REQUIRE(c.extremum(true) != nullptr);
    CHECK(std::abs(c.extremum(true)->v_ax) <= std::abs(c.extremum(false)->v_ax));
    CHECK_THROWS_AS(optimize::vax_vs_ma_curve(d, 1.5), std::invalid_argument);
}
