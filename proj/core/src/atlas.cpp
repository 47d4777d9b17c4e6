#include "magswim/atlas.hpp"
#include "magswim/stability.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace magswim::atlas {

using std::numbers::pi;

double wrap_angle(double t)
{
    constexpr double tau = 2.0 * pi;
    t = std::fmod(t + pi, tau);
    if (t <= 0.0) t += tau;
    return t - pi;
}

double g_factor(const PDecomposition& dec, double theta)
{
    const double c = std::cos(theta) / dec.sigma1, s = std::sin(theta) / dec.sigma2;
    return 1.0 / std::sqrt(c * c + s * s);
}

SurfacePoint surface(const PDecomposition& dec, double theta, double phi)
{
    const double ct = std::cos(theta), st = std::sin(theta);
    const double g = g_factor(dec, theta);
    const double k = dec.c01 * ct / dec.sigma1 + dec.c02 * st / dec.sigma2;
    const double l = dec.c11 * (ct * ct / (dec.sigma1 * dec.sigma1) - st * st / (dec.sigma2 * dec.sigma2)) +
                     dec.c12 * ct * st / (dec.sigma1 * dec.sigma2);
    const double sp = std::sin(phi);
    return {theta, phi, sp * g, std::cos(phi) * k + sp * g * l};
}

Vec3 e3_of(const PDecomposition& dec, double theta)
{
    return std::cos(theta) * dec.eta1 + std::sin(theta) * dec.eta2;
}

Vec3 B_of(const PDecomposition& dec, double theta, double phi)
{
    const double g = g_factor(dec, theta);
    return std::cos(phi) * dec.beta0 +
           std::sin(phi) * g * (std::cos(theta) / dec.sigma1 * dec.beta1 + std::sin(theta) / dec.sigma2 * dec.beta2);
}

Equilibrium eval_chart(const PDecomposition& dec, double theta, double phi)
{
    Equilibrium eq;
    const SurfacePoint sp = surface(dec, theta, phi);
    eq.theta = theta;
    eq.phi = phi;
    eq.Ma = sp.Ma;
    eq.cos_psi = sp.cos_psi;
    eq.e3 = e3_of(dec, theta);
    eq.B = B_of(dec, theta, phi);
    eq.v_ax = eq.Ma * eq.e3.dot(dec.Ch * eq.e3);
    eq.eigenvalues = numerics::eig3(stability::linearize(dec, eq));
    const stability::Index idx = stability::stability_index(eq.eigenvalues);
    eq.index = idx.stable_directions;
    eq.marginal = idx.marginal;
    return eq;
}

numerics::TrigPoly4 equilibrium_polynomial(const PDecomposition& dec, double Ma, double cos_psi)
{
    const double s1 = dec.sigma1, s2 = dec.sigma2;
    return numerics::fit_trig_poly4([&](double t) {
        const double ct = std::cos(t), st = std::sin(t);
        const double ginv2 = ct * ct / (s1 * s1) + st * st / (s2 * s2);
        const double k = dec.c01 * ct / s1 + dec.c02 * st / s2;
        const double l = dec.c11 * (ct * ct / (s1 * s1) - st * st / (s2 * s2)) + dec.c12 * ct * st / (s1 * s2);
        const double r = Ma * l - cos_psi;
        return r * r + (Ma * Ma * ginv2 - 1.0) * k * k;
    });
}

std::vector<Equilibrium> solve_equilibria(const PDecomposition& dec, double Ma, double cos_psi)
{
    if (!(Ma >= 0.0)) throw std::invalid_argument("solve_equilibria: Ma must be nonnegative");
    std::vector<Equilibrium> out;
    if (Ma > dec.sigma1 * (1.0 + 1e-12)) return out;

    const numerics::TrigPoly4 poly = equilibrium_polynomial(dec, Ma, cos_psi);
    const numerics::TrigRoots roots = numerics::trig_poly_roots(poly);
    if (roots.identically_zero) return out;
    const double scale = poly.scale();

    for (std::size_t i = 0; i < roots.roots.size(); ++i) {
        const double theta = roots.roots[i];
        const double g = g_factor(dec, theta);
        double sphi = Ma / g;
        if (sphi > 1.0 + 1e-9) continue;
        sphi = std::min(sphi, 1.0);
        const double cphi = std::sqrt(std::max(0.0, 1.0 - sphi * sphi));
        const bool near_fold = roots.degenerate[i] || std::abs(poly.derivative(theta)) < 1e-7 * scale;
        const double cands[2] = {std::atan2(sphi, cphi), std::atan2(sphi, -cphi)};
        for (int k = 0; k < 2; ++k) {
            if (k == 1 && cphi == 0.0) break;
            const double phi = cands[k];
            if (std::abs(surface(dec, theta, phi).cos_psi - cos_psi) >= 1e-9) continue;
            bool dup = false;
            for (const auto& e : out)
                if (std::abs(wrap_angle(e.theta - theta)) < 1e-9 && std::abs(e.phi - phi) < 1e-9) dup = true;
            if (dup) continue;
            Equilibrium eq = eval_chart(dec, theta, phi);
            eq.near_fold = near_fold;
            out.push_back(eq);
        }
    }
    return out;
}

std::pair<double, double> symmetric_pair(double theta, double phi)
{
    return {wrap_angle(theta + pi), pi - phi};
}

namespace {

double arccot(double x)
{
    return pi / 2 - std::atan(x);
}

}  // namespace

IntersectionFamilies self_intersections(const PDecomposition& dec, int samples)
{
    IntersectionFamilies fam;
    if (dec.degenerate) {
        fam.notices.push_back("degenerate singular values: intersection families omitted");
        return fam;
    }
    samples = std::max(samples, 3);
    const double coef_scale = std::max({std::abs(dec.c01), std::abs(dec.c02), std::abs(dec.c11), std::abs(dec.c12)});
    const double eps = 1e-12 * coef_scale;

    auto theta_at = [&](int i) { return -pi + 2.0 * pi * (i + 1) / samples; };
    if (std::abs(dec.c02) > eps) {
        Curve c{"theta_mirror", {}};
        for (int i = 0; i < samples; ++i) {
            const double t = theta_at(i);
            c.points.push_back({t, arccot(-dec.c12 * std::cos(t) / (dec.c02 * dec.sigma1) * g_factor(dec, t))});
        }
        fam.theta_mirror.push_back(std::move(c));
    } else {
        fam.notices.push_back("c02 vanishes: theta -> -theta family omitted");
    }
    if (std::abs(dec.c01) > eps) {
        Curve c{"theta_supplement", {}};
        for (int i = 0; i < samples; ++i) {
            const double t = theta_at(i);
            c.points.push_back({t, arccot(-dec.c12 * std::sin(t) / (dec.c01 * dec.sigma2) * g_factor(dec, t))});
        }
        fam.theta_supplement.push_back(std::move(c));
    } else {
        fam.notices.push_back("c01 vanishes: theta -> pi - theta family omitted");
    }
    if (std::isfinite(dec.theta0)) {
        for (double t : {dec.theta0, dec.theta0 + pi, dec.theta0 - pi}) {
            if (!(t > -pi && t <= pi)) continue;
            Curve c{"theta0", {}};
            for (int i = 0; i < samples; ++i) c.points.push_back({t, pi * i / (samples - 1)});
            fam.theta0_lines.push_back(std::move(c));
        }
    }
    Curve eqtr{"equator", {}};
    for (int i = 0; i < samples; ++i) eqtr.points.push_back({theta_at(i), pi / 2});
    fam.equator.push_back(std::move(eqtr));
    return fam;
}

ChartRanges chart_ranges(const PDecomposition& dec, int resolution)
{
    ChartRanges r;
    r.max_Ma = dec.sigma1;
    const double b0e0 = dec.beta0.dot(dec.eta0);
    r.low_Ma_half_width = std::sqrt(std::max(0.0, 1.0 - b0e0 * b0e0));

    const int n = std::max(resolution, 8);
    double lo = 1e300, hi = -1e300;
    double lo_t = 0, lo_p = 0, hi_t = 0, hi_p = 0;
    for (int i = 0; i < n; ++i) {
        const double t = -pi + 2.0 * pi * i / n;
        for (int j = 0; j <= n; ++j) {
            const double p = pi * j / n;
            const double c = surface(dec, t, p).cos_psi;
            if (c < lo) { lo = c; lo_t = t; lo_p = p; }
            if (c > hi) { hi = c; hi_t = t; hi_p = p; }
        }
    }
    // Compass search from the best grid points.
    auto refine = [&](double t, double p, double sign) {
        double best = sign * surface(dec, t, p).cos_psi;
        double h = 2.0 * pi / n;
        while (h > 1e-12) {
            bool moved = false;
            const double dirs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
            for (const auto& d : dirs) {
                const double tt = t + h * d[0];
                const double pp = std::clamp(p + h * d[1], 0.0, pi);
                const double v = sign * surface(dec, tt, pp).cos_psi;
                if (v > best) { best = v; t = tt; p = pp; moved = true; }
            }
            if (!moved) h *= 0.5;
        }
        return sign * best;
    };
    r.cos_psi_min = refine(lo_t, lo_p, -1.0);
    r.cos_psi_max = refine(hi_t, hi_p, +1.0);
    return r;
}

void write_chart_csv(std::ostream& os, const PDecomposition& dec, int n_theta, int n_phi)
{
    os << "theta,phi,Ma,cos_psi,v_ax,index\n";
    os << std::setprecision(12);
    for (int i = 0; i < n_theta; ++i) {
        const double t = -pi + 2.0 * pi * (i + 0.5) / n_theta;
        for (int j = 0; j < n_phi; ++j) {
            const double p = pi * (j + 0.5) / n_phi;
            const Equilibrium e = eval_chart(dec, t, p);
            os << t << ',' << p << ',' << e.Ma << ',' << e.cos_psi << ',' << e.v_ax << ',' << e.index << '\n';
        }
    }
}

void write_intersections_csv(std::ostream& os, const IntersectionFamilies& fam)
{
    os << "family,curve,theta,phi\n";
    os << std::setprecision(12);
    auto dump = [&](const std::vector<Curve>& cs) {
        for (std::size_t k = 0; k < cs.size(); ++k)
            for (const auto& [t, p] : cs[k].points) os << cs[k].label << ',' << k << ',' << t << ',' << p << '\n';
    };
    dump(fam.theta_mirror);
    dump(fam.theta_supplement);
    dump(fam.theta0_lines);
    dump(fam.equator);
}

}  // namespace magswim::atlas
