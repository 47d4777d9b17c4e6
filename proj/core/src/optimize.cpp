#include "magswim/optimize.hpp"
#include "magswim/parallel.hpp"
#include "magswim/stability.hpp"

#include "contour.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>

namespace magswim::optimize {

using std::numbers::pi;

namespace {

bool is_stable(const atlas::Equilibrium& e) { return e.index == 3 && !e.marginal; }

bool near_hopf(const numerics::Spectrum3& sp)
{
    for (const cplx& l : sp.eigenvalues)
        if (l.imag() > 0.0 && std::abs(l.real()) < 1e-2 * l.imag()) return true;
    return false;
}

}  // namespace

DriveOptimum optimize_drive(const PDecomposition& dec, bool stable_only, int resolution, unsigned threads)
{
    const int nt = std::max(resolution, 8), np = std::max(resolution / 2, 4);
    struct Best { double v = -1.0, t = 0.0, p = 0.0; };
    std::vector<Best> rows(static_cast<std::size_t>(nt));
    parallel_for(rows.size(), threads, [&](std::size_t i) {
        const double t = -pi + 2.0 * pi * static_cast<double>(i) / nt;
        for (int j = 0; j <= np; ++j) {
            const double p = pi * j / np;
            const atlas::Equilibrium e = atlas::eval_chart(dec, t, p);
            if (stable_only && !is_stable(e)) continue;
            if (std::abs(e.v_ax) > rows[i].v) rows[i] = {std::abs(e.v_ax), t, p};
        }
    });
    Best best;
    for (const auto& r : rows)
        if (r.v > best.v) best = r;

    DriveOptimum out;
    if (best.v < 0.0) {
        out = optimize_drive(dec, false, resolution, threads);
        out.empty_stable_set = true;
        out.notice = "no stable equilibrium on the chart; unconstrained optimum returned";
        return out;
    }

    // Compass search; in stable mode moves must stay in the stable set.
    auto value = [&](double t, double p) {
        if (p < 0.0 || p > pi) return -1.0;
        const atlas::Equilibrium e = atlas::eval_chart(dec, t, p);
        if (stable_only && !is_stable(e)) return -1.0;
        return std::abs(e.v_ax);
    };
    double t = best.t, p = best.p, v = best.v;
    double h = pi / np;
    const double dirs[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
    while (h > 1e-12) {
        bool moved = false;
        for (const auto& d : dirs) {
            const double vv = value(t + h * d[0], p + h * d[1]);
            if (vv > v) {
                v = vv;
                t += h * d[0];
                p += h * d[1];
                moved = true;
                break;
            }
        }
        if (!moved) h *= 0.5;
    }
    const atlas::Equilibrium e = atlas::eval_chart(dec, t, p);
    out.theta = atlas::wrap_angle(t);
    out.phi = p;
    out.Ma = e.Ma;
    out.cos_psi = e.cos_psi;
    out.v_ax = e.v_ax;
    out.stable = is_stable(e);
    out.near_hopf = near_hopf(e.eigenvalues);
    if (!stable_only) out.notice = "unconstrained maxima lie on phi = pi/2";
    return out;
}

double axial_objective(const Mat3& M12, const Mat3& M22, const Vec3& n)
{
    const Vec3 u = n.normalized();
    return std::abs(u.dot(M22 * (M12 * u))) / (M22 * u).norm();
}

Vec3 canonical_direction(const Vec3& v)
{
    for (int k = 0; k < 3; ++k) {
        if (std::abs(v(k)) < 1e-12) continue;
        return v(k) > 0.0 ? v : Vec3(-v);
    }
    return v;
}

namespace {

std::vector<Vec3> fibonacci_sphere(int n)
{
    std::vector<Vec3> pts;
    pts.reserve(static_cast<std::size_t>(n));
    const double golden = pi * (1.0 + std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / n;
        const double r = std::sqrt(1.0 - z * z);
        const double a = golden * (i + 0.5);
        pts.emplace_back(r * std::cos(a), r * std::sin(a), z);
    }
    return pts;
}

// Newton on the tangent plane with central-difference gradient and Hessian, retracted by normalisation.
Vec3 refine_on_sphere(const Mat3& M12, const Mat3& M22, Vec3 n)
{
    auto f = [&](const Vec3& x) { return axial_objective(M12, M22, x); };
    double h = 1e-4;
    for (int it = 0; it < 60; ++it) {
        const Vec3 u1 = n.unitOrthogonal(), u2 = n.cross(u1);
        auto g = [&](double a, double b) { return f((n + a * u1 + b * u2).normalized()); };
        const double f0 = g(0, 0);
        Eigen::Vector2d grad((g(h, 0) - g(-h, 0)) / (2 * h), (g(0, h) - g(0, -h)) / (2 * h));
        Eigen::Matrix2d H;
        H(0, 0) = (g(h, 0) - 2 * f0 + g(-h, 0)) / (h * h);
        H(1, 1) = (g(0, h) - 2 * f0 + g(0, -h)) / (h * h);
        H(0, 1) = H(1, 0) = (g(h, h) - g(h, -h) - g(-h, h) + g(-h, -h)) / (4 * h * h);
        Eigen::Vector2d step;
        if (H(0, 0) < 0 && H.determinant() > 0)
            step = H.ldlt().solve(-grad);
        else
            step = 1e-2 * grad / std::max(grad.norm(), 1e-300);
        double s = 1.0;
        while (s > 1e-6 && g(s * step(0), s * step(1)) < f0) s *= 0.5;
        if (g(s * step(0), s * step(1)) < f0) break;
        n = (n + s * step(0) * u1 + s * step(1) * u2).normalized();
        if (s * step.norm() < 1e-13) break;
        h = std::clamp(s * step.norm(), 1e-6, 1e-4);
    }
    return n;
}

}  // namespace

AxisOptimum optimal_n(const Mat3& M12, const Mat3& M22, int seeds)
{
    AxisOptimum out;
    const auto pts = fibonacci_sphere(std::max(seeds, 16));
    std::vector<std::pair<double, Vec3>> ranked;
    for (const auto& p : pts) ranked.emplace_back(axial_objective(M12, M22, p), p);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    if (ranked.front().first == 0.0) {
        out.notice = "f vanishes identically: zero axial velocity";
        return out;
    }
    // Refine the best seeds of every distinct basin; keep all maximisers to resolve ties deterministically.
    std::vector<std::pair<double, Vec3>> found;
    const std::size_t n_refine = std::min<std::size_t>(ranked.size(), 64);
    for (std::size_t k = 0; k < n_refine; ++k) {
        const Vec3 n = canonical_direction(refine_on_sphere(M12, M22, ranked[k].second));
        const double v = axial_objective(M12, M22, n);
        bool dup = false;
        for (auto& f : found)
            if ((f.second - n).norm() < 1e-6) {
                dup = true;
                if (v > f.first) f = {v, n};
            }
        if (!dup) found.emplace_back(v, n);
    }
    double vmax = 0.0;
    for (const auto& f : found) vmax = std::max(vmax, f.first);
    std::vector<Vec3> tied;
    for (const auto& f : found)
        if (f.first >= vmax * (1.0 - 1e-9)) tied.push_back(f.second);
    std::sort(tied.begin(), tied.end(), [](const Vec3& a, const Vec3& b) {
        for (int k = 0; k < 3; ++k)
            if (std::abs(a(k) - b(k)) > 1e-9) return a(k) < b(k);
        return false;
    });
    out.n = tied.front();
    out.value = axial_objective(M12, M22, out.n);
    out.tied = static_cast<int>(tied.size());
    return out;
}

namespace {

Mat3 A_of(const Mat3& M22, const Vec3& n, const Vec3& m)
{
    // A = P [B]x - Ma [e3]x with P = M22 [m]x, B = n x m and Ma e3 = M22 n.
    return M22 * skew(m) * skew(n.cross(m)) - skew(M22 * n);
}

double best_stable_vax(const Mat3& M12, const Mat3& M22, const Vec3& m)
{
    const Swimmer s = make_swimmer("candidate", Mat3::Zero(), M12, M22, m);
    const PDecomposition dec = decompose(s);
    const int nt = 360, np = 90;
    double best = 0.0;
    for (int i = 0; i < nt; ++i) {
        const double t = -pi + 2.0 * pi * i / nt;
        for (int j = 1; j <= np; ++j) {
            const double p = (pi / 2 - 0.01) * j / np;
            const atlas::Equilibrium e = atlas::eval_chart(dec, t, p);
            if (is_stable(e)) best = std::max(best, std::abs(e.v_ax));
        }
    }
    return best;
}

}  // namespace

MagnetisationOptimum optimal_magnetisation(const Mat3& M12, const Mat3& M22, int samples)
{
    MagnetisationOptimum out;
    const AxisOptimum ax = optimal_n(M12, M22);
    const Vec3 n = ax.n;
    out.n_star = n;
    out.v_ax_star = ax.value;
    out.Ma_star = (M22 * n).norm();
    const Vec3 u1 = n.unitOrthogonal(), u2 = n.cross(u1);
    auto m_of = [&](double x) { return Vec3(std::cos(x) * u1 + std::sin(x) * u2); };
    auto hopf_det = [&](double x) { return numerics::bialternate(A_of(M22, n, m_of(x))).determinant(); };

    // m and -m give opposite A, so half a turn covers every magnetisation up to sign.
    const int ns = std::max(samples, 16);
    std::vector<double> xs(static_cast<std::size_t>(ns) + 1), ds(xs.size());
    for (int k = 0; k <= ns; ++k) {
        xs[k] = pi * k / ns;
        ds[k] = hopf_det(xs[k]);
    }
    double best_re = 1e300;
    Vec3 fallback = m_of(0.0);
    for (int k = 0; k <= ns; ++k) {
        const auto sp = numerics::eig3(A_of(M22, n, m_of(xs[k])));
        for (const cplx& l : sp.eigenvalues)
            if (l.imag() > 0.0 && std::abs(l.real()) < best_re) {
                best_re = std::abs(l.real());
                fallback = m_of(xs[k]);
            }
    }
    for (int k = 0; k < ns; ++k) {
        if ((ds[k] > 0.0) == (ds[k + 1] > 0.0) && ds[k] != 0.0) continue;
        double a = xs[k], b = xs[k + 1], fa = ds[k];
        for (int it = 0; it < 100; ++it) {
            const double c = 0.5 * (a + b), fc = hopf_det(c);
            if (fc == 0.0) { a = b = c; break; }
            if ((fc > 0.0) == (fa > 0.0)) { a = c; fa = fc; } else { b = c; }
        }
        const Vec3 m = m_of(0.5 * (a + b));
        if (stability::imaginary_pair(numerics::eig3(A_of(M22, n, m)), 1e-8 * std::max(1.0, out.Ma_star)))
            out.candidates.push_back(canonical_direction(m));
    }

    out.hopf_found = !out.candidates.empty();
    if (out.hopf_found) {
        double best = -1.0;
        for (const auto& m : out.candidates) {
            const double v = best_stable_vax(M12, M22, m);
            if (v > best) { best = v; out.m_star = m; }
        }
        out.best_stable_v_ax = best;
    } else {
        out.m_star = canonical_direction(fallback);
        out.best_stable_v_ax = best_stable_vax(M12, M22, out.m_star);
    }
    out.B = n.cross(out.m_star);
    out.e3 = (M22 * n).normalized();
    out.cos_psi_star = out.e3.dot(out.B);
    return out;
}

const CurvePoint* VaxCurve::extremum(bool stable_only) const
{
    const CurvePoint* best = nullptr;
    for (const auto& br : branches)
        for (const auto& p : br)
            if ((!stable_only || p.stable) && (!best || std::abs(p.v_ax) > std::abs(best->v_ax))) best = &p;
    return best;
}

VaxCurve vax_vs_ma_curve(const PDecomposition& dec, double cos_psi, int resolution)
{
    if (!(std::abs(cos_psi) <= 1.0)) throw std::invalid_argument("vax_vs_ma_curve: |cos psi| must be at most 1");
    VaxCurve c;
    c.cos_psi = cos_psi;
    auto f = [&](double t, double p) { return atlas::surface(dec, t, p).cos_psi - cos_psi; };
    for (const auto& pl : detail::zero_contours(f, -pi, 2.0 * pi, resolution, 0.0, pi, resolution)) {
        std::vector<CurvePoint> br;
        for (const auto& [t, p] : pl) {
            const atlas::Equilibrium e = atlas::eval_chart(dec, t, p);
            br.push_back({e.Ma, e.v_ax, is_stable(e), atlas::wrap_angle(t), p});
        }
        if (!br.empty()) c.branches.push_back(std::move(br));
    }
    return c;
}

void write_vax_curve_csv(std::ostream& os, const VaxCurve& c)
{
    os << "cos_psi,branch,Ma,v_ax,stable,theta,phi\n";
    os << std::setprecision(12);
    for (std::size_t b = 0; b < c.branches.size(); ++b)
        for (const auto& p : c.branches[b])
            os << c.cos_psi << ',' << b << ',' << p.Ma << ',' << p.v_ax << ',' << (p.stable ? 1 : 0) << ',' << p.theta
               << ',' << p.phi << '\n';
}

}  // namespace magswim::optimize
