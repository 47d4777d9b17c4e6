#include "magswim/stability.hpp"

#include "contour.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>

namespace magswim::stability {

using std::numbers::pi;

Mat3 linearize(const PDecomposition& dec, const Vec3& e3, const Vec3& B, double Ma)
{
    return dec.P * skew(B) - Ma * skew(e3);
}

Mat3 linearize(const PDecomposition& dec, const atlas::Equilibrium& eq)
{
    return linearize(dec, eq.e3, eq.B, eq.Ma);
}

Index stability_index(const numerics::Spectrum3& sp)
{
    Index idx;
    for (const cplx& l : sp.eigenvalues) {
        if (l.real() < -tol_re) ++idx.stable_directions;
        if (std::abs(l.real()) <= tol_re) idx.marginal = true;
    }
    return idx;
}

Index stability_index(const Mat3& A)
{
    return stability_index(numerics::eig3(A));
}

Eigen::Matrix2d chart_jacobian(const PDecomposition& dec, double theta, double phi)
{
    const double s1 = dec.sigma1, s2 = dec.sigma2;
    const double c = std::cos(theta), s = std::sin(theta);
    const double cp = std::cos(phi), sp = std::sin(phi);
    const double g = atlas::g_factor(dec, theta);
    const double dg = -g * g * g * c * s * (1.0 / (s2 * s2) - 1.0 / (s1 * s1));
    const double k = dec.c01 * c / s1 + dec.c02 * s / s2;
    const double dk = -dec.c01 * s / s1 + dec.c02 * c / s2;
    const double l = dec.c11 * (c * c / (s1 * s1) - s * s / (s2 * s2)) + dec.c12 * c * s / (s1 * s2);
    const double dl = -2.0 * dec.c11 * c * s * (1.0 / (s1 * s1) + 1.0 / (s2 * s2)) + dec.c12 * (c * c - s * s) / (s1 * s2);
    Eigen::Matrix2d J;
    J << sp * dg, cp * g,
         cp * dk + sp * (dg * l + g * dl), -sp * k + cp * g * l;
    return J;
}

double fold_jacobian(const PDecomposition& dec, double theta, double phi)
{
    return chart_jacobian(dec, theta, phi).determinant();
}

double hopf_indicator(const PDecomposition& dec, double theta, double phi)
{
    const Mat3 A = linearize(dec, atlas::e3_of(dec, theta), atlas::B_of(dec, theta, phi),
                             atlas::surface(dec, theta, phi).Ma);
    return numerics::bialternate(A).determinant();
}

std::optional<double> imaginary_pair(const numerics::Spectrum3& sp, double tol)
{
    if (sp.dominant_real_count != 1) return std::nullopt;
    for (const cplx& l : sp.eigenvalues) {
        if (l.imag() > 0.0 && std::abs(l.real()) < tol) return l.imag();
    }
    return std::nullopt;
}

namespace {

CurvePoint make_point(const PDecomposition& dec, double theta, double phi)
{
    const atlas::SurfacePoint sp = atlas::surface(dec, theta, phi);
    return {atlas::wrap_angle(theta), phi, sp.Ma, sp.cos_psi, 0.0};
}

double c2_of(const Mat3& A)
{
    return A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0) + A(0, 0) * A(2, 2) - A(0, 2) * A(2, 0) + A(1, 1) * A(2, 2) -
           A(1, 2) * A(2, 1);
}

Mat3 chart_A(const PDecomposition& dec, double theta, double phi)
{
    return linearize(dec, atlas::e3_of(dec, theta), atlas::B_of(dec, theta, phi), atlas::surface(dec, theta, phi).Ma);
}

// Newton polish of a fold point along the gradient of the Jacobian determinant.
std::pair<double, double> polish_zero(const std::function<double(double, double)>& f, double t, double p)
{
    for (int it = 0; it < 8; ++it) {
        const double v = f(t, p);
        const double h = 1e-7;
        const double gt = (f(t + h, p) - f(t - h, p)) / (2 * h);
        const double gp = (f(t, p + h) - f(t, p - h)) / (2 * h);
        const double n2 = gt * gt + gp * gp;
        if (n2 == 0.0) break;
        const double dt = -v * gt / n2, dp = -v * gp / n2;
        if (std::abs(f(t + dt, p + dp)) >= std::abs(v)) break;
        t += dt;
        p += dp;
        if (std::hypot(dt, dp) < 1e-14) break;
    }
    return {t, p};
}

}  // namespace

std::vector<BifurcationCurve> fold_curves(const PDecomposition& dec, int resolution)
{
    auto f = [&dec](double t, double p) { return fold_jacobian(dec, t, p); };
    const auto lines = detail::zero_contours(f, -pi, 2.0 * pi, resolution, 0.0, pi, resolution);
    std::vector<BifurcationCurve> out;
    for (const auto& pl : lines) {
        BifurcationCurve c{CurveKind::fold, {}};
        for (auto [t, p] : pl) {
            std::tie(t, p) = polish_zero(f, t, p);
            c.points.push_back(make_point(dec, t, p));
        }
        if (!c.points.empty()) out.push_back(std::move(c));
    }
    return out;
}

std::vector<BifurcationCurve> hopf_curves(const PDecomposition& dec, int resolution)
{
    auto f = [&dec](double t, double p) { return hopf_indicator(dec, t, p); };
    const auto lines = detail::zero_contours(f, -pi, 2.0 * pi, resolution, 0.0, pi, resolution);
    std::vector<BifurcationCurve> out;
    for (const auto& pl : lines) {
        BifurcationCurve c{CurveKind::hopf, {}};
        auto flush = [&]() {
            if (!c.points.empty()) out.push_back(std::move(c));
            c = BifurcationCurve{CurveKind::hopf, {}};
        };
        for (const auto& [t, p] : pl) {
            const auto lam = imaginary_pair(numerics::eig3(chart_A(dec, t, p)));
            if (!lam) {
                // Zero of the determinant from two opposite real eigenvalues; not a Hopf point.
                flush();
                continue;
            }
            CurvePoint cp = make_point(dec, t, p);
            cp.lambda_i = *lam;
            c.points.push_back(cp);
        }
        flush();
    }
    return out;
}

std::optional<CurvePoint> hopf_point_with_frequency(const PDecomposition& dec, double theta, double phi,
                                                    double lambda_i)
{
    // At a Hopf point with spectrum {r, +-i w}: det(2A (.) I) = 0 and the second invariant equals w^2.
    const double scale = std::max(dec.sigma1 * dec.sigma1, 1e-300);
    auto F = [&](double t, double p) {
        const Mat3 A = chart_A(dec, t, p);
        return Eigen::Vector2d(numerics::bialternate(A).determinant() / (scale * dec.sigma1),
                               (c2_of(A) - lambda_i * lambda_i) / scale);
    };
    double t = theta, p = phi;
    for (int it = 0; it < 50; ++it) {
        const Eigen::Vector2d r = F(t, p);
        if (r.norm() < 1e-15) break;
        const double h = 1e-7;
        Eigen::Matrix2d J;
        J.col(0) = (F(t + h, p) - F(t - h, p)) / (2 * h);
        J.col(1) = (F(t, p + h) - F(t, p - h)) / (2 * h);
        const Eigen::Vector2d d = J.fullPivLu().solve(-r);
        if (!d.allFinite()) return std::nullopt;
        double step = 1.0;
        while (step > 1e-4 && F(t + step * d(0), p + step * d(1)).norm() >= r.norm()) step *= 0.5;
        t += step * d(0);
        p += step * d(1);
        if (step * d.norm() < 1e-15) break;
    }
    const auto lam = imaginary_pair(numerics::eig3(chart_A(dec, t, p)));
    if (!lam || std::abs(*lam - lambda_i) > 1e-6 * std::max(1.0, lambda_i)) return std::nullopt;
    if (p < 0.0 || p > pi) return std::nullopt;
    CurvePoint cp = make_point(dec, t, p);
    cp.lambda_i = *lam;
    return cp;
}

void write_curves_csv(std::ostream& os, const std::vector<BifurcationCurve>& curves)
{
    os << "kind,curve,theta,phi,Ma,cos_psi,lambda_i\n";
    os << std::setprecision(12);
    for (std::size_t k = 0; k < curves.size(); ++k) {
        const bool hopf = curves[k].kind == CurveKind::hopf;
        for (const auto& p : curves[k].points) {
            os << (hopf ? "hopf" : "fold") << ',' << k << ',' << p.theta << ',' << p.phi << ',' << p.Ma << ','
               << p.cos_psi << ',';
            if (hopf) os << p.lambda_i;
            os << '\n';
        }
    }
}

}  // namespace magswim::stability
