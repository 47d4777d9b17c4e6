#include "magswim/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace magswim {

Mat3 skew(const Vec3& a)
{
    Mat3 s;
    s << 0.0, -a.z(), a.y(),
         a.z(), 0.0, -a.x(),
         -a.y(), a.x(), 0.0;
    return s;
}

namespace numerics {
namespace {

void require_finite(const Mat3& M, const char* what)
{
    if (!M.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite input");
}

// Newton polish of a real root of x^3 + a x^2 + b x + c.
double polish_cubic_root(double x, double a, double b, double c)
{
    for (int it = 0; it < 4; ++it) {
        const double f = ((x + a) * x + b) * x + c;
        const double df = (3.0 * x + 2.0 * a) * x + b;
        if (df == 0.0) break;
        const double dx = f / df;
        if (!std::isfinite(dx)) break;
        const double xn = x - dx;
        const double fn = ((xn + a) * xn + b) * xn + c;
        if (std::abs(fn) >= std::abs(f)) break;
        x = xn;
    }
    return x;
}

}  // namespace

Svd3 svd3(const Mat3& M)
{
    require_finite(M, "svd3");
    Eigen::JacobiSVD<Mat3> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Svd3 out{svd.singularValues(), svd.matrixU(), svd.matrixV()};
    if (out.U.determinant() < 0.0) {
        out.U.col(2) *= -1.0;
        out.singular_values(2) *= -1.0;
    }
    if (out.V.determinant() < 0.0) {
        out.V.col(2) *= -1.0;
        out.singular_values(2) *= -1.0;
    }
    return out;
}

Spectrum3 eig3(const Mat3& A_in)
{
    require_finite(A_in, "eig3");
    Spectrum3 sp;
    const double s = A_in.cwiseAbs().maxCoeff();
    if (s == 0.0) {
        sp.eigenvalues = {0.0, 0.0, 0.0};
        sp.dominant_real_count = 3;
        return sp;
    }
    const Mat3 A = A_in / s;

    // lambda^3 + a lambda^2 + b lambda + c
    const double a = -A.trace();
    const double b = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0) + A(0, 0) * A(2, 2) - A(0, 2) * A(2, 0) +
                     A(1, 1) * A(2, 2) - A(1, 2) * A(2, 1);
    const double c = -A.determinant();

    const double a3 = a / 3.0;
    const double p = b - a * a3;
    const double q = 2.0 * a3 * a3 * a3 - a3 * b + c;
    const double hq = 0.5 * q;
    const double tp = p / 3.0;
    // Discriminant guarded against cancellation when both terms are tiny.
    const double disc = hq * hq + tp * tp * tp;
    const double disc_scale = hq * hq + std::abs(tp * tp * tp);
    const bool three_real = disc <= 8.0 * std::numeric_limits<double>::epsilon() * disc_scale;

    if (three_real) {
        const double r = std::sqrt(std::max(-tp, 0.0));
        double roots[3];
        if (r == 0.0) {
            roots[0] = roots[1] = roots[2] = -a3;
        } else {
            const double arg = std::clamp(-hq / (r * r * r), -1.0, 1.0);
            const double ang = std::acos(arg) / 3.0;
            for (int k = 0; k < 3; ++k)
                roots[k] = 2.0 * r * std::cos(ang - 2.0 * std::numbers::pi * k / 3.0) - a3;
        }
        for (int k = 0; k < 3; ++k) {
            roots[k] = polish_cubic_root(roots[k], a, b, c);
            sp.eigenvalues[k] = roots[k] * s;
        }
        sp.dominant_real_count = 3;
        return sp;
    }

    // One real root by the cancellation-free Cardano form.
    const double sq = std::sqrt(disc);
    const double u = std::cbrt(-hq - std::copysign(sq, hq));
    double x = (u != 0.0) ? u - tp / u : 0.0;
    double r = polish_cubic_root(x - a3, a, b, c);

    // Deflate: lambda^2 + B lambda + C with B = a + r; C from the constant term when r is not tiny.
    const double B = a + r;
    double C = b + B * r;
    if (std::abs(r) > 1e-3) C = -c / r;
    const double dq = B * B - 4.0 * C;
    if (dq >= 0.0) {
        const double qq = -0.5 * (B + std::copysign(std::sqrt(dq), B));
        const double r1 = qq;
        const double r2 = (qq != 0.0) ? C / qq : 0.0;
        sp.eigenvalues = {r * s, polish_cubic_root(r1, a, b, c) * s, polish_cubic_root(r2, a, b, c) * s};
        sp.dominant_real_count = 3;
    } else {
        const double re = -0.5 * B;
        const double im = 0.5 * std::sqrt(-dq);
        sp.eigenvalues = {cplx(r * s, 0.0), cplx(re * s, im * s), cplx(re * s, -im * s)};
        sp.dominant_real_count = 1;
    }
    return sp;
}

Mat3 bialternate(const Mat3& a)
{
    Mat3 r;
    r << a(0, 0) + a(1, 1), a(1, 2), -a(0, 2),
         a(2, 1), a(2, 2) + a(0, 0), a(0, 1),
         -a(2, 0), a(1, 0), a(1, 1) + a(2, 2);
    return r;
}

double TrigPoly4::operator()(double t) const
{
    double v = a0;
    for (int k = 1; k <= 4; ++k) v += a[k - 1] * std::cos(k * t) + b[k - 1] * std::sin(k * t);
    return v;
}

double TrigPoly4::derivative(double t) const
{
    double v = 0.0;
    for (int k = 1; k <= 4; ++k) v += k * (b[k - 1] * std::cos(k * t) - a[k - 1] * std::sin(k * t));
    return v;
}

double TrigPoly4::scale() const
{
    double s = std::abs(a0);
    for (int k = 0; k < 4; ++k) s = std::max({s, std::abs(a[k]), std::abs(b[k])});
    return s;
}

namespace {

using RPoly = std::vector<double>;
using CPoly = std::vector<cplx>;

template <class T>
std::vector<T> poly_mul(const std::vector<T>& p, const std::vector<T>& q)
{
    std::vector<T> r(p.size() + q.size() - 1, T(0));
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
    return r;
}

template <class T>
std::vector<T> poly_pow(const std::vector<T>& p, int n)
{
    std::vector<T> r{T(1)};
    for (int i = 0; i < n; ++i) r = poly_mul(r, p);
    return r;
}

double wrap_pi(double t)
{
    constexpr double tau = 2.0 * std::numbers::pi;
    t = std::fmod(t + std::numbers::pi, tau);
    if (t <= 0.0) t += tau;
    return t - std::numbers::pi;  // (-pi, pi]
}

double angular_gap(double x, double y)
{
    return std::abs(wrap_pi(x - y));
}

struct Polished {
    double t;
    double residual;
};

Polished newton_polish(const TrigPoly4& f, double t)
{
    double best = t, best_r = std::abs(f(t));
    for (int it = 0; it < 80; ++it) {
        const double v = f(t);
        const double dv = f.derivative(t);
        if (dv == 0.0) break;
        double step = v / dv;
        step = std::clamp(step, -0.05, 0.05);
        t -= step;
        const double r = std::abs(f(t));
        if (r < best_r) {
            best_r = r;
            best = t;
        }
        if (std::abs(step) < 1e-16 || r == 0.0) break;
    }
    return {wrap_pi(best), best_r};
}

}  // namespace

TrigRoots trig_poly_roots(const TrigPoly4& p_in)
{
    if (!std::isfinite(p_in.scale())) throw std::invalid_argument("trig_poly_roots: non-finite coefficients");
    TrigRoots out;
    const double sc = p_in.scale();
    if (sc == 0.0) {
        out.identically_zero = true;
        return out;
    }
    TrigPoly4 f = p_in;
    f.a0 /= sc;
    for (int k = 0; k < 4; ++k) {
        f.a[k] /= sc;
        f.b[k] /= sc;
    }

    // (1+t^2)^4 f(theta) with t = tan(theta/2); e^{ik theta} (1+t^2)^k = (1+it)^{2k}.
    const RPoly one_t2{1.0, 0.0, 1.0};
    const CPoly one_it{cplx(1.0, 0.0), cplx(0.0, 1.0)};
    RPoly poly(9, 0.0);
    {
        const RPoly base = poly_pow(one_t2, 4);
        for (std::size_t i = 0; i < base.size(); ++i) poly[i] += f.a0 * base[i];
    }
    for (int k = 1; k <= 4; ++k) {
        const CPoly e = poly_pow(one_it, 2 * k);
        const RPoly w = poly_pow(one_t2, 4 - k);
        RPoly re(e.size()), im(e.size());
        for (std::size_t i = 0; i < e.size(); ++i) {
            re[i] = e[i].real();
            im[i] = e[i].imag();
        }
        const RPoly cr = poly_mul(re, w), ci = poly_mul(im, w);
        for (std::size_t i = 0; i < cr.size(); ++i) poly[i] += f.a[k - 1] * cr[i] + f.b[k - 1] * ci[i];
    }

    double pmax = 0.0;
    for (double c : poly) pmax = std::max(pmax, std::abs(c));
    int deg = 8;
    while (deg > 0 && std::abs(poly[deg]) <= 1e-14 * pmax) --deg;

    std::vector<double> candidates;
    if (deg >= 1) {
        Eigen::MatrixXd C = Eigen::MatrixXd::Zero(deg, deg);
        for (int i = 1; i < deg; ++i) C(i, i - 1) = 1.0;
        for (int i = 0; i < deg; ++i) C(i, deg - 1) = -poly[i] / poly[deg];
        Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
        for (int i = 0; i < deg; ++i) {
            const cplx z = es.eigenvalues()(i);
            if (std::abs(z.imag()) <= 1e-3 * (1.0 + std::abs(z))) candidates.push_back(2.0 * std::atan(z.real()));
        }
    }
    // The substitution cannot see theta = pi; probe it directly.
    if (std::abs(f(std::numbers::pi)) < 1e-6) candidates.push_back(std::numbers::pi);

    std::vector<std::pair<double, bool>> found;
    for (double c : candidates) {
        const Polished pr = newton_polish(f, c);
        if (pr.residual < 1e-12) found.push_back({pr.t, false});
    }
    std::sort(found.begin(), found.end());

    std::vector<std::pair<double, bool>> merged;
    for (const auto& r : found) {
        if (!merged.empty() && angular_gap(merged.back().first, r.first) < 1e-9) {
            merged.back().second = true;
            continue;
        }
        merged.push_back(r);
    }
    if (merged.size() > 1 && angular_gap(merged.front().first, merged.back().first) < 1e-9) {
        merged.front().second = true;
        merged.pop_back();
    }
    for (const auto& r : merged) {
        out.roots.push_back(r.first);
        out.degenerate.push_back(r.second);
    }
    return out;
}

}  // namespace numerics
}  // namespace magswim
