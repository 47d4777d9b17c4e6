#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <vector>

namespace magswim {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec4 = Eigen::Vector4d;
using cplx = std::complex<double>;

/// Cross-product matrix: skew(a) * b == a.cross(b).
Mat3 skew(const Vec3& a);

namespace numerics {

struct Spectrum3 {
    std::array<cplx, 3> eigenvalues;
    int dominant_real_count = 0;  // number of eigenvalues with zero imaginary part (1 or 3)
};

/// Singular value decomposition M = U diag(s) V^T with det(U) = det(V) = +1.
/// For det(M) < 0 the smallest entry of s carries the sign, so s(0) >= s(1) >= s(2) still holds.
struct Svd3 {
    Vec3 singular_values;
    Mat3 U;
    Mat3 V;
};

Svd3 svd3(const Mat3& M);

/// Roots of the characteristic cubic, conjugate pairs exact.
Spectrum3 eig3(const Mat3& A);

/// 2A (.) I, whose eigenvalues are the pairwise sums of the eigenvalues of A.
Mat3 bialternate(const Mat3& A);

/// f(t) = a0 + sum_{k=1..4} (a[k-1] cos k t + b[k-1] sin k t)
struct TrigPoly4 {
    double a0 = 0.0;
    std::array<double, 4> a{};
    std::array<double, 4> b{};

    double operator()(double t) const;
    double derivative(double t) const;
    double scale() const;  // largest coefficient magnitude
};

/// Exact coefficients of a degree-4 trigonometric polynomial from 16 equispaced samples.
template <class F>
TrigPoly4 fit_trig_poly4(F&& f);

struct TrigRoots {
    std::vector<double> roots;       // sorted, in (-pi, pi]
    std::vector<bool> degenerate;    // merged (near-multiple) roots
    bool identically_zero = false;
};

TrigRoots trig_poly_roots(const TrigPoly4& p);

}  // namespace numerics
}  // namespace magswim

#include <cmath>
#include <numbers>

template <class F>
magswim::numerics::TrigPoly4 magswim::numerics::fit_trig_poly4(F&& f)
{
    constexpr int n = 16;
    std::array<double, n> v{};
    for (int j = 0; j < n; ++j) v[j] = f(-std::numbers::pi + 2.0 * std::numbers::pi * j / n);
    TrigPoly4 p;
    for (int j = 0; j < n; ++j) p.a0 += v[j] / n;
    for (int k = 1; k <= 4; ++k) {
        double ak = 0.0, bk = 0.0;
        for (int j = 0; j < n; ++j) {
            const double t = -std::numbers::pi + 2.0 * std::numbers::pi * j / n;
            ak += v[j] * std::cos(k * t);
            bk += v[j] * std::sin(k * t);
        }
        p.a[k - 1] = 2.0 * ak / n;
        p.b[k - 1] = 2.0 * bk / n;
    }
    return p;
}
