#pragma once

#include "magswim/atlas.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace magswim::optimize {

struct DriveOptimum {
    double theta = 0.0, phi = 0.0, Ma = 0.0, cos_psi = 0.0, v_ax = 0.0;
    bool stable = false;
    bool near_hopf = false;   // a complex pair with |Re| < 1e-2 |Im| at the optimum
    bool empty_stable_set = false;
    std::string notice;
};

/// argmax |v_ax| over the chart (dense grid plus constrained compass search).
DriveOptimum optimize_drive(const PDecomposition& dec, bool stable_only, int resolution = 400, unsigned threads = 0);

/// f(n) = |n . M22 M12 n| / |M22 n|
double axial_objective(const Mat3& M12, const Mat3& M22, const Vec3& n);

struct AxisOptimum {
    Vec3 n = Vec3::UnitZ();
    double value = 0.0;
    int tied = 1;  // number of distinct maximisers (up to sign) within 1e-9 relative
    std::string notice;
};

/// Absolute maximiser of f over the sphere: Fibonacci seeding plus projected Newton.
AxisOptimum optimal_n(const Mat3& M12, const Mat3& M22, int seeds = 4096);

struct MagnetisationOptimum {
    Vec3 n_star = Vec3::UnitZ();
    Vec3 m_star = Vec3::UnitX();
    double v_ax_star = 0.0;     // f(n*)
    double Ma_star = 0.0;       // |M22 n*|
    double cos_psi_star = 0.0;  // e3 . B
    Vec3 e3 = Vec3::UnitZ(), B = Vec3::UnitX();
    bool hopf_found = false;    // false: best-effort m* minimising the real part of the complex pair
    std::vector<Vec3> candidates;  // every m(x) with a purely imaginary pair
    double best_stable_v_ax = 0.0;  // largest stable |v_ax| of the chosen magnetisation
};

/// Scan of m(x) on the circle orthogonal to n*, with bisection on det(2A(x) (.) I).
MagnetisationOptimum optimal_magnetisation(const Mat3& M12, const Mat3& M22, int samples = 1024);

/// Sign convention for directions: first nonzero component positive.
Vec3 canonical_direction(const Vec3& v);

struct CurvePoint {
    double Ma = 0.0, v_ax = 0.0;
    bool stable = false;
    double theta = 0.0, phi = 0.0;
};

struct VaxCurve {
    double cos_psi = 0.0;
    std::vector<std::vector<CurvePoint>> branches;  // one polyline per traced level-set component

    /// Largest |v_ax| over (stable) points; returns the point.
    const CurvePoint* extremum(bool stable_only) const;
};

/// Level set cos psi(theta, phi) = cos_psi traced over the chart with each point classified.
VaxCurve vax_vs_ma_curve(const PDecomposition& dec, double cos_psi, int resolution = 400);

void write_vax_curve_csv(std::ostream& os, const VaxCurve& c);

}  // namespace magswim::optimize
