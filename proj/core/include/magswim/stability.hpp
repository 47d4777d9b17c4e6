#pragma once

#include "magswim/atlas.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace magswim::stability {

inline constexpr double tol_re = 1e-9;

/// A = P [B]x - Ma [e3]x
Mat3 linearize(const PDecomposition& dec, const atlas::Equilibrium& eq);
Mat3 linearize(const PDecomposition& dec, const Vec3& e3, const Vec3& B, double Ma);

struct Index {
    int stable_directions = 0;  // eigenvalues with Re < -tol_re
    bool marginal = false;      // any |Re| <= tol_re
};

Index stability_index(const Mat3& A);
Index stability_index(const numerics::Spectrum3& sp);

/// det d(Ma, cos psi)/d(theta, phi), analytic.
double fold_jacobian(const PDecomposition& dec, double theta, double phi);
/// Partial derivatives [[dMa/dtheta, dMa/dphi], [dcos/dtheta, dcos/dphi]].
Eigen::Matrix2d chart_jacobian(const PDecomposition& dec, double theta, double phi);

/// det(2A (.) I) at a chart point.
double hopf_indicator(const PDecomposition& dec, double theta, double phi);

/// Purely imaginary pair +-i lambda with |Re| < tol; returns lambda > 0.
std::optional<double> imaginary_pair(const numerics::Spectrum3& sp, double tol = 1e-8);

enum class CurveKind { fold, hopf };

struct CurvePoint {
    double theta, phi, Ma, cos_psi;
    double lambda_i = 0.0;  // hopf only
};

struct BifurcationCurve {
    CurveKind kind;
    std::vector<CurvePoint> points;
};

/// Zero contours of the fold Jacobian over the chart (marching squares plus Newton).
std::vector<BifurcationCurve> fold_curves(const PDecomposition& dec, int resolution = 400);

/// Zero contours of det(2A (.) I), with points carrying two opposite real eigenvalues removed.
std::vector<BifurcationCurve> hopf_curves(const PDecomposition& dec, int resolution = 400);

/// Refine a chart point onto the Hopf set with a prescribed imaginary part lambda_i.
std::optional<CurvePoint> hopf_point_with_frequency(const PDecomposition& dec, double theta, double phi,
                                                    double lambda_i);

void write_curves_csv(std::ostream& os, const std::vector<BifurcationCurve>& curves);

}  // namespace magswim::stability
