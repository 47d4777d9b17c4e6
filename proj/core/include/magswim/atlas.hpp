#pragma once

#include "magswim/numerics.hpp"
#include "magswim/swimmer.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace magswim::atlas {

/// One relative equilibrium, located by its chart coordinates.
struct Equilibrium {
    double theta = 0.0;  // (-pi, pi]
    double phi = 0.0;    // [0, pi]
    double Ma = 0.0;
    double cos_psi = 0.0;
    Vec3 e3 = Vec3::Zero();  // body frame
    Vec3 B = Vec3::Zero();   // body frame
    double v_ax = 0.0;       // l/t_c
    int index = 0;           // eigenvalues of A with Re < -tol
    bool marginal = false;   // some |Re| <= tol
    numerics::Spectrum3 eigenvalues;
    bool near_fold = false;  // root of the inverse problem with vanishing theta-derivative
};

struct SurfacePoint {
    double theta, phi, Ma, cos_psi;
};

/// (cos^2/s1^2 + sin^2/s2^2)^(-1/2)
double g_factor(const PDecomposition& dec, double theta);

/// Ma and cos(psi) only, no vectors and no stability.
SurfacePoint surface(const PDecomposition& dec, double theta, double phi);

Vec3 e3_of(const PDecomposition& dec, double theta);
Vec3 B_of(const PDecomposition& dec, double theta, double phi);

/// Full equilibrium data including v_ax and the stability classification.
Equilibrium eval_chart(const PDecomposition& dec, double theta, double phi);

/// The trigonometric polynomial in theta whose roots are the equilibria at (Ma, cos psi).
numerics::TrigPoly4 equilibrium_polynomial(const PDecomposition& dec, double Ma, double cos_psi);

/// All equilibria at fixed experimental parameters.
std::vector<Equilibrium> solve_equilibria(const PDecomposition& dec, double Ma, double cos_psi);

/// Chart coordinates of the symmetric twin: phi -> pi - phi, theta -> theta + pi (wrapped).
std::pair<double, double> symmetric_pair(double theta, double phi);

struct Curve {
    std::string label;
    std::vector<std::pair<double, double>> points;  // (theta, phi)
};

struct IntersectionFamilies {
    std::vector<Curve> theta_mirror;      // Sigma(theta, phi) = Sigma(-theta, phi)
    std::vector<Curve> theta_supplement;  // Sigma(theta, phi) = Sigma(pi - theta, phi)
    std::vector<Curve> theta0_lines;      // theta in {theta0, theta0 +- pi}
    std::vector<Curve> equator;           // phi = pi/2
    std::vector<std::string> notices;
};

IntersectionFamilies self_intersections(const PDecomposition& dec, int samples = 721);

struct ChartRanges {
    double max_Ma = 0.0;
    double cos_psi_min = 0.0;
    double cos_psi_max = 0.0;
    double low_Ma_half_width = 0.0;  // sqrt(1 - (beta0.eta0)^2)
};

ChartRanges chart_ranges(const PDecomposition& dec, int resolution = 400);

/// Wrap an angle to (-pi, pi].
double wrap_angle(double t);

/// CSV: theta,phi,Ma,cos_psi,v_ax,index on an n_theta x n_phi grid (cell centres in phi).
void write_chart_csv(std::ostream& os, const PDecomposition& dec, int n_theta, int n_phi);
void write_intersections_csv(std::ostream& os, const IntersectionFamilies& fam);

}  // namespace magswim::atlas
