#pragma once

#include "magswim/dynamics.hpp"
#include "magswim/stability.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace magswim::periodic {

struct OrbitGuess {
    Vec4 q0;
    double T = 0.0;
    double Ma = 0.0, cos_psi = 0.0;
    // Hopf data, when the guess was seeded there.
    Vec4 q_eq = Vec4::Zero();
    Vec4 direction = Vec4::Zero();  // unit quaternion-space direction of the critical eigenplane
    double lambda_i = 0.0;
};

/// Equilibrium plus a small oscillation along the critical eigenplane; T = 2 pi / lambda_i.
/// Throws std::domain_error when lambda_i < 1e-6 (period unbounded near fold endpoints).
OrbitGuess hopf_seed(const PDecomposition& dec, const stability::CurvePoint& hopf, double amplitude = 1e-3);

struct PeriodicOrbit {
    double Ma = 0.0, cos_psi = 0.0, T = 0.0;
    Vec4 q0;
    std::vector<dynamics::SimState> samples;
    std::array<cplx, 3> floquet{};  // multipliers on the rotation group; floquet[0] is the trivial one
    double trivial_error = 0.0;     // |floquet[0] - 1|
    double max_nontrivial = 0.0;    // largest modulus of floquet[1..2]
    bool stable = false;
    double closure = 0.0;           // geodesic distance between start and end
    double residual = 0.0;          // Euclidean shooting residual |phi_T(q0) - q0|
    double amplitude = 0.0;         // max |q(t) - mean q|
    int iterations = 0;
};

struct ShootOptions {
    double tol = 1e-12;       // integrator tolerance
    int max_iter = 25;
    double newton_tol = 1e-11;
    int samples = 200;        // samples stored along the orbit
};

/// Newton on (q0, T) with a Poincare phase condition through the guess; Floquet multipliers from the monodromy.
/// Throws std::runtime_error when Newton does not converge within max_iter.
PeriodicOrbit shoot_orbit(const PDecomposition& dec, double Ma, double cos_psi, const OrbitGuess& guess,
                          const ShootOptions& opt = {});

/// Builds the orbit record (samples, multipliers, closure) for a known anchor and period.
PeriodicOrbit evaluate_orbit(const PDecomposition& dec, double Ma, double cos_psi, const Vec4& q0, double T,
                             const ShootOptions& opt = {});

struct ContinuationOptions {
    double first_amplitude = 2e-2;  // amplitude constraint of the first orbit off the Hopf point
    double ds = 1e-2, ds_min = 1e-5, ds_max = 2e-2;
    int max_steps = 400;
    double stop_amplitude = 2e-2;   // branch ends when the amplitude falls back below this
    double hopf_match = 1e-2;       // (Ma, cos psi) distance for the terminal Hopf verification
    ShootOptions shoot;
};

struct Branch {
    std::vector<PeriodicOrbit> orbits;
    double T = 0.0;
    stability::CurvePoint start{};
    std::optional<stability::CurvePoint> end;  // verified terminal Hopf point
    bool complete = false;
    std::string reason;
};

/// First orbit off a Hopf point at fixed T: unknowns (q0, Ma, cos psi) with an amplitude constraint.
PeriodicOrbit first_orbit(const PDecomposition& dec, const OrbitGuess& seed, double amplitude,
                          const ShootOptions& opt = {});

/// Pseudo-arclength continuation in (q0, Ma, cos psi) with the period of `start` held fixed.
/// direction = +1 / -1 picks the orientation of the initial tangent.
Branch continue_constant_period(const PDecomposition& dec, const PeriodicOrbit& start, int direction = +1,
                                const ContinuationOptions& opt = {});

/// Same, starting off a Hopf point; +1 follows the side where the amplitude grows.
Branch continue_constant_period(const PDecomposition& dec, const stability::CurvePoint& hopf, int direction = +1,
                                const ContinuationOptions& opt = {});

void write_branch_csv(std::ostream& os, const Branch& b);
void write_orbit_csv(std::ostream& os, const PeriodicOrbit& o);

}  // namespace magswim::periodic
