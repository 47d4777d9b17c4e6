#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace cli {

/// A:B:N sweep, or a single value A (N = 1).
struct Range {
    double a = 0.0, b = 0.0;
    int n = 1;

    double at(int k) const { return n == 1 ? a : a + (b - a) * k / (n - 1); }
    static Range parse(const std::string& text);
};

/// Validated before any compute. Unset ranges fall back to swimmer-dependent defaults.
struct RunConfig {
    std::string command;
    std::string swimmer;
    std::optional<Range> ma, cospsi;
    int theta_n = 400, phi_n = 400;
    std::uint64_t seed = 42;
    double t_end = 5000.0;
    double tol = 1e-10;
    std::string out = "out";
    unsigned threads = 0;

    int samples = 200;        // basins
    std::string q0;           // simulate: "q1,q2,q3,q4"; empty draws from the seed
    double output_dt = 1.0;   // simulate
    bool position = true;     // simulate
    std::string mode = "loop";  // handling: fold | lowma | loop
    double rate = 1e-6;       // handling rate bound
    double sweep_to = -0.09;  // handling fold: cos psi turning point
    int side = +1;            // handling: first side
    int orbit_stride = 5;     // periodic: write every n-th orbit
    std::string argv;         // command line echo
};

/// Thrown for inputs that fail validation (exit code 2).
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int cmd_atlas(const RunConfig& cfg);
int cmd_regimes(const RunConfig& cfg);
int cmd_simulate(const RunConfig& cfg);
int cmd_basins(const RunConfig& cfg);
int cmd_optimize(const RunConfig& cfg);
int cmd_periodic(const RunConfig& cfg);
int cmd_handling(const RunConfig& cfg);
int cmd_figures(const RunConfig& cfg);

}  // namespace cli
