#include "commands.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <functional>
#include <map>

namespace {

struct RawArgs {
    std::string ma, cospsi;
};

void add_common(CLI::App* sub, cli::RunConfig& c, RawArgs& raw)
{
    sub->add_option("--swimmer", c.swimmer, "swimmer JSON file")->required();
    sub->add_option("--ma", raw.ma, "Ma value or sweep A:B:N");
    sub->add_option("--cospsi", raw.cospsi, "cos psi value or sweep A:B:N");
    sub->add_option("--theta", c.theta_n, "chart resolution in theta");
    sub->add_option("--phi", c.phi_n, "chart resolution in phi");
    sub->add_option("--seed", c.seed, "random seed");
    sub->add_option("--t-end", c.t_end, "integration horizon");
    sub->add_option("--tol", c.tol, "integrator tolerance, 1e-12 to 1e-6");
    sub->add_option("--out", c.out, "output directory");
    sub->add_option("--threads", c.threads, "worker threads (0 = hardware)");
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"magswim: orientation dynamics of magnetic helical swimmers"};
    app.require_subcommand(1);

    cli::RunConfig cfg;
    RawArgs raw;
    for (int k = 0; k < argc; ++k) cfg.argv += (k ? " " : "") + std::string(argv[k]);

    const std::map<std::string, std::pair<std::string, std::function<int(const cli::RunConfig&)>>> commands = {
        {"atlas", {"equilibrium chart, fold and Hopf curves, self-intersections", cli::cmd_atlas}},
        {"regimes", {"regime diagram over (Ma, cos psi)", cli::cmd_regimes}},
        {"simulate", {"integrate one trajectory", cli::cmd_simulate}},
        {"basins", {"basin fractions from random initial orientations", cli::cmd_basins}},
        {"optimize", {"optimal drive and magnetisation", cli::cmd_optimize}},
        {"periodic", {"constant-period branch of periodic orbits from a Hopf point", cli::cmd_periodic}},
        {"handling", {"slowly varying drive schedules", cli::cmd_handling}},
        {"figures", {"data for every figure from the bundled swimmer directory", cli::cmd_figures}},
    };

    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, entry] : commands) {
        auto* sub = app.add_subcommand(name, entry.first);
        add_common(sub, cfg, raw);
        subs[name] = sub;
    }
    subs["simulate"]->add_option("--q0", cfg.q0, "initial quaternion q1,q2,q3,q4");
    subs["simulate"]->add_option("--output-dt", cfg.output_dt, "sampling interval");
    subs["simulate"]->add_flag("!--no-position", cfg.position, "skip the lab-frame position");
    subs["basins"]->add_option("--samples", cfg.samples, "number of initial orientations");
    subs["periodic"]->add_option("--orbit-stride", cfg.orbit_stride, "write every n-th orbit");
    auto* h = subs["handling"];
    h->add_option("--mode", cfg.mode, "fold, lowma or loop");
    h->add_option("--rate", cfg.rate, "bound on |dMa/dt| and |dcos psi/dt|");
    h->add_option("--sweep-to", cfg.sweep_to, "cos psi turning point");
    h->add_option("--side", cfg.side, "+1 or -1");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        for (const auto& [name, sub] : subs)
            if (sub->parsed()) cfg.command = name;
        if (!raw.ma.empty()) cfg.ma = cli::Range::parse(raw.ma);
        if (!raw.cospsi.empty()) cfg.cospsi = cli::Range::parse(raw.cospsi);
        return commands.at(cfg.command).second(cfg);
    } catch (const cli::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "failed: %s\n", e.what());
        return 3;
    }
}
