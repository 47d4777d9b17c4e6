#include "commands.hpp"

#include "output.hpp"

#include "magswim/atlas.hpp"
#include "magswim/dynamics.hpp"
#include "magswim/optimize.hpp"
#include "magswim/periodic.hpp"
#include "magswim/regimes.hpp"
#include "magswim/stability.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace cli {

using namespace magswim;
using nlohmann::json;

Range Range::parse(const std::string& text)
{
    Range r;
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    try {
        if (parts.size() == 1) {
            r.a = r.b = std::stod(parts[0]);
        } else if (parts.size() == 3) {
            r.a = std::stod(parts[0]);
            r.b = std::stod(parts[1]);
            r.n = std::stoi(parts[2]);
        } else {
            throw ValidationError("range '" + text + "' must be A or A:B:N");
        }
    } catch (const std::logic_error&) {
        throw ValidationError("range '" + text + "' is not numeric");
    }
    if (!std::isfinite(r.a) || !std::isfinite(r.b) || r.n < 1) throw ValidationError("range '" + text + "' is invalid");
    return r;
}

namespace {

constexpr double pi = std::numbers::pi;

json range_json(const std::optional<Range>& r)
{
    if (!r) return nullptr;
    return {{"from", r->a}, {"to", r->b}, {"n", r->n}};
}

json config_json(const RunConfig& c)
{
    return {{"command", c.command},   {"swimmer", c.swimmer},     {"ma", range_json(c.ma)},
            {"cospsi", range_json(c.cospsi)}, {"theta", c.theta_n}, {"phi", c.phi_n},
            {"seed", c.seed},         {"t_end", c.t_end},         {"tol", c.tol},
            {"threads", c.threads},   {"samples", c.samples},     {"q0", c.q0},
            {"output_dt", c.output_dt}, {"position", c.position}, {"mode", c.mode},
            {"rate", c.rate},         {"sweep_to", c.sweep_to},   {"side", c.side},
            {"orbit_stride", c.orbit_stride}};
}

void validate_common(const RunConfig& c)
{
    if (c.swimmer.empty()) throw ValidationError("--swimmer is required");
    if (c.theta_n < 2 || c.phi_n < 2) throw ValidationError("--theta and --phi grids need at least 2 points");
    if (!(c.tol >= 1e-12 && c.tol <= 1e-6)) throw ValidationError("--tol must lie in [1e-12, 1e-6]");
    if (!(c.t_end > 0.0)) throw ValidationError("--t-end must be positive");
    if (c.ma && (c.ma->a < 0.0 || c.ma->b < 0.0)) throw ValidationError("--ma must be non-negative");
    if (c.cospsi && (std::abs(c.cospsi->a) > 1.0 || std::abs(c.cospsi->b) > 1.0))
        throw ValidationError("--cospsi must lie in [-1, 1]");
}

Context make_context(const RunConfig& c, const std::filesystem::path& swimmer_file)
{
    Context ctx;
    ctx.out_dir = c.out;
    try {
        ctx.swimmer = load_swimmer_file(swimmer_file);
        ctx.dec = decompose(ctx.swimmer);
    } catch (const std::invalid_argument& e) {
        throw ValidationError(e.what());
    }
    ctx.info = {c.argv.empty() ? "magswim " + c.command : c.argv, ctx.swimmer.name, ctx.swimmer.source_hash,
                config_json(c).dump()};
    return ctx;
}

Context make_context(const RunConfig& c)
{
    validate_common(c);
    if (std::filesystem::is_directory(c.swimmer)) throw ValidationError("--swimmer must name a JSON file");
    return make_context(c, c.swimmer);
}

std::pair<double, double> single_point(const RunConfig& c, const char* what)
{
    if (!c.ma || !c.cospsi) throw ValidationError(std::string(what) + " needs --ma and --cospsi");
    if (c.ma->n != 1 || c.cospsi->n != 1) throw ValidationError(std::string(what) + " takes single values for --ma and --cospsi");
    return {c.ma->a, c.cospsi->a};
}

json equilibrium_json(const atlas::Equilibrium& e)
{
    json ev = json::array();
    for (const auto& z : e.eigenvalues.eigenvalues) ev.push_back({z.real(), z.imag()});
    return {{"theta", e.theta}, {"phi", e.phi},     {"Ma", e.Ma},     {"cos_psi", e.cos_psi},
            {"v_ax", e.v_ax},   {"index", e.index}, {"marginal", e.marginal}, {"near_fold", e.near_fold},
            {"e3", to_json(e.e3)}, {"B", to_json(e.B)}, {"eigenvalues", ev}};
}

json tracked_json(const std::optional<dynamics::TrackedEquilibrium>& t)
{
    if (!t) return nullptr;
    return {{"theta", t->theta}, {"phi", t->phi}, {"v_ax", t->v_ax}, {"index", t->index}, {"distance", t->distance}};
}

json schedule_json(const dynamics::ScheduleResult& r)
{
    json ev = json::array();
    for (const auto& e : r.events)
        ev.push_back({{"kind", e.kind}, {"t", e.t}, {"Ma", e.Ma}, {"cos_psi", e.cos_psi}, {"branch", e.branch},
                      {"note", e.note}, {"equilibrium", tracked_json(e.eq)}});
    return {{"events", ev}, {"jumps", r.jumps}, {"max_norm_drift", r.max_norm_drift}, {"error", r.error},
            {"final", tracked_json(r.final_eq)}};
}

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// ---------------------------------------------------------------------------------------------
// Building blocks shared by the single commands and `figures`.

void write_atlas(const Context& ctx, const std::string& prefix, int nt, int np, int curve_res)
{
    {
        auto os = open_csv(ctx, prefix + "chart.csv");
        atlas::write_chart_csv(os, ctx.dec, nt, np);
    }
    auto curves = stability::fold_curves(ctx.dec, curve_res);
    for (auto& h : stability::hopf_curves(ctx.dec, curve_res)) curves.push_back(std::move(h));
    {
        auto os = open_csv(ctx, prefix + "curves.csv");
        stability::write_curves_csv(os, curves);
    }
    {
        auto os = open_csv(ctx, prefix + "intersections.csv");
        atlas::write_intersections_csv(os, atlas::self_intersections(ctx.dec));
    }
    write_script(ctx, prefix + "atlas.gp",
                 "set xlabel 'theta'\nset ylabel 'phi'\nset key off\n"
                 "set contour base\nset view map\nunset surface\nset dgrid3d " + std::to_string(nt / 4) + "," +
                     std::to_string(np / 4) + "\n"
                 "set multiplot layout 1,2\n"
                 "set title 'v_ax with folds (black) and Hopf curves (red)'\n"
                 "plot '" + prefix + "chart.csv' skip 5 using 1:2:5 with image, \\\n"
                 "     '" + prefix + "curves.csv' skip 5 using ($1==0?$3:1/0):4 with points pt 7 ps 0.2 lc 'black', \\\n"
                 "     '" + prefix + "curves.csv' skip 5 using 3:($1==0?1/0:$4) with points pt 7 ps 0.2 lc 'red'\n"
                 "set title 'stability index'\n"
                 "plot '" + prefix + "chart.csv' skip 5 using 1:2:6 with image\n"
                 "unset multiplot\n");
}

regimes::RegimeDiagram write_regimes(const Context& ctx, const std::string& prefix, Range ma, Range cp, unsigned threads)
{
    const auto d = regimes::regime_diagram(ctx.dec, ma.a, ma.b, cp.a, cp.b, ma.n, cp.n, threads);
    {
        auto os = open_csv(ctx, prefix + "regimes.csv");
        regimes::write_regimes_csv(os, d);
    }
    std::ostringstream js;
    regimes::write_regimes_json(js, d);
    write_json(ctx, prefix + "regimes.json", {{"diagram", json::parse(js.str())}});
    write_script(ctx, prefix + "regimes.gp",
                 "set xlabel 'Ma'\nset ylabel 'cos psi'\nset key outside\n"
                 "plot for [s=0:2] '" + prefix + "regimes.csv' skip 5 using ($3==s?$1:1/0):2:4 "
                 "with points pt 5 ps 0.4 lc variable title sprintf('%d stable', s)\n");
    return d;
}

Range default_ma(const PDecomposition& dec, int n) { return {0.0, 1.05 * atlas::chart_ranges(dec, 200).max_Ma, n}; }
Range default_cospsi(int n) { return {-1.0, 1.0, n}; }

json drive_json(const optimize::DriveOptimum& o)
{
    return {{"theta", o.theta},   {"phi", o.phi},       {"Ma", o.Ma},          {"cos_psi", o.cos_psi},
            {"v_ax", o.v_ax},     {"stable", o.stable}, {"near_hopf", o.near_hopf},
            {"empty_stable_set", o.empty_stable_set},   {"notice", o.notice}};
}

void write_vax_curves(const Context& ctx, const std::string& name, const std::vector<double>& cps, int res)
{
    auto os = open_csv(ctx, name);
    os << "cos_psi,branch,Ma,v_ax,stable,theta,phi,pitch,radius\n";
    for (double cp : cps) {
        const auto c = optimize::vax_vs_ma_curve(ctx.dec, cp, res);
        for (std::size_t b = 0; b < c.branches.size(); ++b)
            for (const auto& p : c.branches[b]) {
                const auto h = dynamics::helix_of(ctx.dec, atlas::eval_chart(ctx.dec, p.theta, p.phi));
                os << num(cp) << ',' << b << ',' << num(p.Ma) << ',' << num(p.v_ax) << ',' << (p.stable ? 1 : 0) << ','
                   << num(p.theta) << ',' << num(p.phi) << ',' << num(h.pitch) << ',' << num(h.radius) << '\n';
            }
    }
}

std::vector<stability::CurvePoint> seedable_hopf_points(const PDecomposition& dec, int res)
{
    std::vector<stability::CurvePoint> out;
    for (const auto& c : stability::hopf_curves(dec, res))
        for (const auto& p : c.points)
            if (p.phi <= pi / 2 && p.lambda_i >= 1e-3) out.push_back(p);
    return out;
}

json branch_json(const periodic::Branch& b)
{
    int stable = 0;
    for (const auto& o : b.orbits) stable += o.stable;
    json j = {{"T", b.T},
              {"start", {{"theta", b.start.theta}, {"phi", b.start.phi}, {"Ma", b.start.Ma}, {"cos_psi", b.start.cos_psi}, {"lambda_i", b.start.lambda_i}}},
              {"orbits", b.orbits.size()},
              {"stable_orbits", stable},
              {"complete", b.complete},
              {"reason", b.reason}};
    if (b.end) j["end"] = {{"theta", b.end->theta}, {"phi", b.end->phi}, {"Ma", b.end->Ma}, {"cos_psi", b.end->cos_psi}};
    return j;
}

void write_phase_portrait(const Context& ctx, const std::string& name, double Ma, double cp, int n, std::uint64_t seed,
                          double t_end, double tol)
{
    auto os = open_csv(ctx, name);
    os << "trajectory,t,x,y,z\n";
    dynamics::IntegrateOptions o;
    o.output_dt = t_end / 500;
    for (int k = 0; k < n; ++k) {
        const auto tr = dynamics::integrate_orientation(ctx.dec, dynamics::random_orientation(seed, k), Ma, cp, t_end, tol, o);
        for (const auto& s : tr.samples) {
            // Vector part in the unit ball, q and -q identified through q4 >= 0.
            const Vec4 q = dynamics::canonical(s.q.normalized());
            os << k << ',' << num(s.t) << ',' << num(q(0)) << ',' << num(q(1)) << ',' << num(q(2)) << '\n';
        }
    }
}

}  // namespace

// ---------------------------------------------------------------------------------------------

int cmd_atlas(const RunConfig& c)
{
    const auto ctx = make_context(c);
    write_atlas(ctx, "", c.theta_n, c.phi_n, std::max(c.theta_n, c.phi_n));
    const auto r = atlas::chart_ranges(ctx.dec, std::max(c.theta_n, c.phi_n));
    json eqs = json::array();
    if (c.ma && c.cospsi && c.ma->n == 1 && c.cospsi->n == 1)
        for (const auto& e : atlas::solve_equilibria(ctx.dec, c.ma->a, c.cospsi->a)) eqs.push_back(equilibrium_json(e));
    write_json(ctx, "atlas.json",
               {{"sigma1", ctx.dec.sigma1}, {"sigma2", ctx.dec.sigma2}, {"c01", ctx.dec.c01}, {"c02", ctx.dec.c02},
                {"c11", ctx.dec.c11},       {"c12", ctx.dec.c12},       {"theta0", ctx.dec.theta0},
                {"max_Ma", r.max_Ma},       {"cos_psi_range", {r.cos_psi_min, r.cos_psi_max}},
                {"low_Ma_half_width", r.low_Ma_half_width}, {"equilibria", eqs}});
    return 0;
}

int cmd_regimes(const RunConfig& c)
{
    const auto ctx = make_context(c);
    const Range ma = c.ma.value_or(default_ma(ctx.dec, 200));
    const Range cp = c.cospsi.value_or(default_cospsi(200));
    if (ma.n < 2 || cp.n < 2) throw ValidationError("regimes needs at least 2 points per axis");
    write_regimes(ctx, "", ma, cp, c.threads);
    return 0;
}

int cmd_simulate(const RunConfig& c)
{
    const auto ctx = make_context(c);
    const auto [Ma, cp] = single_point(c, "simulate");
    if (!(c.output_dt > 0.0)) throw ValidationError("--output-dt must be positive");
    Vec4 q0;
    if (c.q0.empty()) {
        q0 = dynamics::random_orientation(c.seed, 0);
    } else {
        std::stringstream ss(c.q0);
        int k = 0;
        for (std::string p; std::getline(ss, p, ',') && k < 4; ++k) q0(k) = std::stod(p);
        if (k != 4 || q0.norm() == 0.0) throw ValidationError("--q0 must be four comma-separated numbers, not all zero");
        q0.normalize();
    }
    dynamics::IntegrateOptions o;
    o.output_dt = c.output_dt;
    const auto tr = c.position ? dynamics::integrate_full(ctx.dec, q0, Vec3::Zero(), Ma, cp, c.t_end, c.tol, o)
                               : dynamics::integrate_orientation(ctx.dec, q0, Ma, cp, c.t_end, c.tol, o);
    {
        auto os = open_csv(ctx, "trajectory.csv");
        os << "t,q1,q2,q3,q4,x,y,z\n";
        for (const auto& s : tr.samples)
            os << num(s.t) << ',' << num(s.q(0)) << ',' << num(s.q(1)) << ',' << num(s.q(2)) << ',' << num(s.q(3)) << ','
               << num(s.x(0)) << ',' << num(s.x(1)) << ',' << num(s.x(2)) << '\n';
    }
    json nearest = nullptr;
    double best = 1e300;
    for (const auto& e : atlas::solve_equilibria(ctx.dec, Ma, cp)) {
        const double d = dynamics::geodesic_distance(tr.samples.back().q, dynamics::equilibrium_quaternion(e));
        if (d < best) {
            best = d;
            nearest = equilibrium_json(e);
            nearest["distance"] = d;
        }
    }
    write_json(ctx, "simulate.json",
               {{"q0", {q0(0), q0(1), q0(2), q0(3)}}, {"steps", tr.steps}, {"max_norm_drift", tr.max_norm_drift},
                {"error", tr.error}, {"nearest_equilibrium", nearest}});
    write_script(ctx, "simulate.gp",
                 "set multiplot layout 1,2\nset xlabel 't'\nplot for [k=2:5] 'trajectory.csv' skip 5 using 1:k with lines title columnhead(k)\n"
                 "set xlabel 'x'\nset ylabel 'y'\nset zlabel 'z'\nsplot 'trajectory.csv' skip 5 using 6:7:8 with lines notitle\nunset multiplot\n");
    if (!tr.error.empty()) throw std::runtime_error("integration failed: " + tr.error);
    return 0;
}

int cmd_basins(const RunConfig& c)
{
    const auto ctx = make_context(c);
    const auto [Ma, cp] = single_point(c, "basins");
    if (c.samples < 1) throw ValidationError("--samples must be positive");
    dynamics::BasinOptions o;
    o.t_end = c.t_end;
    o.tol = c.tol;
    o.threads = c.threads;
    const auto r = dynamics::basin_sample(ctx.dec, Ma, cp, c.samples, c.seed, o);
    {
        auto os = open_csv(ctx, "basins.csv");
        os << "sample,q1,q2,q3,q4,attractor,t_converge,distance\n";
        for (std::size_t k = 0; k < r.samples.size(); ++k) {
            const auto& s = r.samples[k];
            os << k << ',' << num(s.q0(0)) << ',' << num(s.q0(1)) << ',' << num(s.q0(2)) << ',' << num(s.q0(3)) << ','
               << s.attractor << ',' << num(s.t_converge) << ',' << num(s.distance) << '\n';
        }
    }
    json stable = json::array();
    std::vector<int> counts(r.stable.size(), 0);
    int unconverged = 0, periodic = 0;
    for (const auto& s : r.samples) {
        if (s.attractor >= 0) ++counts[s.attractor];
        unconverged += s.attractor == dynamics::attractor_unconverged;
        periodic += s.attractor == dynamics::attractor_periodic;
    }
    for (std::size_t k = 0; k < r.stable.size(); ++k) {
        auto e = equilibrium_json(r.stable[k]);
        e["basin_fraction"] = double(counts[k]) / r.samples.size();
        stable.push_back(e);
    }
    write_json(ctx, "basins.json",
               {{"stable", stable}, {"unconverged", unconverged}, {"periodic", periodic},
                {"max_norm_drift", r.max_norm_drift}});
    return 0;
}

int cmd_optimize(const RunConfig& c)
{
    const auto ctx = make_context(c);
    const int res = std::max(c.theta_n, c.phi_n);
    const auto st = optimize::optimize_drive(ctx.dec, true, res, c.threads);
    const auto any = optimize::optimize_drive(ctx.dec, false, res, c.threads);
    const auto axis = optimize::optimal_n(ctx.dec.M12, ctx.dec.M22);
    const auto mag = optimize::optimal_magnetisation(ctx.dec.M12, ctx.dec.M22);
    json cands = json::array();
    for (const auto& m : mag.candidates) cands.push_back(to_json(m));
    write_json(ctx, "optimize.json",
               {{"drive_stable", drive_json(st)},
                {"drive_any", drive_json(any)},
                {"axis", {{"n", to_json(axis.n)}, {"value", axis.value}, {"tied", axis.tied}, {"notice", axis.notice}}},
                {"magnetisation",
                 {{"n_star", to_json(mag.n_star)}, {"m_star", to_json(mag.m_star)}, {"v_ax_star", mag.v_ax_star},
                  {"Ma_star", mag.Ma_star}, {"cos_psi_star", mag.cos_psi_star}, {"hopf_found", mag.hopf_found},
                  {"best_stable_v_ax", mag.best_stable_v_ax}, {"candidates", cands}}}});
    const Range cp = c.cospsi.value_or(Range{-0.15, 0.15, 7});
    std::vector<double> cps;
    for (int k = 0; k < cp.n; ++k) cps.push_back(cp.at(k));
    write_vax_curves(ctx, "vax_curves.csv", cps, res);
    write_script(ctx, "optimize.gp",
                 "set xlabel 'Ma'\nset ylabel 'v_ax'\nset key outside\n"
                 "plot 'vax_curves.csv' skip 5 using 3:($5==1?$4:1/0) with points pt 7 ps 0.4 title 'stable', \\\n"
                 "     'vax_curves.csv' skip 5 using 3:($5==0?$4:1/0) with dots title 'unstable'\n");
    return 0;
}

int cmd_periodic(const RunConfig& c)
{
    const auto ctx = make_context(c);
    const auto [Ma, cp] = single_point(c, "periodic");
    const auto pts = seedable_hopf_points(ctx.dec, std::max(c.theta_n, c.phi_n));
    if (pts.empty()) throw std::runtime_error("no Hopf point with phi <= pi/2 and a usable frequency");
    const auto* best = &pts.front();
    for (const auto& p : pts)
        if (std::hypot(p.Ma - Ma, p.cos_psi - cp) < std::hypot(best->Ma - Ma, best->cos_psi - cp)) best = &p;
    periodic::ContinuationOptions o;
    o.shoot.tol = std::min(c.tol, 1e-12 * 10) < 1e-12 ? 1e-12 : std::min(c.tol, 1e-10);
    const auto b = periodic::continue_constant_period(ctx.dec, *best, +1, o);
    {
        auto os = open_csv(ctx, "branch.csv");
        periodic::write_branch_csv(os, b);
    }
    const int stride = std::max(1, c.orbit_stride);
    for (std::size_t k = 0; k < b.orbits.size(); k += stride) {
        char name[32];
        std::snprintf(name, sizeof name, "orbit_%03zu.csv", k);
        auto os = open_csv(ctx, name);
        periodic::write_orbit_csv(os, b.orbits[k]);
    }
    write_json(ctx, "periodic.json", {{"branch", branch_json(b)}});
    write_script(ctx, "periodic.gp",
                 "set xlabel 'Ma'\nset ylabel 'cos psi'\n"
                 "plot 'branch.csv' skip 5 using 1:2:($5) with linespoints lc variable title 'orbits (1 = stable)'\n");
    if (b.orbits.empty()) throw std::runtime_error("continuation produced no orbit: " + b.reason);
    return 0;
}

int cmd_handling(const RunConfig& c)
{
    const auto ctx = make_context(c);
    const auto [Ma, cp] = single_point(c, "handling");
    if (!(c.rate > 0.0)) throw ValidationError("--rate must be positive");
    if (c.side != 1 && c.side != -1) throw ValidationError("--side must be +1 or -1");

    const auto eqs = atlas::solve_equilibria(ctx.dec, Ma, cp);
    std::vector<const atlas::Equilibrium*> stable;
    for (const auto& e : eqs)
        if (e.index == 3 && !e.marginal) stable.push_back(&e);
    auto low_start = [&](double ma_low) {
        for (const auto& e : atlas::solve_equilibria(ctx.dec, ma_low, 0.0))
            if (e.index == 3 && !e.marginal) return dynamics::equilibrium_quaternion(e);
        throw std::runtime_error("no stable equilibrium at low Ma and cos psi = 0");
    };

    json body;
    if (c.mode == "fold") {
        if (stable.empty()) throw ValidationError("no stable equilibrium at the operating point");
        // Start on the faster stable branch, sweep cos psi past the fold and come back.
        const auto* start = stable.front();
        for (const auto* e : stable)
            if (std::abs(e->v_ax) > std::abs(start->v_ax)) start = e;
        auto s = dynamics::make_schedule(Ma, cp, c.rate);
        s.ramp_to(Ma, c.sweep_to, 500).ramp_to(Ma, cp, 2000);
        body["start"] = equilibrium_json(*start);
        body["run"] = schedule_json(dynamics::run_schedule(ctx.dec, s, dynamics::equilibrium_quaternion(*start)));
    } else if (c.mode == "lowma") {
        const double low = 0.1 * ctx.dec.sigma2;
        const double side = c.side * std::abs(c.sweep_to);
        auto s = dynamics::make_schedule(low, 0.0, c.rate);
        s.ramp_to(low, side, 1000).ramp_to(Ma, side, 1000).ramp_to(Ma, cp, 2000);
        body["run"] = schedule_json(dynamics::run_schedule(ctx.dec, s, low_start(low)));
    } else if (c.mode == "loop") {
        dynamics::LoopConfig lc;
        lc.Ma_star = Ma;
        lc.cos_psi_star = cp;
        lc.first_side = c.side;
        lc.rate_bound = c.rate;
        const auto L = dynamics::two_parameter_loop(ctx.dec, lc);
        json steps = json::array();
        for (const auto& st : L.steps) {
            auto j = schedule_json(st.run);
            j["step"] = st.step;
            j["description"] = st.description;
            steps.push_back(j);
        }
        body = {{"interval_boundary", L.interval_boundary}, {"v_ax_step3", L.v_ax_step3},
                {"v_ax_step6", L.v_ax_step6}, {"returned_to_step3", L.returned_to_step3},
                {"final", tracked_json(L.final_eq)}, {"steps", steps}};
    } else {
        throw ValidationError("--mode must be fold, lowma or loop");
    }
    json st = json::array();
    for (const auto* e : stable) st.push_back(equilibrium_json(*e));
    body["stable_at_target"] = st;
    write_json(ctx, "handling.json", body);
    return 0;
}

int cmd_figures(const RunConfig& c)
{
    validate_common(c);
    const std::filesystem::path dir = c.swimmer;
    if (!std::filesystem::is_directory(dir)) throw ValidationError("figures: --swimmer must be the directory of bundled swimmers");
    auto ctx_of = [&](const std::string& stem) {
        const auto f = dir / (stem + ".json");
        if (!std::filesystem::exists(f)) throw ValidationError("figures: missing " + f.string());
        return make_context(c, f);
    };
    const int n = std::max(c.theta_n, c.phi_n);
    const std::vector<double> cps = {-0.2588, -0.1736, -0.1432, -0.0872, -0.0836, 0.0, 0.0872, 0.1432, 0.1736, 0.2588};

    const auto A = ctx_of("swimmer_A");
    const auto B = ctx_of("swimmer_B");

    // Surface S of swimmer A and its self-intersections.
    write_atlas(A, "fig04_A_", n, n / 2, n);
    write_atlas(B, "fig04_B_", n, n / 2, n);

    write_regimes(A, "fig05_A_", default_ma(A.dec, n / 2), default_cospsi(n / 2), c.threads);
    write_regimes(B, "fig05_B_", default_ma(B.dec, n / 2), default_cospsi(n / 2), c.threads);

    {
        json sw = json::array();
        for (const auto* ctx : {&A, &B})
            sw.push_back({{"name", ctx->swimmer.name}, {"m", to_json(ctx->swimmer.m)}, {"hash", ctx->swimmer.source_hash}});
        write_json(A, "fig06_swimmers.json", {{"swimmers", sw}});
    }

    // Foils of constant-period branches along the Hopf curves on the half-surface phi <= pi/2.
    for (const auto* ctx : {&A, &B}) {
        const std::string tag = ctx == &A ? "A" : "B";
        const auto pts = seedable_hopf_points(ctx->dec, n);
        json branches = json::array();
        auto os = open_csv(*ctx, "fig07_" + tag + "_foils.csv");
        os << "branch,Ma,cos_psi,T,max_abs_multiplier,stable,amplitude\n";
        const std::size_t count = std::min<std::size_t>(6, pts.size());
        for (std::size_t k = 0; k < count; ++k) {
            const auto& p = pts[(k * pts.size()) / count];
            periodic::Branch b;
            try {
                b = periodic::continue_constant_period(ctx->dec, p);
            } catch (const std::exception& e) {
                b.start = p;
                b.reason = e.what();
            }
            for (const auto& o : b.orbits)
                os << k << ',' << num(o.Ma) << ',' << num(o.cos_psi) << ',' << num(o.T) << ',' << num(o.max_nontrivial)
                   << ',' << (o.stable ? 1 : 0) << ',' << num(o.amplitude) << '\n';
            branches.push_back(branch_json(b));
        }
        write_json(*ctx, "fig07_" + tag + "_foils.json", {{"branches", branches}});
    }

    write_phase_portrait(A, "fig08_A_portrait.csv", 0.015, 0.01, 40, c.seed, c.t_end, c.tol);
    write_phase_portrait(B, "fig08_B_portrait.csv", 0.2198, -0.3989, 40, c.seed, std::min(c.t_end, 500.0), c.tol);

    // Three-bead clusters: v_ax (and pitch) against Ma, regimes and charts with highlighted contours.
    struct Cluster {
        const char* stem;
        const char* fig_curves;
        const char* fig_regimes;
        const char* fig_chart;
        double hl_ma, hl_cp;
    };
    const Cluster clusters[] = {
        {"meshkati_90", "fig11", "fig12", "fig12", 0.06, -0.05},
        {"morozov_90_m011", "fig13", "fig14", "fig15", 0.0754, 0.0823},
        {"morozov_90_m11r2", "fig13", "fig14", "fig15", 0.0743, 0.0708},
        {"morozov_90_m101", "fig13", "fig14", "fig15", 0.0728, 0.0880},
        {"morozov_90_mstar", "fig13", "fig14", "fig15", 0.0675, 0.0912},
        {"morozov_122_m11r2", "fig16", "fig17", "fig18", 0.0933, 0.1338},
        {"morozov_122_mstar", "fig16", "fig17", "fig18", 0.0768, 0.1450},
    };
    for (const auto& cl : clusters) {
        const auto ctx = ctx_of(cl.stem);
        const std::string s = cl.stem;
        write_vax_curves(ctx, std::string(cl.fig_curves) + "_" + s + "_vax.csv", cps, n);
        write_regimes(ctx, std::string(cl.fig_regimes) + "_" + s + "_", default_ma(ctx.dec, n / 2), default_cospsi(n / 2), c.threads);
        {
            auto os = open_csv(ctx, std::string(cl.fig_chart) + "_" + s + "_chart.csv");
            atlas::write_chart_csv(os, ctx.dec, n, n / 2);
        }
        json eqs = json::array();
        for (const auto& e : atlas::solve_equilibria(ctx.dec, cl.hl_ma, cl.hl_cp)) eqs.push_back(equilibrium_json(e));
        const auto ch = chirality(ctx.swimmer);
        write_json(ctx, std::string(cl.fig_chart) + "_" + s + "_highlight.json",
                   {{"Ma", cl.hl_ma}, {"cos_psi", cl.hl_cp}, {"equilibria", eqs},
                    {"chirality", {{"ch_abs", ch.ch_abs}, {"f_perp", ch.f_perp}}}});
    }
    return 0;
}

}  // namespace cli
