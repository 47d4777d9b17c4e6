#include "magswim/regimes.hpp"
#include "magswim/parallel.hpp"

#include "json.hpp"

#include <iomanip>
#include <map>
#include <ostream>

namespace magswim::regimes {

Label regime_of(const PDecomposition& dec, double Ma, double cos_psi)
{
    if (Ma == 0.0) Ma = 1e-3 * dec.sigma2;
    Label l;
    for (const auto& e : atlas::solve_equilibria(dec, Ma, cos_psi)) {
        ++l.total;
        if (e.index == 3 && !e.marginal) ++l.stable;
        l.near_fold = l.near_fold || e.near_fold;
    }
    return l;
}

RegimeDiagram regime_diagram(const PDecomposition& dec, double ma0, double ma1, double c0, double c1, int nx, int ny,
                             unsigned threads)
{
    RegimeDiagram d;
    if (nx < 2 || ny < 2) throw std::invalid_argument("regime_diagram: grid needs at least 2x2 cells");
    for (int i = 0; i < nx; ++i) d.ma_axis.push_back(ma0 + (ma1 - ma0) * (i + 0.5) / nx);
    for (int j = 0; j < ny; ++j) d.cospsi_axis.push_back(c0 + (c1 - c0) * (j + 0.5) / ny);
    d.cells.resize(static_cast<std::size_t>(nx) * ny);
    parallel_for(d.cells.size(), threads, [&](std::size_t k) {
        d.cells[k] = regime_of(dec, d.ma_axis[k % nx], d.cospsi_axis[k / nx]);
    });
    return d;
}

void write_regimes_csv(std::ostream& os, const RegimeDiagram& d)
{
    os << "Ma,cos_psi,stable,total,label,near_fold\n";
    os << std::setprecision(12);
    for (std::size_t j = 0; j < d.cospsi_axis.size(); ++j)
        for (std::size_t i = 0; i < d.ma_axis.size(); ++i) {
            const Label& l = d.at(i, j);
            os << d.ma_axis[i] << ',' << d.cospsi_axis[j] << ',' << l.stable << ',' << l.total << ',' << l.str() << ','
               << (l.near_fold ? 1 : 0) << '\n';
        }
}

void write_regimes_json(std::ostream& os, const RegimeDiagram& d)
{
    using nlohmann::json;
    const std::size_t nx = d.ma_axis.size(), ny = d.cospsi_axis.size();
    const double hx = nx > 1 ? d.ma_axis[1] - d.ma_axis[0] : 0.0;
    const double hy = ny > 1 ? d.cospsi_axis[1] - d.cospsi_axis[0] : 0.0;

    std::map<std::string, std::size_t> histogram;
    std::map<std::string, json> rects;
    // Row runs of equal label, merged upward while the run above matches exactly.
    struct Run { std::size_t i0, i1, j0, j1; std::string label; };
    std::vector<Run> open;
    auto close = [&](const Run& r) {
        rects[r.label].push_back({d.ma_axis[r.i0] - hx / 2, d.ma_axis[r.i1] + hx / 2, d.cospsi_axis[r.j0] - hy / 2,
                                  d.cospsi_axis[r.j1] + hy / 2});
    };
    for (std::size_t j = 0; j < ny; ++j) {
        std::vector<Run> row;
        for (std::size_t i = 0; i < nx; ++i) {
            const std::string s = d.at(i, j).str();
            ++histogram[s];
            if (!row.empty() && row.back().label == s && row.back().i1 + 1 == i)
                row.back().i1 = i;
            else
                row.push_back({i, i, j, j, s});
        }
        std::vector<Run> next;
        for (auto& r : row) {
            bool merged = false;
            for (auto& o : open)
                if (o.i0 == r.i0 && o.i1 == r.i1 && o.label == r.label && o.j1 + 1 == j) {
                    o.j1 = j;
                    next.push_back(o);
                    o.label.clear();
                    merged = true;
                    break;
                }
            if (!merged) next.push_back(r);
        }
        for (const auto& o : open)
            if (!o.label.empty()) close(o);
        open = std::move(next);
    }
    for (const auto& o : open) close(o);

    json out;
    out["nx"] = nx;
    out["ny"] = ny;
    out["histogram"] = histogram;
    out["rectangles"] = rects;
    out["rectangle_format"] = {"Ma_lo", "Ma_hi", "cos_psi_lo", "cos_psi_hi"};
    os << out.dump(2) << '\n';
}

}  // namespace magswim::regimes
