#pragma once

#include "magswim/atlas.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace magswim::regimes {

struct Label {
    int stable = 0;
    int total = 0;
    bool near_fold = false;

    std::string str() const { return std::to_string(stable) + "/" + std::to_string(total); }
};

struct RegimeDiagram {
    std::vector<double> ma_axis;      // cell centres
    std::vector<double> cospsi_axis;  // cell centres
    std::vector<Label> cells;         // row-major, ma fastest

    const Label& at(std::size_t i_ma, std::size_t j_cos) const { return cells[j_cos * ma_axis.size() + i_ma]; }
};

/// Ma = 0 is evaluated at Ma = 1e-3 sigma2: at Ma = 0 itself roots pair up and every spectrum is marginal.
Label regime_of(const PDecomposition& dec, double Ma, double cos_psi);

/// Counts at cell centres of an nx-by-ny grid over [ma0, ma1] x [c0, c1]. threads = 0 uses all cores.
RegimeDiagram regime_diagram(const PDecomposition& dec, double ma0, double ma1, double c0, double c1, int nx, int ny,
                             unsigned threads = 0);

void write_regimes_csv(std::ostream& os, const RegimeDiagram& d);
/// Summary JSON: label histogram and per-label merged cell rectangles.
void write_regimes_json(std::ostream& os, const RegimeDiagram& d);

}  // namespace magswim::regimes
