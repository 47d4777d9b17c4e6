#pragma once

#include <functional>
#include <utility>
#include <vector>

namespace magswim::detail {

using Polyline = std::vector<std::pair<double, double>>;

/// Zero level set of f over [x0, x0 + period) x [y0, y1] with x periodic.
/// Marching squares on an nx-by-(ny+1) grid; every crossing is refined by bisection on its cell edge.
std::vector<Polyline> zero_contours(const std::function<double(double, double)>& f, double x0, double period, int nx,
                                    double y0, double y1, int ny);

}  // namespace magswim::detail
