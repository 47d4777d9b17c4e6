#include "contour.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace magswim::detail {
namespace {

struct Link {
    long a, b;  // edge ids
};

}  // namespace

std::vector<Polyline> zero_contours(const std::function<double(double, double)>& f, double x0, double period, int nx,
                                    double y0, double y1, int ny)
{
    const double hx = period / nx, hy = (y1 - y0) / ny;
    std::vector<double> v(static_cast<std::size_t>(nx) * (ny + 1));
    auto at = [&](int i, int j) -> double& { return v[static_cast<std::size_t>(j) * nx + ((i % nx) + nx) % nx]; };
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i < nx; ++i) at(i, j) = f(x0 + i * hx, y0 + j * hy);
    auto pos = [](double s) { return s >= 0.0; };

    auto hid = [&](int i, int j) { return (static_cast<long>(j) * nx + ((i % nx) + nx) % nx) * 2; };
    auto vid = [&](int i, int j) { return (static_cast<long>(j) * nx + ((i % nx) + nx) % nx) * 2 + 1; };

    std::unordered_map<long, std::pair<double, double>> crossing;
    auto edge_point = [&](long id) {
        auto it = crossing.find(id);
        if (it != crossing.end()) return it->second;
        const long cell = id / 2;
        const int i = static_cast<int>(cell % nx), j = static_cast<int>(cell / nx);
        double ax = x0 + i * hx, ay = y0 + j * hy;
        double bx = ax + ((id % 2 == 0) ? hx : 0.0), by = ay + ((id % 2 == 0) ? 0.0 : hy);
        double fa = f(ax, ay);
        for (int k = 0; k < 80; ++k) {
            const double mx = 0.5 * (ax + bx), my = 0.5 * (ay + by);
            const double fm = f(mx, my);
            if (fm == 0.0) { ax = bx = mx; ay = by = my; break; }
            if (pos(fm) == pos(fa)) { ax = mx; ay = my; fa = fm; } else { bx = mx; by = my; }
        }
        double px = 0.5 * (ax + bx), py = 0.5 * (ay + by);
        if (px >= x0 + period) px -= period;
        return crossing[id] = {px, py};
    };

    std::vector<Link> links;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const bool s0 = pos(at(i, j)), s1 = pos(at(i + 1, j)), s2 = pos(at(i + 1, j + 1)), s3 = pos(at(i, j + 1));
            const long bottom = hid(i, j), right = vid(i + 1, j), top = hid(i, j + 1), left = vid(i, j);
            std::vector<long> e;
            if (s0 != s1) e.push_back(bottom);
            if (s1 != s2) e.push_back(right);
            if (s2 != s3) e.push_back(top);
            if (s3 != s0) e.push_back(left);
            if (e.size() == 2) {
                links.push_back({e[0], e[1]});
            } else if (e.size() == 4) {
                const bool sc = pos(f(x0 + (i + 0.5) * hx, y0 + (j + 0.5) * hy));
                if (sc == s0) {
                    links.push_back({bottom, right});
                    links.push_back({top, left});
                } else {
                    links.push_back({bottom, left});
                    links.push_back({top, right});
                }
            }
        }
    }

    std::unordered_map<long, std::vector<std::size_t>> adj;
    for (std::size_t k = 0; k < links.size(); ++k) {
        adj[links[k].a].push_back(k);
        adj[links[k].b].push_back(k);
    }
    std::vector<bool> used(links.size(), false);
    std::vector<Polyline> out;

    auto walk = [&](long start) {
        Polyline pl;
        pl.push_back(edge_point(start));
        long cur = start;
        for (;;) {
            std::size_t next = links.size();
            for (std::size_t k : adj[cur])
                if (!used[k]) { next = k; break; }
            if (next == links.size()) break;
            used[next] = true;
            cur = (links[next].a == cur) ? links[next].b : links[next].a;
            pl.push_back(edge_point(cur));
        }
        return pl;
    };

    // Open curves first (ends on the y boundaries), then closed loops.
    std::vector<long> ends;
    for (const auto& [id, ks] : adj)
        if (ks.size() == 1) ends.push_back(id);
    std::sort(ends.begin(), ends.end());
    for (long id : ends) {
        if (used[adj[id][0]]) continue;
        out.push_back(walk(id));
    }
    for (std::size_t k = 0; k < links.size(); ++k) {
        if (used[k]) continue;
        out.push_back(walk(links[k].a));
    }
    return out;
}

}  // namespace magswim::detail
