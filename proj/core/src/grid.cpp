#include <cmath>
#include <limits>
#include <numeric>

#include "dmalab/errors.hpp"
#include "dmalab/solver.hpp"

namespace dmalab {

namespace {

long long lattice_key(int i, int j) {
    return (static_cast<long long>(i) << 32) ^ static_cast<long long>(static_cast<unsigned int>(j));
}

}  // namespace

int Grid2D::find(int i, int j) const {
    const auto it = index.find(lattice_key(i, j));
    return it == index.end() ? -1 : it->second;
}

Grid2D discretize_domain(std::shared_ptr<const ConvexDomain> domain, double h, int width) {
    if (!domain) throw ParameterError("discretize_domain: null domain");
    if (domain->dimension() != 2) throw ParameterError("discretize_domain: the lattice solver is two-dimensional");
    if (!(h > 0.0)) throw ParameterError("discretize_domain: h must be positive");
    if (width < 1 || width > 3) throw ParameterError("discretize_domain: stencil width must be 1, 2 or 3");
    if (h >= 0.5 * domain->diameter()) throw DiscretizationError("discretize_domain: h too large for the domain");

    Grid2D g;
    g.h = h;
    g.width = width;
    g.domain = domain;

    for (int p = 1; p <= width; ++p) {
        for (int q = 0; q <= width; ++q) {
            if (std::gcd(p, q) != 1) continue;
            const int a = static_cast<int>(g.directions.size());
            g.directions.push_back({p, q});
            g.directions.push_back({-q, p});
            g.pairs.push_back({a, a + 1});
        }
    }

    const Vec& lo = domain->bounds_lower();
    const Vec& hi = domain->bounds_upper();
    const double min_gap = domain->tolerance();
    const int i0 = static_cast<int>(std::floor(lo[0] / h)) - 1;
    const int i1 = static_cast<int>(std::ceil(hi[0] / h)) + 1;
    const int j0 = static_cast<int>(std::floor(lo[1] / h)) - 1;
    const int j1 = static_cast<int>(std::ceil(hi[1] / h)) + 1;
    for (int i = i0; i <= i1; ++i) {
        for (int j = j0; j <= j1; ++j) {
            Vec x(2);
            x << i * h, j * h;
            if (!domain->contains(x, 0.0)) continue;
            const double d = domain->signed_distance(x);
            if (!(d > min_gap)) continue;
            g.index.emplace(lattice_key(i, j), static_cast<int>(g.nodes.size()));
            g.nodes.emplace_back(x[0], x[1]);
            g.lattice.push_back({i, j});
            g.distance.push_back(d);
        }
    }
    if (g.nodes.empty()) throw DiscretizationError("discretize_domain: no interior lattice nodes at this spacing");

    const std::size_t nd = g.directions.size();
    g.arms.assign(g.nodes.size(), std::vector<StencilArm>(2 * nd));
    for (std::size_t k = 0; k < g.nodes.size(); ++k) {
        Vec x(2);
        x << g.nodes[k].x(), g.nodes[k].y();
        for (std::size_t d = 0; d < nd; ++d) {
            for (int sgn : {1, -1}) {
                const int di = sgn * g.directions[d][0];
                const int dj = sgn * g.directions[d][1];
                const double full = h * std::hypot(di, dj);
                StencilArm arm;
                arm.neighbor = g.find(g.lattice[k][0] + di, g.lattice[k][1] + dj);
                arm.length = full;
                if (arm.neighbor < 0) {
                    Vec dir(2);
                    dir << di, dj;
                    dir.normalize();
                    const double exit = domain->ray_exit(x, dir);
                    arm.length = std::min(exit, full);
                    if (!(arm.length > 0.0)) arm.length = std::max(exit, 1e-300);
                }
                g.arms[k][2 * d + (sgn > 0 ? 0 : 1)] = arm;
            }
        }
    }
    return g;
}

double DiscreteSolution::sample(const Vec& x) const {
    const Grid2D& g = *grid;
    const double fx = x[0] / g.h;
    const double fy = x[1] / g.h;
    const int i = static_cast<int>(std::floor(fx));
    const int j = static_cast<int>(std::floor(fy));
    const double tx = fx - i;
    const double ty = fy - j;
    auto at = [&](int a, int b) {
        const int k = g.find(a, b);
        return k < 0 ? 0.0 : values[static_cast<std::size_t>(k)];
    };
    return (1 - tx) * (1 - ty) * at(i, j) + tx * (1 - ty) * at(i + 1, j) + (1 - tx) * ty * at(i, j + 1) +
           tx * ty * at(i + 1, j + 1);
}

double DiscreteSolution::residual(const std::vector<double>& f) const {
    double worst = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        const double r = std::abs(ma_operator(*grid, values, k) - f[k]) / std::max(1.0, f[k]);
        worst = std::max(worst, r);
    }
    return worst;
}

double DiscreteSolution::min_second_difference() const {
    const Grid2D& g = *grid;
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < values.size(); ++k) {
        for (std::size_t d = 0; d < g.directions.size(); ++d) {
            const StencilArm& p = g.arms[k][2 * d];
            const StencilArm& m = g.arms[k][2 * d + 1];
            const double up = p.neighbor < 0 ? 0.0 : values[static_cast<std::size_t>(p.neighbor)];
            const double um = m.neighbor < 0 ? 0.0 : values[static_cast<std::size_t>(m.neighbor)];
            const double D = 2.0 / (p.length + m.length) * ((up - values[k]) / p.length + (um - values[k]) / m.length);
            worst = std::min(worst, D);
        }
    }
    return worst;
}

nlohmann::json DiscreteSolution::metadata() const {
    return {{"h", grid->h},
            {"stencil_width", grid->width},
            {"nodes", grid->size()},
            {"iterations", iterations},
            {"residual_history", residual_history},
            {"floors", floors},
            {"level_changes", level_changes},
            {"damping", damping}};
}

}  // namespace dmalab
