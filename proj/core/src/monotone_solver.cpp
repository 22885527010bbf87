#include <algorithm>
#include <cmath>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "dmalab/errors.hpp"
#include "dmalab/solver.hpp"

namespace dmalab {

namespace {

// D_d u = a - c u0 with a = sum_k w_k u_k over the interior arms.
struct Direction {
    double c = 0.0;
    int nb[2] = {-1, -1};
    double w[2] = {0.0, 0.0};
};

struct LocalRoot {
    double u = 0.0;
    int pair = 0;
    double dA = 0.0;
    double dB = 0.0;
};

Direction direction_at(const Grid2D& g, std::size_t node, std::size_t d) {
    const StencilArm& p = g.arms[node][2 * d];
    const StencilArm& m = g.arms[node][2 * d + 1];
    const double scale = 2.0 / (p.length + m.length);
    Direction out;
    out.c = 2.0 / (p.length * m.length);
    out.nb[0] = p.neighbor;
    out.nb[1] = m.neighbor;
    out.w[0] = p.neighbor < 0 ? 0.0 : scale / p.length;
    out.w[1] = m.neighbor < 0 ? 0.0 : scale / m.length;
    return out;
}

double linear_part(const Direction& dir, const std::vector<double>& u) {
    double a = 0.0;
    for (int s = 0; s < 2; ++s) {
        if (dir.nb[s] >= 0) a += dir.w[s] * u[static_cast<std::size_t>(dir.nb[s])];
    }
    return a;
}

// Largest u0 with (A - C u0)^+ (B - D u0)^+ >= f, and its partial derivatives.
LocalRoot pair_root(double A, double C, double B, double D, double f) {
    const double K = B * C - D * A;
    const double sq = std::sqrt(K * K + 4.0 * D * C * f);
    double p = 0.0;
    if (K >= 0.0) {
        p = K + sq > 0.0 ? 2.0 * C * f / (K + sq) : 0.0;
    } else {
        p = (-K + sq) / (2.0 * D);
    }
    const double q = (K + D * p) / C;
    LocalRoot r;
    r.u = (A - p) / C;
    const double denom = D * p + C * q;
    if (denom > 0.0) {
        r.dA = q / denom;
        r.dB = p / denom;
    } else {
        r.dA = 1.0 / C;
        r.dB = 0.0;
    }
    return r;
}

LocalRoot node_root(const Grid2D& g, const std::vector<double>& u, std::size_t node, double f) {
    LocalRoot best;
    best.u = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < g.pairs.size(); ++k) {
        const Direction v = direction_at(g, node, static_cast<std::size_t>(g.pairs[k][0]));
        const Direction w = direction_at(g, node, static_cast<std::size_t>(g.pairs[k][1]));
        LocalRoot r = pair_root(linear_part(v, u), v.c, linear_part(w, u), w.c, f);
        if (r.u < best.u) {
            best = r;
            best.pair = static_cast<int>(k);
        }
    }
    return best;
}

}  // namespace

double ma_operator(const Grid2D& grid, const std::vector<double>& u, std::size_t node) {
    const double u0 = u[node];
    double best = std::numeric_limits<double>::infinity();
    for (const auto& pr : grid.pairs) {
        const Direction v = direction_at(grid, node, static_cast<std::size_t>(pr[0]));
        const Direction w = direction_at(grid, node, static_cast<std::size_t>(pr[1]));
        const double dv = std::max(0.0, linear_part(v, u) - v.c * u0);
        const double dw = std::max(0.0, linear_part(w, u) - w.c * u0);
        best = std::min(best, dv * dw);
    }
    return best;
}

DiscreteSolution solve_fixed_rhs(std::shared_ptr<const Grid2D> grid, const std::vector<double>& f,
                                 const SolverOptions& options, const std::vector<double>* initial) {
    if (!grid) throw ParameterError("solve_fixed_rhs: null grid");
    const Grid2D& g = *grid;
    const std::size_t N = g.size();
    if (f.size() != N) throw ParameterError("solve_fixed_rhs: right-hand side size mismatch");
    for (double v : f) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError("solve_fixed_rhs: f must be finite and >= 0");
    }

    DiscreteSolution sol;
    sol.grid = grid;
    sol.values = initial && initial->size() == N ? *initial : std::vector<double>(N, 0.0);
    std::vector<double>& u = sol.values;

    if (options.method == SweepMethod::Newton) {
        const std::size_t cap = std::min<std::size_t>(options.max_iterations, 500);
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        std::vector<Eigen::Triplet<double>> triplets;
        Eigen::VectorXd rhs(static_cast<Eigen::Index>(N));
        for (std::size_t it = 0; it < cap; ++it) {
            triplets.clear();
            for (std::size_t i = 0; i < N; ++i) {
                const LocalRoot r = node_root(g, u, i, f[i]);
                const auto& pr = g.pairs[static_cast<std::size_t>(r.pair)];
                const Direction v = direction_at(g, i, static_cast<std::size_t>(pr[0]));
                const Direction w = direction_at(g, i, static_cast<std::size_t>(pr[1]));
                const auto ii = static_cast<int>(i);
                triplets.emplace_back(ii, ii, 1.0);
                double affine = r.u;
                for (const auto& [dir, coef] : {std::pair{v, r.dA}, std::pair{w, r.dB}}) {
                    for (int s = 0; s < 2; ++s) {
                        if (dir.nb[s] < 0) continue;
                        const double c = coef * dir.w[s];
                        triplets.emplace_back(ii, dir.nb[s], -c);
                        affine -= c * u[static_cast<std::size_t>(dir.nb[s])];
                    }
                }
                rhs[static_cast<Eigen::Index>(i)] = affine;
            }
            Eigen::SparseMatrix<double> J(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
            J.setFromTriplets(triplets.begin(), triplets.end());
            lu.compute(J);
            if (lu.info() != Eigen::Success) {
                throw ConvergenceError("solve_fixed_rhs: singular policy matrix", sol.residual_history);
            }
            const Eigen::VectorXd next = lu.solve(rhs);
            double change = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                change = std::max(change, std::abs(next[static_cast<Eigen::Index>(i)] - u[i]));
                u[i] = next[static_cast<Eigen::Index>(i)];
            }
            sol.residual_history.push_back(change);
            sol.iterations = it + 1;
            if (change < options.tolerance) return sol;
        }
        throw ConvergenceError("solve_fixed_rhs: policy iteration did not converge", sol.residual_history);
    }

    std::vector<double> next(N);
    for (std::size_t it = 0; it < options.max_iterations; ++it) {
        double change = 0.0;
        if (options.method == SweepMethod::GaussSeidel) {
            for (std::size_t i = 0; i < N; ++i) {
                const double v = node_root(g, u, i, f[i]).u;
                change = std::max(change, std::abs(v - u[i]));
                u[i] = v;
            }
        } else {
            for (std::size_t i = 0; i < N; ++i) next[i] = node_root(g, u, i, f[i]).u;
            for (std::size_t i = 0; i < N; ++i) {
                change = std::max(change, std::abs(next[i] - u[i]));
                u[i] = next[i];
            }
        }
        sol.iterations = it + 1;
        if (it % 100 == 0 || change < options.tolerance) sol.residual_history.push_back(change);
        if (change < options.tolerance) return sol;
    }
    throw ConvergenceError("solve_fixed_rhs: sweep limit reached", sol.residual_history);
}

std::vector<double> frozen_rhs(const Grid2D& grid, const PowerLawRHS& F, const std::vector<double>& u, double floor) {
    std::vector<double> f(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) f[i] = F.at_distance(grid.distance[i], std::min(u[i], -floor));
    return f;
}

DiscreteSolution solve_singular(std::shared_ptr<const Grid2D> grid, const PowerLawRHS& F,
                                const SingularSchedule& schedule) {
    if (!grid) throw ParameterError("solve_singular: null grid");
    if (F.dimension() != 2) throw ParameterError("solve_singular: the lattice solver is two-dimensional");
    if (!(schedule.damping > 0.0 && schedule.damping <= 1.0)) throw ParameterError("solve_singular: damping in (0, 1]");
    if (!(schedule.first_floor > 0.0) || schedule.levels < 0) throw ParameterError("solve_singular: bad schedule");
    const std::size_t N = grid->size();

    if (F.alpha() == 0.0) {
        // No dependence on u: one frozen solve is exact.
        DiscreteSolution sol = solve_fixed_rhs(grid, frozen_rhs(*grid, F, std::vector<double>(N, -1.0), 1.0),
                                               schedule.inner);
        return sol;
    }

    std::vector<double> u(N, 0.0);
    std::vector<double> previous_level;
    std::vector<double> history;
    std::vector<double> floors;
    std::vector<double> level_changes;
    double theta = schedule.damping;
    std::size_t total = 0;

    for (int k = 0; k <= schedule.levels; ++k) {
        const double floor = std::ldexp(schedule.first_floor, -k);
        floors.push_back(floor);
        double last = std::numeric_limits<double>::infinity();
        int increases = 0;
        bool done = false;
        for (std::size_t m = 0; m < schedule.max_inner; ++m) {
            const auto f = frozen_rhs(*grid, F, u, floor);
            const DiscreteSolution step = solve_fixed_rhs(grid, f, schedule.inner, &u);
            double change = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                change = std::max(change, std::abs(step.values[i] - u[i]));
                u[i] = theta * step.values[i] + (1.0 - theta) * u[i];
            }
            history.push_back(change);
            ++total;
            if (change < schedule.inner_tolerance) {
                done = true;
                break;
            }
            increases = change > last ? increases + 1 : 0;
            last = change;
            if (increases >= 10) {
                theta *= 0.5;
                increases = 0;
                if (theta < 1e-3) throw ConvergenceError("solve_singular: damping fell below 1e-3", history);
            }
        }
        if (!done) throw ConvergenceError("solve_singular: inner Picard loop did not converge", history);
        if (!previous_level.empty()) {
            double diff = 0.0;
            for (std::size_t i = 0; i < N; ++i) diff = std::max(diff, std::abs(u[i] - previous_level[i]));
            level_changes.push_back(diff);
            if (diff < schedule.level_tolerance) break;
        }
        previous_level = u;
    }

    DiscreteSolution sol;
    sol.grid = grid;
    sol.values = std::move(u);
    sol.residual_history = std::move(history);
    sol.iterations = total;
    sol.floors = std::move(floors);
    sol.level_changes = std::move(level_changes);
    sol.damping = theta;
    return sol;
}

}  // namespace dmalab
