#pragma once

#include <array>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "dmalab/geometry.hpp"
#include "dmalab/rhs.hpp"

namespace dmalab {

/// One arm of a stencil direction: an interior neighbour, or a boundary
/// point at distance `length` carrying the value 0.
struct StencilArm {
    int neighbor = -1;
    double length = 0.0;
};

/// Origin-anchored lattice h Z^2 restricted to the interior, with cut cells.
struct Grid2D {
    double h = 0.0;
    int width = 1;
    std::shared_ptr<const ConvexDomain> domain;
    std::vector<Eigen::Vector2d> nodes;
    std::vector<std::array<int, 2>> lattice;
    std::vector<double> distance;
    /// Lattice directions; arms[node][2 d] is along +directions[d], arms[node][2 d + 1] along -.
    std::vector<std::array<int, 2>> directions;
    /// Orthogonal direction pairs as indices into `directions`.
    std::vector<std::array<int, 2>> pairs;
    std::vector<std::vector<StencilArm>> arms;

    std::size_t size() const noexcept { return nodes.size(); }
    /// Node index at lattice point (i, j), or -1.
    int find(int i, int j) const;

    std::unordered_map<long long, int> index;
};

/// Lattice of spacing h; stencil directions (p, q), (-q, p) with p > 0, q >= 0,
/// gcd(p, q) = 1 and max(p, q) <= width.
Grid2D discretize_domain(std::shared_ptr<const ConvexDomain> domain, double h, int width = 1);

/// min over direction pairs of (D_v u)^+ (D_w u)^+ at a node.
double ma_operator(const Grid2D& grid, const std::vector<double>& u, std::size_t node);

enum class SweepMethod { Newton, GaussSeidel, Jacobi };

struct SolverOptions {
    SweepMethod method = SweepMethod::Newton;
    double tolerance = 1e-10;
    std::size_t max_iterations = 100000;
};

struct DiscreteSolution {
    std::shared_ptr<const Grid2D> grid;
    std::vector<double> values;
    std::vector<double> residual_history;
    std::size_t iterations = 0;
    /// Regularisation floors visited (empty for a frozen right-hand side).
    std::vector<double> floors;
    std::vector<double> level_changes;
    double damping = 1.0;

    /// Bilinear interpolation of the lattice values; 0 at missing corners.
    double sample(const Vec& x) const;
    /// max over nodes of |ma_operator - f| / max(1, f).
    double residual(const std::vector<double>& f) const;
    /// Smallest stencil second difference over all nodes and directions.
    double min_second_difference() const;
    nlohmann::json metadata() const;
};

/// Solves min_pairs (D_v u)^+ (D_w u)^+ = f with u = 0 on the boundary.
DiscreteSolution solve_fixed_rhs(std::shared_ptr<const Grid2D> grid, const std::vector<double>& f,
                                 const SolverOptions& options = {}, const std::vector<double>* initial = nullptr);

struct SingularSchedule {
    double first_floor = 0.1;
    int levels = 12;  ///< floors first_floor * 2^-k for k = 0..levels
    double damping = 0.5;
    double level_tolerance = 1e-6;
    double inner_tolerance = 1e-9;
    std::size_t max_inner = 500;
    SolverOptions inner;
};

/// Continuation in the floor |u| >= eps_k with damped Picard iterations on the
/// frozen right-hand side F(x, min(u, -eps_k)).
DiscreteSolution solve_singular(std::shared_ptr<const Grid2D> grid, const PowerLawRHS& F,
                                const SingularSchedule& schedule = {});

/// F evaluated at the nodes with the value floor applied.
std::vector<double> frozen_rhs(const Grid2D& grid, const PowerLawRHS& F, const std::vector<double>& u, double floor);

}  // namespace dmalab
