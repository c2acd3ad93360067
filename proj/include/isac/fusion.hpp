#pragma once

#include <cstdint>
#include <vector>

namespace isac {

// Fusion works on generic d-dimensional atom clouds so the same solver serves
// 2-D toys and full (position, velocity) particle states.
using Point = std::vector<double>;

struct PointCloud {
    std::vector<Point> atoms;
    std::vector<double> weights;  // sum to 1
};

struct Box {
    Point lo, hi;

    std::size_t dim() const { return lo.size(); }
    double volume() const {
        double v = 1.0;
        for (std::size_t j = 0; j < lo.size(); ++j) v *= hi[j] - lo[j];
        return v;
    }
    bool contains(const Point& x) const {
        for (std::size_t j = 0; j < lo.size(); ++j)
            if (x[j] < lo[j] || x[j] > hi[j]) return false;
        return true;
    }
};

struct GdSettings {
    double step = 0.5;
    int max_iters = 2000;
    // Per-constraint residual tolerance: |integral(g*) - 1| and each
    // |cell mass - u| must fall below max(tol, its Monte-Carlo resolution).
    double tol = 1e-3;
};

struct FusionProblem {
    std::vector<PointCloud> clouds;
    double kappa = 1.0;
    Box region;
    Point scale;  // per-axis standardization divisors for the ground norm
    int n_mci = 4000;
    GdSettings gd;
};

// Region = minimum covering box inflated 10% per side; scale = per-axis atom
// standard deviation (1 where degenerate) unless standardize is false.
FusionProblem make_problem(std::vector<PointCloud> clouds, double kappa, int n_mci = 4000,
                           double inflate = 0.1, bool standardize = true);

struct DualSolution {
    double v = 0.0;
    std::vector<std::vector<double>> gamma;  // [station][atom]
    bool converged = false;
    double grad_norm = 0.0;
    int iters = 0;
};

// Standardized Euclidean ground distance.
double ground_distance(const Point& x, const Point& atom, const FusionProblem& problem);

// exp{-1 - v - kappa * sum_z min_i (||x - x_{z,i}|| - gamma_{z,i})}
double g_star(const Point& x, const DualSolution& dual, const FusionProblem& problem);

// Gradient descent on the convex dual; Monte-Carlo integrals over a fixed
// seeded uniform sample of the region. kappa = 0 is handled in closed form.
DualSolution solve_dual(const FusionProblem& problem, std::uint64_t seed);

// argmin_i (||x - x_{z,i}|| - gamma_{z,i}), lowest index on ties.
std::size_t partition_index(const Point& x, std::size_t z, const DualSolution& dual,
                            const FusionProblem& problem);

// n_out importance draws targeting g* over the region, normalized. The
// proposal is a defensive mixture: half uniform over the region, half
// atom-centered Gaussians with per-axis plug-in bandwidths.
PointCloud fuse(const FusionProblem& problem, const DualSolution& dual, int n_out,
                std::uint64_t seed);

// ceil(n_out/Z) systematic draws from each cloud, pooled with uniform weights,
// truncated to n_out.
PointCloud stratified_fuse(const std::vector<PointCloud>& clouds, int n_out, std::uint64_t seed);

// Monte-Carlo diagnostics, all over a fresh uniform sample of the region.
double mc_mass(const DualSolution& dual, const FusionProblem& problem, std::uint64_t seed);
double cell_mass(std::size_t z, std::size_t i, const DualSolution& dual,
                 const FusionProblem& problem, std::uint64_t seed);
// convex dual objective integral(g*) + v - kappa sum gamma u, the quantity
// minimized by solve_dual; equals the primal value at stationarity.
double dual_objective(const DualSolution& dual, const FusionProblem& problem, std::uint64_t seed);
// entropy of g* minus kappa times the partition-coupled transport costs.
double primal_value(const DualSolution& dual, const FusionProblem& problem, std::uint64_t seed);

}  // namespace isac
