#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "isac/fusion.hpp"
#include "isac/rng.hpp"

using namespace isac;

namespace {

// two-station 2-D toy with five atoms each
FusionProblem toy_problem(double kappa, int n_mci = 4000) {
    PointCloud a, b;
    a.atoms = {{0.0, 0.0}, {1.0, 0.5}, {-0.5, 1.0}, {0.5, -1.0}, {-1.0, -0.5}};
    a.weights = {0.3, 0.2, 0.2, 0.2, 0.1};
    b.atoms = {{0.2, 0.1}, {0.9, 0.6}, {-0.6, 0.8}, {0.4, -0.9}, {-0.8, -0.6}};
    b.weights = {0.25, 0.25, 0.2, 0.15, 0.15};
    return make_problem({a, b}, kappa, n_mci, 0.1, false);
}

double cloud_mean(const PointCloud& c, std::size_t axis) {
    double m = 0.0;
    for (std::size_t i = 0; i < c.atoms.size(); ++i) m += c.weights[i] * c.atoms[i][axis];
    return m;
}

}  // namespace

TEST_CASE("zero tradeoff gives the uniform density over the region") {
    FusionProblem problem = toy_problem(0.0);
    const DualSolution dual = solve_dual(problem, 1);
    CHECK(dual.converged);
    const double expected = 1.0 / problem.region.volume();
    CHECK(g_star({0.1, 0.2}, dual, problem) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(g_star({-0.9, 0.8}, dual, problem) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("single-atom density decays as a Laplace kernel") {
    PointCloud c;
    c.atoms = {{0.0, 0.0}};
    c.weights = {1.0};
    FusionProblem problem = make_problem({c}, 2.0, 2000, 0.1, false);
    DualSolution dual;
    dual.v = 0.0;
    dual.gamma = {{0.0}};
    const double g0 = g_star({0.0, 0.0}, dual, problem);
    const double g1 = g_star({1.0, 0.0}, dual, problem);
    CHECK(g1 / g0 == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
}

TEST_CASE("one-dimensional single-atom dual matches the truncated-Laplace closed form") {
    PointCloud c;
    c.atoms = {{0.0}};
    c.weights = {1.0};
    FusionProblem problem = make_problem({c}, 5.0, 20000, 0.0, false);
    problem.region = {{-1.0}, {1.0}};  // exact interval, no inflation
    const DualSolution dual = solve_dual(problem, 7);
    CHECK(dual.converged);
    // normalizer of A e^{-kappa |x|} on [-1, 1]; gauge-invariant combination
    const double a_hat = std::exp(-1.0 - dual.v + 5.0 * dual.gamma[0][0]);
    const double a_true = 5.0 / (2.0 * (1.0 - std::exp(-5.0)));
    CHECK(a_hat == doctest::Approx(a_true).epsilon(0.02));
}

TEST_CASE("converged density integrates to one") {
    FusionProblem problem = toy_problem(1.5);
    const DualSolution dual = solve_dual(problem, 3);
    CHECK(dual.converged);
    const double mass = mc_mass(dual, problem, 555);
    CHECK(mass > 0.95);
    CHECK(mass < 1.05);
}

TEST_CASE("per-cell mass matches the station weights at stationarity") {
    FusionProblem problem = toy_problem(1.5, 8000);
    const DualSolution dual = solve_dual(problem, 3);
    REQUIRE(dual.converged);
    // Monte-Carlo standard error of the cell-mass estimator
    const int n = problem.n_mci;
    for (std::size_t z = 0; z < 2; ++z) {
        for (std::size_t i = 0; i < 5; ++i) {
            Rng sample_rng = Rng::stream(999, 0x66ULL);
            double mean = 0.0, sq = 0.0;
            for (int s = 0; s < n; ++s) {
                Point x(2);
                for (int j = 0; j < 2; ++j)
                    x[static_cast<std::size_t>(j)] =
                        sample_rng.uniform(problem.region.lo[static_cast<std::size_t>(j)],
                                           problem.region.hi[static_cast<std::size_t>(j)]);
                const double val = (partition_index(x, z, dual, problem) == i)
                                       ? g_star(x, dual, problem) * problem.region.volume()
                                       : 0.0;
                mean += val;
                sq += val * val;
            }
            mean /= n;
            const double var = sq / n - mean * mean;
            const double se = std::sqrt(var / n);
            CHECK(std::abs(mean - problem.clouds[z].weights[i]) < 3.0 * se + 5e-3);
        }
    }
}

TEST_CASE("partition ties break to the lowest index") {
    PointCloud c;
    c.atoms = {{-1.0, 0.0}, {1.0, 0.0}};
    c.weights = {0.5, 0.5};
    FusionProblem problem = make_problem({c}, 1.0, 2000, 0.1, false);
    DualSolution dual;
    dual.v = 0.0;
    dual.gamma = {{0.0, 0.0}};
    CHECK(partition_index({0.0, 0.0}, 0, dual, problem) == 0);  // equidistant
    CHECK(partition_index({0.9, 0.0}, 0, dual, problem) == 1);
    dual.gamma[0][1] = 100.0;  // huge multiplier absorbs everything
    CHECK(partition_index({-1.0, 0.0}, 0, dual, problem) == 1);
}

TEST_CASE("partition cells are disjoint and cover the region") {
    FusionProblem problem = toy_problem(1.0);
    DualSolution dual;
    dual.v = 0.0;
    dual.gamma = {{0.1, -0.2, 0.0, 0.3, 0.05}, {0.0, 0.0, 0.1, -0.1, 0.2}};
    Rng rng(31);
    for (int s = 0; s < 500; ++s) {
        Point x{rng.uniform(problem.region.lo[0], problem.region.hi[0]),
                rng.uniform(problem.region.lo[1], problem.region.hi[1])};
        for (std::size_t z = 0; z < 2; ++z) {
            const std::size_t i = partition_index(x, z, dual, problem);
            CHECK(i < 5);  // argmin totality: exactly one cell per point
        }
    }
}

TEST_CASE("fused weights are normalized") {
    FusionProblem problem = toy_problem(1.0);
    const DualSolution dual = solve_dual(problem, 5);
    const PointCloud fused = fuse(problem, dual, 300, 17);
    REQUIRE(fused.atoms.size() == 300);
    double total = 0.0;
    for (double w : fused.weights) total += w;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("strong concentration recovers the input mean for one station") {
    PointCloud c;
    c.atoms = {{0.3, -0.2}, {0.5, 0.1}, {0.1, 0.4}};
    c.weights = {0.5, 0.3, 0.2};
    FusionProblem problem = make_problem({c}, 40.0, 20000, 0.4, false);
    const DualSolution dual = solve_dual(problem, 11);
    const PointCloud fused = fuse(problem, dual, 20000, 23);
    CHECK(cloud_mean(fused, 0) == doctest::Approx(cloud_mean(c, 0)).epsilon(0.15));
    CHECK(cloud_mean(fused, 1) == doctest::Approx(cloud_mean(c, 1)).epsilon(0.25));
}

TEST_CASE("fused-weight entropy does not increase with the tradeoff") {
    double prev = 1e300;
    for (double kappa : {0.5, 2.0, 8.0}) {
        FusionProblem problem = toy_problem(kappa);
        const DualSolution dual = solve_dual(problem, 5);
        const PointCloud fused = fuse(problem, dual, 2000, 17);  // same draw seed each time
        double h = 0.0;
        for (double w : fused.weights)
            if (w > 0.0) h -= w * std::log(w);
        CHECK(h < prev + 1e-9);
        prev = h;
    }
}

TEST_CASE("stratified pooling of one cloud is a plain resample") {
    PointCloud c;
    c.atoms = {{1.0, 0.0}, {2.0, 0.0}, {3.0, 0.0}};
    c.weights = {0.0, 1.0, 0.0};
    const PointCloud out = stratified_fuse({c}, 12, 5);
    REQUIRE(out.atoms.size() == 12);
    for (const auto& x : out.atoms) CHECK(x[0] == 2.0);
    for (double w : out.weights) CHECK(w == doctest::Approx(1.0 / 12.0));
}

TEST_CASE("stratified pooling keeps the requested size and averages the clouds") {
    Rng rng(77);
    PointCloud a, b;
    for (int i = 0; i < 200; ++i) {
        a.atoms.push_back({rng.gauss() + 2.0});
        a.weights.push_back(1.0 / 200.0);
        b.atoms.push_back({rng.gauss() - 2.0});
        b.weights.push_back(1.0 / 200.0);
    }
    const PointCloud out = stratified_fuse({a, b}, 301, 9);
    CHECK(out.atoms.size() == 301);
    double mean = 0.0;
    for (const auto& x : out.atoms) mean += x[0];
    mean /= 301.0;
    CHECK(std::abs(mean - 0.0) < 0.3);  // average of the two cloud means
}

TEST_CASE("dual objective is convex along random segments") {
    FusionProblem problem = toy_problem(2.0);
    Rng rng(13);
    for (int inst = 0; inst < 5; ++inst) {
        DualSolution a, b, mid;
        a.v = rng.uniform(-1.0, 3.0);
        b.v = rng.uniform(-1.0, 3.0);
        a.gamma = {{0, 0, 0, 0, 0}, {0, 0, 0, 0, 0}};
        b.gamma = a.gamma;
        for (auto& row : a.gamma)
            for (auto& g : row) g = rng.uniform(-0.5, 0.5);
        for (auto& row : b.gamma)
            for (auto& g : row) g = rng.uniform(-0.5, 0.5);
        mid.v = 0.5 * (a.v + b.v);
        mid.gamma = a.gamma;
        for (std::size_t z = 0; z < 2; ++z)
            for (std::size_t i = 0; i < 5; ++i)
                mid.gamma[z][i] = 0.5 * (a.gamma[z][i] + b.gamma[z][i]);
        const double da = dual_objective(a, problem, 42);
        const double db = dual_objective(b, problem, 42);
        const double dm = dual_objective(mid, problem, 42);
        CHECK(dm <= 0.5 * (da + db) + 1e-9);
    }
}

TEST_CASE("primal and dual values agree at convergence") {
    FusionProblem problem = toy_problem(1.5, 8000);
    const DualSolution dual = solve_dual(problem, 3);
    REQUIRE(dual.converged);
    const double d = dual_objective(dual, problem, 101);
    const double p = primal_value(dual, problem, 101);
    CHECK(p == doctest::Approx(d).epsilon(0.05));
}
