#include "isac/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "isac/rng.hpp"

namespace isac {

namespace {

std::vector<Point> draw_uniform(const Box& box, int n, std::uint64_t seed) {
    Rng rng = Rng::stream(seed, 0x66ULL);
    std::vector<Point> out(static_cast<std::size_t>(n));
    for (auto& x : out) {
        x.resize(box.dim());
        for (std::size_t j = 0; j < box.dim(); ++j) x[j] = rng.uniform(box.lo[j], box.hi[j]);
    }
    return out;
}

// Defensive-mixture proposal over the region: half uniform, half
// atom-centered Gaussians with per-axis plug-in bandwidths. Serves both the
// dual solver's Monte-Carlo integrals and fuse(): once kappa is appreciable
// g* concentrates near the atoms and plain uniform sampling loses the mass.
struct MixtureProposal {
    const FusionProblem& problem;
    std::vector<double> h;  // per-axis kernel bandwidths

    explicit MixtureProposal(const FusionProblem& p) : problem(p) {
        const std::size_t d = p.region.dim();
        std::size_t atom_count = 0;
        for (const auto& c : p.clouds) atom_count += c.atoms.size();
        const double bw = std::pow(static_cast<double>(std::max<std::size_t>(atom_count, 2)),
                                   -1.0 / (static_cast<double>(d) + 4.0));
        h.resize(d);
        for (std::size_t j = 0; j < d; ++j) h[j] = p.scale[j] * bw;
    }

    double density(const Point& x) const {
        const std::size_t d = problem.region.dim();
        const double z_count = static_cast<double>(problem.clouds.size());
        double q = problem.region.contains(x) ? 0.5 / problem.region.volume() : 0.0;
        for (const auto& c : problem.clouds) {
            for (std::size_t i = 0; i < c.atoms.size(); ++i) {
                double expo = 0.0;
                double norm = 1.0;
                for (std::size_t j = 0; j < d; ++j) {
                    const double t = (x[j] - c.atoms[i][j]) / h[j];
                    expo -= 0.5 * t * t;
                    norm *= h[j] * 2.5066282746310002;  // sqrt(2 pi)
                }
                q += 0.5 * (c.weights[i] / z_count) * std::exp(expo) / norm;
            }
        }
        return q;
    }

    Point draw(Rng& rng) const {
        const std::size_t d = problem.region.dim();
        const double z_count = static_cast<double>(problem.clouds.size());
        Point x(d);
        if (rng.uniform() < 0.5) {
            for (std::size_t j = 0; j < d; ++j)
                x[j] = rng.uniform(problem.region.lo[j], problem.region.hi[j]);
            return x;
        }
        // kernel draws may leave the box; they are kept with zero integration
        // weight so the estimator stays unbiased for integrals over the region
        const double pick = rng.uniform();
        const PointCloud* c = &problem.clouds[0];
        std::size_t i = 0;
        double cum = 0.0;
        bool found = false;
        for (const auto& cloud : problem.clouds) {
            for (std::size_t a = 0; a < cloud.atoms.size() && !found; ++a) {
                cum += cloud.weights[a] / z_count;
                if (pick <= cum) {
                    c = &cloud;
                    i = a;
                    found = true;
                }
            }
            if (found) break;
        }
        for (std::size_t j = 0; j < d; ++j) x[j] = c->atoms[i][j] + h[j] * rng.gauss();
        return x;
    }

    // n draws plus their integration weights 1 / (n q(x_s)), so that
    // sum_s f(x_s) iw_s estimates the integral of f over the region.
    void sample(int n, std::uint64_t seed, std::vector<Point>& pts,
                std::vector<double>& iw) const {
        Rng rng = Rng::stream(seed, 0x66ULL);
        pts.resize(static_cast<std::size_t>(n));
        iw.resize(static_cast<std::size_t>(n));
        for (std::size_t s = 0; s < pts.size(); ++s) {
            pts[s] = draw(rng);
            iw[s] = problem.region.contains(pts[s])
                        ? 1.0 / (density(pts[s]) * static_cast<double>(n))
                        : 0.0;
        }
    }
};

// Distances from every sample to every atom, flattened per station.
struct DistanceTable {
    std::vector<std::vector<std::vector<double>>> d;  // [sample][station][atom]

    DistanceTable(const std::vector<Point>& samples, const FusionProblem& problem) {
        d.resize(samples.size());
        for (std::size_t s = 0; s < samples.size(); ++s) {
            d[s].resize(problem.clouds.size());
            for (std::size_t z = 0; z < problem.clouds.size(); ++z) {
                const auto& atoms = problem.clouds[z].atoms;
                d[s][z].resize(atoms.size());
                for (std::size_t i = 0; i < atoms.size(); ++i)
                    d[s][z][i] = ground_distance(samples[s], atoms[i], problem);
            }
        }
    }
};

struct McState {
    std::vector<double> g;                          // g*(x_s)
    std::vector<std::vector<std::size_t>> argmin;   // [sample][station]
};

McState evaluate(const DistanceTable& table, const DualSolution& dual,
                 const FusionProblem& problem) {
    McState st;
    const std::size_t n = table.d.size();
    st.g.resize(n);
    st.argmin.assign(n, std::vector<std::size_t>(problem.clouds.size(), 0));
    for (std::size_t s = 0; s < n; ++s) {
        double expo = -1.0 - dual.v;
        for (std::size_t z = 0; z < problem.clouds.size(); ++z) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t best_i = 0;
            for (std::size_t i = 0; i < table.d[s][z].size(); ++i) {
                const double val = table.d[s][z][i] - dual.gamma[z][i];
                if (val < best) {
                    best = val;
                    best_i = i;
                }
            }
            expo -= problem.kappa * best;
            st.argmin[s][z] = best_i;
        }
        st.g[s] = std::exp(expo);
    }
    return st;
}

struct Gradient {
    double v = 0.0;
    std::vector<std::vector<double>> gamma;
    double objective = 0.0;  // convex dual value D
    double inf_norm = 0.0;
    // Worst constraint residual, each normalized by the larger of gd.tol and
    // its own Monte-Carlo resolution 3*sqrt(u(1-u)/n): the fixed-sample cell
    // masses move in ~1/n jumps, so residuals below that floor are not
    // resolvable and the subgradient at a kink stays O(1) even at the optimum.
    double resid = 0.0;
};

Gradient dual_gradient(const McState& st, const std::vector<double>& iw,
                       const DualSolution& dual, const FusionProblem& problem) {
    Gradient grad;
    const std::size_t n = st.g.size();
    double mass = 0.0;
    double mass_sq = 0.0;
    grad.gamma.resize(problem.clouds.size());
    std::vector<std::vector<double>> cm(problem.clouds.size()), cm_sq(problem.clouds.size());
    for (std::size_t z = 0; z < problem.clouds.size(); ++z) {
        grad.gamma[z].assign(problem.clouds[z].atoms.size(), 0.0);
        cm[z].assign(problem.clouds[z].atoms.size(), 0.0);
        cm_sq[z].assign(problem.clouds[z].atoms.size(), 0.0);
    }
    for (std::size_t s = 0; s < n; ++s) {
        const double t = st.g[s] * iw[s];
        mass += t;
        mass_sq += t * t;
        for (std::size_t z = 0; z < problem.clouds.size(); ++z) {
            cm[z][st.argmin[s][z]] += t;
            cm_sq[z][st.argmin[s][z]] += t * t;
        }
    }
    // standard error of an importance-sampling mean: SE^2 = sum (f iw)^2 - est^2/n
    const auto se = [&](double est, double sq) {
        return std::sqrt(std::max(0.0, sq - est * est / static_cast<double>(n)));
    };
    grad.v = 1.0 - mass;
    grad.inf_norm = std::abs(grad.v);
    grad.resid = std::abs(grad.v) / std::max(problem.gd.tol, 3.0 * se(mass, mass_sq));
    double gamma_dot_u = 0.0;
    for (std::size_t z = 0; z < problem.clouds.size(); ++z) {
        for (std::size_t i = 0; i < grad.gamma[z].size(); ++i) {
            const double u = problem.clouds[z].weights[i];
            grad.gamma[z][i] = problem.kappa * (cm[z][i] - u);
            grad.inf_norm = std::max(grad.inf_norm, std::abs(grad.gamma[z][i]));
            const double floor =
                std::max(problem.gd.tol, 3.0 * se(cm[z][i], cm_sq[z][i]));
            grad.resid = std::max(grad.resid, std::abs(cm[z][i] - u) / floor);
            gamma_dot_u += dual.gamma[z][i] * problem.clouds[z].weights[i];
        }
    }
    grad.objective = mass + dual.v - problem.kappa * gamma_dot_u;
    return grad;
}

void local_systematic(const PointCloud& in, std::size_t n_draws, double offset,
                      std::vector<Point>& out) {
    double cum = in.weights[0];
    std::size_t j = 0;
    for (std::size_t i = 0; i < n_draws; ++i) {
        const double u = (offset + static_cast<double>(i)) / static_cast<double>(n_draws);
        while (u > cum && j + 1 < in.atoms.size()) cum += in.weights[++j];
        out.push_back(in.atoms[j]);
    }
}

}  // namespace

FusionProblem make_problem(std::vector<PointCloud> clouds, double kappa, int n_mci, double inflate,
                           bool standardize) {
    if (clouds.empty() || clouds[0].atoms.empty())
        throw std::invalid_argument("make_problem: at least one nonempty cloud required");
    const std::size_t dim = clouds[0].atoms[0].size();
    FusionProblem problem;
    problem.kappa = kappa;
    problem.n_mci = n_mci;

    Point lo(dim, std::numeric_limits<double>::infinity());
    Point hi(dim, -std::numeric_limits<double>::infinity());
    Point mean(dim, 0.0), sq(dim, 0.0);
    std::size_t count = 0;
    for (const auto& c : clouds) {
        if (c.atoms.size() != c.weights.size())
            throw std::invalid_argument("make_problem: atom/weight size mismatch");
        for (const auto& a : c.atoms) {
            if (a.size() != dim) throw std::invalid_argument("make_problem: inconsistent dimension");
            for (std::size_t j = 0; j < dim; ++j) {
                lo[j] = std::min(lo[j], a[j]);
                hi[j] = std::max(hi[j], a[j]);
                mean[j] += a[j];
                sq[j] += a[j] * a[j];
            }
            ++count;
        }
    }
    problem.scale.assign(dim, 1.0);
    for (std::size_t j = 0; j < dim; ++j) {
        const double width = hi[j] - lo[j];
        const double pad = (width > 0.0 ? width : 1.0) * inflate;
        lo[j] -= pad;
        hi[j] += pad;
        if (standardize) {
            mean[j] /= static_cast<double>(count);
            const double var = sq[j] / static_cast<double>(count) - mean[j] * mean[j];
            if (var > 1e-24) problem.scale[j] = std::sqrt(var);
        }
    }
    problem.region = {std::move(lo), std::move(hi)};
    problem.clouds = std::move(clouds);
    return problem;
}

double ground_distance(const Point& x, const Point& atom, const FusionProblem& problem) {
    double acc = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double d = (x[j] - atom[j]) / problem.scale[j];
        acc += d * d;
    }
    return std::sqrt(acc);
}

double g_star(const Point& x, const DualSolution& dual, const FusionProblem& problem) {
    double expo = -1.0 - dual.v;
    for (std::size_t z = 0; z < problem.clouds.size(); ++z) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < problem.clouds[z].atoms.size(); ++i)
            best = std::min(best,
                            ground_distance(x, problem.clouds[z].atoms[i], problem) - dual.gamma[z][i]);
        expo -= problem.kappa * best;
    }
    return std::exp(expo);
}

DualSolution solve_dual(const FusionProblem& problem, std::uint64_t seed) {
    DualSolution dual;
    dual.gamma.resize(problem.clouds.size());
    for (std::size_t z = 0; z < problem.clouds.size(); ++z)
        dual.gamma[z].assign(problem.clouds[z].atoms.size(), 0.0);
    dual.v = std::log(problem.region.volume()) - 1.0;
    if (problem.kappa == 0.0) {
        dual.converged = true;
        return dual;
    }
    if (problem.n_mci < 1000)
        throw std::invalid_argument("solve_dual: n_mci must be at least 1000");

    const MixtureProposal proposal(problem);
    std::vector<Point> samples;
    std::vector<double> iw;
    proposal.sample(problem.n_mci, seed, samples, iw);
    const DistanceTable table(samples, problem);

    // exact coordinate step in v: g* scales as e^{-v}, so v += ln(mass)
    // normalizes the sample-average mass to 1 in closed form
    const auto renormalize = [&](DualSolution& d) {
        const McState st = evaluate(table, d, problem);
        double mass = 0.0;
        for (std::size_t s = 0; s < st.g.size(); ++s) mass += st.g[s] * iw[s];
        if (mass > 0.0 && std::isfinite(mass)) d.v += std::log(mass);
    };

    renormalize(dual);
    Gradient grad = dual_gradient(evaluate(table, dual, problem), iw, dual, problem);
    double step = problem.gd.step;
    DualSolution best = dual;
    double best_resid = grad.resid;
    for (int it = 0; it < problem.gd.max_iters; ++it) {
        dual.iters = it + 1;
        if (grad.resid < 1.0) {
            dual.converged = true;
            break;
        }
        // backtracking line search on the fixed-sample objective
        bool accepted = false;
        double trial = step;
        for (int half = 0; half < 20; ++half) {
            DualSolution cand = dual;
            cand.v -= trial * grad.v;
            for (std::size_t z = 0; z < cand.gamma.size(); ++z)
                for (std::size_t i = 0; i < cand.gamma[z].size(); ++i)
                    cand.gamma[z][i] -= trial * grad.gamma[z][i];
            renormalize(cand);
            const Gradient cand_grad =
                dual_gradient(evaluate(table, cand, problem), iw, cand, problem);
            if (cand_grad.objective < grad.objective) {
                cand.iters = dual.iters;
                dual = cand;
                grad = cand_grad;
                step = trial * 1.5;
                accepted = true;
                break;
            }
            trial *= 0.5;
        }
        if (!accepted) {
            // kink of the piecewise-smooth objective: plain subgradient step
            // with a diminishing length (no descent requirement)
            const double sub = problem.gd.step / (1.0 + 0.05 * static_cast<double>(it));
            dual.v -= sub * grad.v;
            for (std::size_t z = 0; z < dual.gamma.size(); ++z)
                for (std::size_t i = 0; i < dual.gamma[z].size(); ++i)
                    dual.gamma[z][i] -= sub * grad.gamma[z][i];
            renormalize(dual);
            grad = dual_gradient(evaluate(table, dual, problem), iw, dual, problem);
        }
        if (grad.resid < best_resid) {
            best_resid = grad.resid;
            best = dual;
            best.grad_norm = grad.inf_norm;
            best.iters = dual.iters;
        }
    }
    dual.grad_norm = grad.inf_norm;
    if (grad.resid < 1.0) {
        dual.converged = true;
        return dual;
    }
    best.converged = best_resid < 1.0;
    best.iters = dual.iters;
    return best;
}

std::size_t partition_index(const Point& x, std::size_t z, const DualSolution& dual,
                            const FusionProblem& problem) {
    const auto& atoms = problem.clouds[z].atoms;
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        const double val = ground_distance(x, atoms[i], problem) - dual.gamma[z][i];
        if (val < best) {
            best = val;
            best_i = i;
        }
    }
    return best_i;
}

PointCloud fuse(const FusionProblem& problem, const DualSolution& dual, int n_out,
                std::uint64_t seed) {
    const MixtureProposal proposal(problem);
    Rng rng = Rng::stream(seed, 0x69ULL);
    PointCloud out;
    out.atoms.reserve(static_cast<std::size_t>(n_out));
    out.weights.reserve(static_cast<std::size_t>(n_out));
    double total = 0.0;
    for (int s = 0; s < n_out; ++s) {
        Point x = proposal.draw(rng);
        const double w = problem.region.contains(x)
                             ? g_star(x, dual, problem) / proposal.density(x)
                             : 0.0;
        out.atoms.push_back(std::move(x));
        out.weights.push_back(w);
        total += w;
    }
    if (total <= 0.0) throw std::runtime_error("fuse: all fused weights underflowed");
    for (auto& w : out.weights) w /= total;
    return out;
}

PointCloud stratified_fuse(const std::vector<PointCloud>& clouds, int n_out, std::uint64_t seed) {
    const std::size_t z_count = clouds.size();
    const std::size_t per = (static_cast<std::size_t>(n_out) + z_count - 1) / z_count;
    Rng rng = Rng::stream(seed, 0x73ULL);
    PointCloud out;
    out.atoms.reserve(per * z_count);
    for (const auto& c : clouds) local_systematic(c, per, rng.uniform(), out.atoms);
    out.atoms.resize(static_cast<std::size_t>(n_out));
    out.weights.assign(out.atoms.size(), 1.0 / static_cast<double>(n_out));
    return out;
}

double mc_mass(const DualSolution& dual, const FusionProblem& problem, std::uint64_t seed) {
    const auto samples = draw_uniform(problem.region, problem.n_mci, seed);
    double acc = 0.0;
    for (const auto& x : samples) acc += g_star(x, dual, problem);
    return acc * problem.region.volume() / static_cast<double>(samples.size());
}

double cell_mass(std::size_t z, std::size_t i, const DualSolution& dual,
                 const FusionProblem& problem, std::uint64_t seed) {
    const auto samples = draw_uniform(problem.region, problem.n_mci, seed);
    double acc = 0.0;
    for (const auto& x : samples)
        if (partition_index(x, z, dual, problem) == i) acc += g_star(x, dual, problem);
    return acc * problem.region.volume() / static_cast<double>(samples.size());
}

double dual_objective(const DualSolution& dual, const FusionProblem& problem, std::uint64_t seed) {
    double gamma_dot_u = 0.0;
    for (std::size_t z = 0; z < problem.clouds.size(); ++z)
        for (std::size_t i = 0; i < dual.gamma[z].size(); ++i)
            gamma_dot_u += dual.gamma[z][i] * problem.clouds[z].weights[i];
    return mc_mass(dual, problem, seed) + dual.v - problem.kappa * gamma_dot_u;
}

double primal_value(const DualSolution& dual, const FusionProblem& problem, std::uint64_t seed) {
    const auto samples = draw_uniform(problem.region, problem.n_mci, seed);
    const double w = problem.region.volume() / static_cast<double>(samples.size());
    double neg_entropy = 0.0;
    double transport = 0.0;
    for (const auto& x : samples) {
        const double g = g_star(x, dual, problem);
        if (g > 0.0) neg_entropy += g * std::log(g);
        for (std::size_t z = 0; z < problem.clouds.size(); ++z) {
            const std::size_t i = partition_index(x, z, dual, problem);
            transport += g * ground_distance(x, problem.clouds[z].atoms[i], problem);
        }
    }
    return -neg_entropy * w - problem.kappa * transport * w;
}

}  // namespace isac
