#include "isac/filters.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "isac/rng.hpp"

namespace isac {

namespace {

// Scheme-dispatched cost and model statistics for one hypothesis.
double evidence_cost(const SnapshotCube& y, const TxReference& tx, const Hypothesis& phi,
                     const RadarConfig& cfg) {
    if (cfg.scheme == Scheme::Cw) return h4_cw(y, *tx.cw, phi, cfg);
    return h4(y, *tx.freq, phi, cfg);
}

double mf_power(const SnapshotCube& y, const TxReference& tx, const Hypothesis& phi,
                const RadarConfig& cfg) {
    if (cfg.scheme == Scheme::Cw) return std::norm(mf_cw(y, *tx.cw, phi, cfg));
    return std::norm(mf_freq(y, *tx.freq, phi, cfg));
}

// X = g^H y and G = ||g||^2 for the rank-one model y = beta * g(phi) + noise,
// where g stacks b(theta) a^H(theta) (tx symbol) (phase ramps) over all cells.
void model_stats(const SnapshotCube& y, const TxReference& tx, const Hypothesis& phi,
                 const RadarConfig& cfg, cdouble& x_out, double& g_out) {
    const auto a = steering(phi.theta, cfg.N_t);
    const auto b = steering(phi.theta, cfg.N_r);
    cdouble x_acc(0.0, 0.0);
    double g_acc = 0.0;
    if (cfg.scheme == Scheme::Cw) {
        const double ramp_step = -2.0 * kPi * cfg.subcarrier_spacing() * phi.tau;
        const cdouble step(std::cos(ramp_step), std::sin(ramp_step));
        for (int p = 0; p < y.n_pulses; ++p) {
            const double dop = 2.0 * kPi * static_cast<double>(p) * cfg.T_r * phi.nu;
            const cdouble phase(std::cos(dop), std::sin(dop));
            for (int m = 0; m < y.n_symbols; ++m) {
                cdouble ramp = phase;
                for (int n = 0; n < y.n_subcarriers; ++n) {
                    cdouble txs(0.0, 0.0);
                    for (int t = 0; t < cfg.N_t; ++t)
                        txs += std::conj(a[static_cast<std::size_t>(t)]) * tx.cw->at(p, m, n, t);
                    const cdouble u = txs * ramp;
                    cdouble by(0.0, 0.0);
                    for (int r = 0; r < cfg.N_r; ++r)
                        by += std::conj(b[static_cast<std::size_t>(r)]) * y.at_freq(p, m, n, r);
                    x_acc += std::conj(u) * by;
                    g_acc += std::norm(u);
                    ramp *= step;
                }
            }
        }
    } else {
        const double delta = cfg.B / static_cast<double>(tx.freq->n_bins);
        const double ramp_step = -2.0 * kPi * delta * phi.tau;
        const cdouble step(std::cos(ramp_step), std::sin(ramp_step));
        for (int p = 0; p < y.n_pulses; ++p) {
            const double dop = 2.0 * kPi * static_cast<double>(p) * cfg.T_r * phi.nu;
            const cdouble phase(std::cos(dop), std::sin(dop));
            cdouble ramp = phase;
            for (long n = 0; n < y.length; ++n) {
                cdouble txs(0.0, 0.0);
                for (int t = 0; t < cfg.N_t; ++t)
                    txs += std::conj(a[static_cast<std::size_t>(t)]) * tx.freq->at(p, n, t);
                const cdouble u = txs * ramp;
                cdouble by(0.0, 0.0);
                for (int r = 0; r < cfg.N_r; ++r)
                    by += std::conj(b[static_cast<std::size_t>(r)]) * y.at_time(p, n, r);
                x_acc += std::conj(u) * by;
                g_acc += std::norm(u);
                ramp *= step;
            }
        }
    }
    x_out = x_acc;
    g_out = g_acc * static_cast<double>(cfg.N_r);
}

double snapshot_power(const SnapshotCube& y) {
    double acc = 0.0;
    for (const auto& v : y.data) acc += std::norm(v);
    return acc;
}

SnapshotCube prepare_measurement(const SnapshotCube& y, const RadarConfig& cfg) {
    if (cfg.scheme == Scheme::Pulsed && y.length != 0) return to_freq(y);
    return y;
}

void normalize_from_log(ParticleCloud& cloud, const std::vector<double>& logw) {
    double max_lw = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < logw.size(); ++i)
        if (cloud.particles[i].weight > 0.0 && logw[i] > max_lw) max_lw = logw[i];
    if (!std::isfinite(max_lw)) throw DegenerateUpdateError("all particle weights vanished");
    double total = 0.0;
    for (std::size_t i = 0; i < logw.size(); ++i) {
        double w = cloud.particles[i].weight;
        w = (w > 0.0 && std::isfinite(logw[i])) ? w * std::exp(logw[i] - max_lw) : 0.0;
        cloud.particles[i].weight = w;
        total += w;
    }
    if (total <= 0.0) throw DegenerateUpdateError("all particle weights vanished");
    for (auto& p : cloud.particles) p.weight /= total;
}

void maybe_resample(ParticleCloud& cloud, const FilterSettings& settings, std::uint64_t tag) {
    if (ess(cloud) < settings.n_thres)
        systematic_resample(cloud, Rng::stream(settings.seed, 0x72ULL, static_cast<std::uint64_t>(cloud.step), tag).next());
}

Hypothesis particle_polar(const Particle& par, const RadarConfig& cfg, const Vec2& station,
                          double boresight) {
    const Polar pol = cartesian_to_polar(par.pos, par.vel, cfg, station, boresight);
    return {pol.tau, pol.nu, pol.theta};
}

bool polar_in_sector(const Hypothesis& phi) { return std::abs(phi.theta) <= kPi / 2; }

}  // namespace

double ess(const ParticleCloud& cloud) {
    double sum_sq = 0.0;
    for (const auto& p : cloud.particles) sum_sq += p.weight * p.weight;
    return 1.0 / sum_sq;
}

Vec2 estimate_position(const ParticleCloud& cloud) {
    Vec2 est{0.0, 0.0};
    for (const auto& p : cloud.particles) {
        est[0] += p.weight * p.pos[0];
        est[1] += p.weight * p.pos[1];
    }
    return est;
}

void cv_propagate(ParticleCloud& cloud, double dt, const FilterSettings& settings) {
    const double qa = settings.accel_intensity;
    // Cholesky factor of qa * [dt^3/3 dt^2/2; dt^2/2 dt]
    const double l11 = std::sqrt(qa * dt * dt * dt / 3.0);
    const double l21 = (l11 > 0.0) ? qa * dt * dt / 2.0 / l11 : 0.0;
    const double l22 = std::sqrt(std::max(0.0, qa * dt - l21 * l21));
    for (std::size_t i = 0; i < cloud.particles.size(); ++i) {
        Rng rng = Rng::stream(settings.seed, 0x63ULL, static_cast<std::uint64_t>(cloud.step), i);
        auto& p = cloud.particles[i];
        for (int axis = 0; axis < 2; ++axis) {
            const double z1 = rng.gauss();
            const double z2 = rng.gauss();
            p.pos[axis] += p.vel[axis] * dt + l11 * z1;
            p.vel[axis] += l21 * z1 + l22 * z2;
        }
    }
}

void gibbs_update(ParticleCloud& cloud, const std::vector<double>& costs, double xi) {
    if (costs.size() != cloud.particles.size())
        throw std::invalid_argument("gibbs_update: one cost per particle required");
    // shift by the minimum finite cost before scaling so a constant offset in
    // the costs cancels exactly, independent of xi
    double cmin = std::numeric_limits<double>::infinity();
    for (double c : costs)
        if (c < cmin) cmin = c;
    if (std::isinf(cmin)) cmin = 0.0;
    std::vector<double> logw(costs.size());
    for (std::size_t i = 0; i < costs.size(); ++i)
        logw[i] = std::isinf(costs[i]) ? -std::numeric_limits<double>::infinity()
                                       : -xi * (costs[i] - cmin);
    normalize_from_log(cloud, logw);
}

void systematic_resample(ParticleCloud& cloud, std::uint64_t seed) {
    const std::size_t n = cloud.particles.size();
    Rng rng(seed);
    const double offset = rng.uniform() / static_cast<double>(n);
    std::vector<Particle> out;
    out.reserve(n);
    double cum = cloud.particles[0].weight;
    std::size_t j = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = offset + static_cast<double>(i) / static_cast<double>(n);
        while (u > cum && j + 1 < n) cum += cloud.particles[++j].weight;
        out.push_back(cloud.particles[j]);
        out.back().weight = 1.0 / static_cast<double>(n);
    }
    cloud.particles = std::move(out);
}

ParticleCloud init_cloud(const TargetTruth& truth, const RadarConfig& cfg,
                         const FilterSettings& settings, std::uint64_t seed, cdouble beta_init,
                         double beta_spread, const Vec2& station, double boresight) {
    RadarConfig local = cfg;
    const DerivedLimits d = derive(local);
    const double dx = truth.position[0] - station[0];
    const double dy = truth.position[1] - station[1];
    const double range = std::hypot(dx, dy);
    const double psi = std::atan2(dy, dx);
    const Vec2 radial{std::cos(psi), std::sin(psi)};
    const Vec2 tangential{-std::sin(psi), std::cos(psi)};
    const double cross_hw = range * 2.0 / static_cast<double>(std::max(cfg.N_t, cfg.N_r));
    (void)boresight;

    ParticleCloud cloud;
    cloud.particles.resize(static_cast<std::size_t>(settings.n_par));
    Rng rng = Rng::stream(seed, 0x69ULL);
    for (auto& p : cloud.particles) {
        const double dr = rng.uniform(-d.range_resolution, d.range_resolution);
        const double dc = rng.uniform(-cross_hw, cross_hw);
        p.pos = {truth.position[0] + dr * radial[0] + dc * tangential[0],
                 truth.position[1] + dr * radial[1] + dc * tangential[1]};
        p.vel = {truth.velocity[0] + rng.uniform(-settings.init_vel_halfwidth, settings.init_vel_halfwidth),
                 truth.velocity[1] + rng.uniform(-settings.init_vel_halfwidth, settings.init_vel_halfwidth)};
        p.weight = 1.0 / static_cast<double>(settings.n_par);
        p.beta = beta_init + rng.cgauss(beta_spread * beta_spread);
        p.beta_mean = beta_init;
        p.beta_var = beta_spread * beta_spread + 0.01;
    }
    return cloud;
}

void pf_sltr_step(ParticleCloud& cloud, const SnapshotCube& y_in, const TxReference& tx,
                  const RadarConfig& cfg, const FilterSettings& settings, const Vec2& station,
                  double boresight) {
    cloud.step += 1;
    cv_propagate(cloud, cfg.T_t, settings);
    const SnapshotCube y = prepare_measurement(y_in, cfg);
    std::vector<double> costs(cloud.particles.size());
    for (std::size_t i = 0; i < cloud.particles.size(); ++i) {
        const Hypothesis phi = particle_polar(cloud.particles[i], cfg, station, boresight);
        costs[i] = polar_in_sector(phi) ? evidence_cost(y, tx, phi, cfg)
                                        : std::numeric_limits<double>::infinity();
    }
    gibbs_update(cloud, costs, settings.xi);
    maybe_resample(cloud, settings, 0);
}

void pf_iltr_step(ParticleCloud& cloud, const SnapshotCube& y_in, const TxReference& tx,
                  const RadarConfig& cfg, const FilterSettings& settings, const Vec2& station,
                  double boresight) {
    cloud.step += 1;
    cv_propagate(cloud, cfg.T_t, settings);
    const SnapshotCube y = prepare_measurement(y_in, cfg);
    RadarConfig local = cfg;
    const DerivedLimits d = derive(local);

    // predicted polar state from the propagated cloud mean
    Vec2 mean_pos{0.0, 0.0}, mean_vel{0.0, 0.0};
    for (const auto& p : cloud.particles) {
        mean_pos[0] += p.weight * p.pos[0];
        mean_pos[1] += p.weight * p.pos[1];
        mean_vel[0] += p.weight * p.vel[0];
        mean_vel[1] += p.weight * p.vel[1];
    }
    const Polar pred = cartesian_to_polar(mean_pos, mean_vel, cfg, station, boresight);
    TrackingGate gate = tracking_gate({pred.tau, pred.nu, pred.theta}, cfg);
    gate.tau_lo = std::max(gate.tau_lo, 0.0);
    if (cfg.scheme == Scheme::Cw) gate.tau_hi = std::min(gate.tau_hi, cfg.T_c);

    // grid argmax of the ambiguity surface -> pseudo-measurement
    const int ng = std::max(2, settings.gate_grid);
    const bool doppler = cfg.N_p > 1;
    Hypothesis best{pred.tau, pred.nu, pred.theta};
    double best_val = -1.0;
    for (int it = 0; it < ng; ++it) {
        const double tau = gate.tau_lo + (gate.tau_hi - gate.tau_lo) * it / (ng - 1);
        for (int ith = 0; ith < ng; ++ith) {
            const double theta = gate.theta_lo + (gate.theta_hi - gate.theta_lo) * ith / (ng - 1);
            const int nnu = doppler ? ng : 1;
            for (int inu = 0; inu < nnu; ++inu) {
                const double nu =
                    doppler ? gate.nu_lo + (gate.nu_hi - gate.nu_lo) * inu / (ng - 1) : pred.nu;
                const Hypothesis phi{tau, nu, theta};
                const double val = mf_power(y, tx, phi, cfg);
                if (val > best_val) {
                    best_val = val;
                    best = phi;
                }
            }
        }
    }

    // the extracted measurement lives on the processed range-Doppler-angle
    // map, so quantize the peak to resolution-cell centers (virtual-array
    // cell in sin space)
    const double sin_cell = 2.0 / static_cast<double>(cfg.N_t + cfg.N_r - 1);
    best.tau = std::round(best.tau * cfg.B) / cfg.B;
    if (doppler) best.nu = std::round(best.nu * cfg.cpi()) / cfg.cpi();
    const double sin_best =
        std::clamp(std::round(std::sin(best.theta) / sin_cell) * sin_cell, -1.0, 1.0);

    // bootstrap update with resolution-cell measurement noise
    const double sig_tau = 1.0 / cfg.B;
    const double sig_nu = 1.0 / cfg.cpi();
    std::vector<double> logw(cloud.particles.size());
    for (std::size_t i = 0; i < cloud.particles.size(); ++i) {
        const Hypothesis phi = particle_polar(cloud.particles[i], cfg, station, boresight);
        const double dt = (phi.tau - best.tau) / sig_tau;
        const double dn = (phi.nu - best.nu) / sig_nu;
        const double dth = (std::sin(phi.theta) - sin_best) / sin_cell;
        logw[i] = -0.5 * (dt * dt + dn * dn + dth * dth);
    }
    normalize_from_log(cloud, logw);
    maybe_resample(cloud, settings, 1);
}

void pf_sltr_a_step(ParticleCloud& cloud, const SnapshotCube& y_in, const TxReference& tx,
                    const RadarConfig& cfg, const FilterSettings& settings, const Vec2& station,
                    double boresight) {
    cloud.step += 1;
    cv_propagate(cloud, cfg.T_t, settings);
    for (std::size_t i = 0; i < cloud.particles.size(); ++i) {
        Rng rng = Rng::stream(settings.seed, 0x62ULL, static_cast<std::uint64_t>(cloud.step), i);
        cloud.particles[i].beta +=
            cdouble(settings.beta_walk_std * rng.gauss(), settings.beta_walk_std * rng.gauss());
    }
    const SnapshotCube y = prepare_measurement(y_in, cfg);
    const double sigma2 = cfg.noise_power();
    const double y_power = snapshot_power(y);
    std::vector<double> logw(cloud.particles.size());
    for (std::size_t i = 0; i < cloud.particles.size(); ++i) {
        const auto& par = cloud.particles[i];
        const Hypothesis phi = particle_polar(par, cfg, station, boresight);
        if (!polar_in_sector(phi)) {
            logw[i] = -std::numeric_limits<double>::infinity();
            continue;
        }
        cdouble x;
        double g;
        model_stats(y, tx, phi, cfg, x, g);
        const double resid =
            y_power - 2.0 * (std::conj(par.beta) * x).real() + std::norm(par.beta) * g;
        logw[i] = -resid / sigma2;
    }
    normalize_from_log(cloud, logw);
    maybe_resample(cloud, settings, 2);
}

void rbpf_sltr_a_step(ParticleCloud& cloud, const SnapshotCube& y_in, const TxReference& tx,
                      const RadarConfig& cfg, const FilterSettings& settings, const Vec2& station,
                      double boresight) {
    cloud.step += 1;
    cv_propagate(cloud, cfg.T_t, settings);
    const SnapshotCube y = prepare_measurement(y_in, cfg);
    const double sigma2 = cfg.noise_power();
    const double y_power = snapshot_power(y);
    std::vector<double> logw(cloud.particles.size());
    for (std::size_t i = 0; i < cloud.particles.size(); ++i) {
        auto& par = cloud.particles[i];
        const Hypothesis phi = particle_polar(par, cfg, station, boresight);
        if (!polar_in_sector(phi)) {
            logw[i] = -std::numeric_limits<double>::infinity();
            continue;
        }
        // predict the complex-gain substate (random walk)
        par.beta_var += settings.beta_process_var;
        cdouble x;
        double g;
        model_stats(y, tx, phi, cfg, x, g);
        const double denom = sigma2 + par.beta_var * g;
        if (denom <= 0.0) throw std::runtime_error("rbpf_sltr_a_step: nonpositive innovation covariance");
        // marginal likelihood of y under beta ~ CN(beta_mean, beta_var)
        const double resid = y_power - 2.0 * (std::conj(par.beta_mean) * x).real() +
                             std::norm(par.beta_mean) * g;
        const cdouble ghr = x - par.beta_mean * g;  // g^H (y - mean g)
        logw[i] = -std::log(denom / sigma2) -
                  (resid / sigma2 - par.beta_var / sigma2 * std::norm(ghr) / denom);
        // Kalman update of the gain posterior
        const double post_var = 1.0 / (1.0 / par.beta_var + g / sigma2);
        par.beta_mean = post_var * (par.beta_mean / par.beta_var + x / sigma2);
        par.beta_var = post_var;
    }
    normalize_from_log(cloud, logw);
    maybe_resample(cloud, settings, 3);
}

std::vector<double> entropy_power(const std::vector<double>& alpha, double xi) {
    std::vector<double> out(alpha.size());
    double total = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        out[i] = std::pow(alpha[i], xi);  // pow(0, 0) == 1
        total += out[i];
    }
    for (auto& v : out) v /= total;
    return out;
}

double entropy(const std::vector<double>& weights) {
    double h = 0.0;
    for (double w : weights)
        if (w > 0.0) h -= w * std::log(w);
    return h;
}

}  // namespace isac
