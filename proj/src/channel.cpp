#include "isac/channel.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "isac/rng.hpp"

namespace isac {

namespace {

struct Path {
    cdouble beta;
    double tau;
    double nu;
    double theta;
};

std::vector<Path> collect_paths(const TargetTruth& truth, const std::vector<Scatterer>& scatterers,
                                const RadarConfig& cfg) {
    std::vector<Path> paths;
    const Polar pol = cartesian_to_polar(truth, cfg);
    paths.push_back({truth.beta, pol.tau, pol.nu, pol.theta});
    for (const auto& s : scatterers) paths.push_back({s.beta, s.tau, s.nu, s.theta});
    return paths;
}

}  // namespace

SnapshotCube simulate_rx_time(const TxTimeSignal& s, const TargetTruth& truth,
                              const std::vector<Scatterer>& scatterers, const RadarConfig& cfg,
                              std::uint64_t seed) {
    if (cfg.scheme != Scheme::Pulsed) throw std::invalid_argument("simulate_rx_time: pulsed mode only");
    const auto paths = collect_paths(truth, scatterers, cfg);
    const double T_s = cfg.sample_time();
    for (const auto& p : paths) {
        if (std::abs(p.beta) > 0.0 && (p.tau < 0.0 || p.tau >= cfg.T_r))
            throw std::invalid_argument("simulate_rx_time: path delay outside [0, T_r)");
    }

    SnapshotCube y;
    y.scheme = Scheme::Pulsed;
    y.n_pulses = s.n_pulses;
    y.length = s.length;
    y.n_rx = cfg.N_r;
    y.data.assign(static_cast<std::size_t>(s.n_pulses) * s.length * cfg.N_r, cdouble(0.0, 0.0));

    const double sigma2 = cfg.noise_power();
    for (int p = 0; p < s.n_pulses; ++p) {
        for (const auto& path : paths) {
            if (std::abs(path.beta) == 0.0) continue;
            const long q = round_away(path.tau / T_s);
            const auto a = steering(path.theta, cfg.N_t);
            const auto b = steering(path.theta, cfg.N_r);
            const double dop = 2.0 * kPi * path.nu * static_cast<double>(p) * cfg.T_r;
            const cdouble gain = path.beta * cdouble(std::cos(dop), std::sin(dop));
            for (long l = 0; l < s.length; ++l) {
                const long src = l - q;
                if (src < 0 || src >= s.length) continue;
                cdouble tx(0.0, 0.0);  // a^H s_p(l - q)
                for (int t = 0; t < cfg.N_t; ++t) tx += std::conj(a[static_cast<std::size_t>(t)]) * s.at(p, src, t);
                const cdouble scaled = gain * tx;
                for (int r = 0; r < cfg.N_r; ++r) y.at_time(p, l, r) += scaled * b[static_cast<std::size_t>(r)];
            }
        }
        Rng rng = Rng::stream(seed, 0x6eULL, static_cast<std::uint64_t>(p));
        if (sigma2 > 0.0) {
            for (long l = 0; l < s.length; ++l)
                for (int r = 0; r < cfg.N_r; ++r) y.at_time(p, l, r) += rng.cgauss(sigma2);
        }
    }
    return y;
}

SnapshotCube simulate_rx_cw(const ConstellationCube& c, const TargetTruth& truth,
                            const std::vector<Scatterer>& scatterers, const RadarConfig& cfg,
                            std::uint64_t seed) {
    if (cfg.scheme != Scheme::Cw) throw std::invalid_argument("simulate_rx_cw: CW mode only");
    const auto paths = collect_paths(truth, scatterers, cfg);
    for (const auto& p : paths) {
        if (std::abs(p.beta) > 0.0 && (p.tau < 0.0 || p.tau > cfg.T_c))
            throw std::invalid_argument("simulate_rx_cw: path delay exceeds the CP duration");
    }

    SnapshotCube y;
    y.scheme = Scheme::Cw;
    y.n_pulses = c.n_pulses;
    y.n_symbols = c.n_symbols;
    y.n_subcarriers = c.n_subcarriers;
    y.n_rx = cfg.N_r;
    y.data.assign(static_cast<std::size_t>(c.n_pulses) * c.n_symbols * c.n_subcarriers * cfg.N_r,
                  cdouble(0.0, 0.0));

    const double df = cfg.subcarrier_spacing();
    const double sigma2 = cfg.noise_power();
    for (int p = 0; p < c.n_pulses; ++p) {
        for (const auto& path : paths) {
            if (std::abs(path.beta) == 0.0) continue;
            const auto a = steering(path.theta, cfg.N_t);
            const auto b = steering(path.theta, cfg.N_r);
            const double dop = 2.0 * kPi * path.nu * static_cast<double>(p) * cfg.T_r;
            const cdouble gain = path.beta * cdouble(std::cos(dop), std::sin(dop));
            for (int m = 0; m < c.n_symbols; ++m) {
                for (int n = 0; n < c.n_subcarriers; ++n) {
                    cdouble tx(0.0, 0.0);  // a^H c_{p,m}(n)
                    for (int t = 0; t < cfg.N_t; ++t)
                        tx += std::conj(a[static_cast<std::size_t>(t)]) * c.at(p, m, n, t);
                    const double ramp = -2.0 * kPi * static_cast<double>(n) * df * path.tau;
                    const cdouble scaled = gain * tx * cdouble(std::cos(ramp), std::sin(ramp));
                    for (int r = 0; r < cfg.N_r; ++r) y.at_freq(p, m, n, r) += scaled * b[static_cast<std::size_t>(r)];
                }
            }
        }
        if (sigma2 > 0.0) {
            for (int m = 0; m < c.n_symbols; ++m) {
                Rng rng = Rng::stream(seed, 0x6eULL, static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(m));
                for (int n = 0; n < c.n_subcarriers; ++n)
                    for (int r = 0; r < cfg.N_r; ++r) y.at_freq(p, m, n, r) += rng.cgauss(sigma2);
            }
        }
    }
    return y;
}

cdouble sample_path_gain(std::uint64_t seed, long k) {
    Rng rng = Rng::stream(seed, 0xb7ULL, static_cast<std::uint64_t>(k));
    const double r1 = rng.uniform();
    const double r2 = rng.gauss();
    const double mag = 0.9 + 0.1 * (2.0 * r1 - 1.0);
    const double phase = 2.0 * kPi * r2;
    return mag * cdouble(std::cos(phase), std::sin(phase));
}

void dump_snapshot(const SnapshotCube& cube, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("dump_snapshot: cannot open " + path);
    const std::int64_t header[6] = {cube.scheme == Scheme::Pulsed ? 0 : 1,
                                    cube.n_pulses,
                                    cube.length,
                                    cube.n_symbols,
                                    cube.n_subcarriers,
                                    cube.n_rx};
    std::fwrite(header, sizeof(std::int64_t), 6, f);
    for (const auto& v : cube.data) {
        const double re = v.real(), im = v.imag();
        std::fwrite(&re, sizeof(double), 1, f);
        std::fwrite(&im, sizeof(double), 1, f);
    }
    std::fclose(f);
}

}  // namespace isac
