#include "isac/waveform.hpp"

#include <cmath>
#include <stdexcept>

#include "isac/rng.hpp"

namespace isac {

ConstellationCube gen_constellation(const RadarConfig& cfg, int qam_order, std::uint64_t seed) {
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(qam_order))));
    if (qam_order < 4 || side * side != qam_order)
        throw std::invalid_argument("gen_constellation: qam_order must be a perfect square >= 4");

    // Levels {+-1, +-3, ..., +-(side-1)} per rail; E|c|^2 = 2(Q-1)/3.
    const double norm = std::sqrt(cfg.P_t / (2.0 * (qam_order - 1) / 3.0));

    ConstellationCube cube;
    cube.n_pulses = cfg.N_p;
    cube.n_symbols = cfg.M;
    cube.n_subcarriers = cfg.N_c;
    cube.n_tx = cfg.N_t;
    cube.data.resize(static_cast<std::size_t>(cfg.N_p) * cfg.M * cfg.N_c * cfg.N_t);
    for (int p = 0; p < cfg.N_p; ++p) {
        for (int m = 0; m < cfg.M; ++m) {
            Rng rng = Rng::stream(seed, 0x71ULL, static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(m));
            for (int n = 0; n < cfg.N_c; ++n) {
                for (int t = 0; t < cfg.N_t; ++t) {
                    const int i_lvl = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(side)));
                    const int q_lvl = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(side)));
                    cube.at(p, m, n, t) = norm * cdouble(2 * i_lvl - (side - 1), 2 * q_lvl - (side - 1));
                }
            }
        }
    }
    return cube;
}

TxTimeSignal assemble_pulse(const ConstellationCube& c, const RadarConfig& cfg) {
    RadarConfig local = cfg;
    const DerivedLimits d = derive(local);
    if (d.n_cp >= cfg.N_c)
        throw std::invalid_argument("assemble_pulse: CP longer than the OFDM symbol is unsupported");

    TxTimeSignal s;
    s.n_pulses = cfg.N_p;
    s.length = d.L;
    s.n_tx = cfg.N_t;
    s.data.assign(static_cast<std::size_t>(cfg.N_p) * d.L * cfg.N_t, cdouble(0.0, 0.0));

    std::vector<cdouble> spec(static_cast<std::size_t>(cfg.N_c));
    for (int p = 0; p < cfg.N_p; ++p) {
        for (int t = 0; t < cfg.N_t; ++t) {
            for (int m = 0; m < cfg.M; ++m) {
                for (int n = 0; n < cfg.N_c; ++n) spec[static_cast<std::size_t>(n)] = c.at(p, m, n, t);
                const std::vector<cdouble> block = idft(spec);
                const long base = static_cast<long>(m) * (d.n_cp + cfg.N_c);
                for (long i = 0; i < d.n_cp; ++i)
                    s.at(p, base + i, t) = block[static_cast<std::size_t>(cfg.N_c - d.n_cp + i)];
                for (long i = 0; i < cfg.N_c; ++i)
                    s.at(p, base + d.n_cp + i, t) = block[static_cast<std::size_t>(i)];
            }
        }
    }
    return s;
}

TxFreqSignal fft_full_pri(const TxTimeSignal& s, const RadarConfig& cfg) {
    if (cfg.scheme != Scheme::Pulsed)
        throw std::invalid_argument("fft_full_pri: pulsed mode only; CW uses per-symbol constellation symbols");

    TxFreqSignal f;
    f.n_pulses = s.n_pulses;
    f.n_bins = s.length;  // N_cr = L
    f.n_tx = s.n_tx;
    f.data.resize(s.data.size());

    std::vector<cdouble> record(static_cast<std::size_t>(s.length));
    for (int p = 0; p < s.n_pulses; ++p) {
        for (int t = 0; t < s.n_tx; ++t) {
            for (long l = 0; l < s.length; ++l) record[static_cast<std::size_t>(l)] = s.at(p, l, t);
            const std::vector<cdouble> spec = dft(record);
            for (long n = 0; n < s.length; ++n) f.at(p, n, t) = spec[static_cast<std::size_t>(n)];
        }
    }
    return f;
}

}  // namespace isac
