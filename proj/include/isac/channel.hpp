#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "isac/waveform.hpp"

namespace isac {

// Received complex samples for one tracking step: the measurement set y_k.
// Pulsed mode fills the time-domain block y[p][l] in C^{N_r}; CW mode fills
// the per-symbol frequency-domain block ybar[p][m][n] in C^{N_r}.
struct SnapshotCube {
    Scheme scheme = Scheme::Pulsed;
    int n_pulses = 0;
    long length = 0;  // L (pulsed)
    int n_symbols = 0;
    int n_subcarriers = 0;  // N_c (CW)
    int n_rx = 0;
    std::vector<cdouble> data;

    cdouble& at_time(int p, long l, int r) {
        return data[static_cast<std::size_t>((static_cast<long>(p) * length + l) * n_rx + r)];
    }
    const cdouble& at_time(int p, long l, int r) const {
        return data[static_cast<std::size_t>((static_cast<long>(p) * length + l) * n_rx + r)];
    }
    cdouble& at_freq(int p, int m, int n, int r) {
        return data[static_cast<std::size_t>(((p * n_symbols + m) * n_subcarriers + n) * n_rx + r)];
    }
    const cdouble& at_freq(int p, int m, int n, int r) const {
        return data[static_cast<std::size_t>(((p * n_symbols + m) * n_subcarriers + n) * n_rx + r)];
    }
};

// Pulsed-mode receive simulation: target + scatterer returns (delays quantized
// to range bins) plus circularly-symmetric complex Gaussian noise of
// per-element variance sigma^2_cn. Shifted indices outside [0, L) read as zero.
SnapshotCube simulate_rx_time(const TxTimeSignal& s, const TargetTruth& truth,
                              const std::vector<Scatterer>& scatterers, const RadarConfig& cfg,
                              std::uint64_t seed);

// CW-mode receive simulation after CP removal, per (pulse, symbol, subcarrier).
// Uses the unquantized delay in the subcarrier phase ramp. All delays must be
// covered by the CP so that circularity holds.
SnapshotCube simulate_rx_cw(const ConstellationCube& c, const TargetTruth& truth,
                            const std::vector<Scatterer>& scatterers, const RadarConfig& cfg,
                            std::uint64_t seed);

// Fast-fading gain: [0.9 + 0.1 (2 r1 - 1)] e^{j 2 pi r2}, r1 ~ U[0,1], r2 ~ N(0,1).
cdouble sample_path_gain(std::uint64_t seed, long k);

// Little-endian binary dump (debugging aid): dims header then interleaved
// re/im doubles.
void dump_snapshot(const SnapshotCube& cube, const std::string& path);

}  // namespace isac
