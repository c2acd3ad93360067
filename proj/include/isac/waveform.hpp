#pragma once

#include <cstdint>
#include <vector>

#include "isac/core.hpp"

namespace isac {

// QAM constellation symbols c[p][m][n] in C^{N_t}, one vector per
// (pulse, symbol, subcarrier). Unit-average-energy alphabet scaled by
// sqrt(P_t) so the per-antenna average power is P_t.
struct ConstellationCube {
    int n_pulses = 0;
    int n_symbols = 0;
    int n_subcarriers = 0;
    int n_tx = 0;
    std::vector<cdouble> data;  // [p][m][n][t] flattened

    cdouble& at(int p, int m, int n, int t) {
        return data[static_cast<std::size_t>(((p * n_symbols + m) * n_subcarriers + n) * n_tx + t)];
    }
    const cdouble& at(int p, int m, int n, int t) const {
        return data[static_cast<std::size_t>(((p * n_symbols + m) * n_subcarriers + n) * n_tx + t)];
    }
};

// Time-domain transmit record s[p][l] in C^{N_t}; length L per pulse with the
// silent slot zeroed in pulsed mode.
struct TxTimeSignal {
    int n_pulses = 0;
    long length = 0;  // L
    int n_tx = 0;
    std::vector<cdouble> data;  // [p][l][t]

    cdouble& at(int p, long l, int t) {
        return data[static_cast<std::size_t>((static_cast<long>(p) * length + l) * n_tx + t)];
    }
    const cdouble& at(int p, long l, int t) const {
        return data[static_cast<std::size_t>((static_cast<long>(p) * length + l) * n_tx + t)];
    }
};

// Frequency-domain transmit reference sbar[p][n] in C^{N_t}; bin width B/N_cr.
struct TxFreqSignal {
    int n_pulses = 0;
    long n_bins = 0;  // N_cr
    int n_tx = 0;
    std::vector<cdouble> data;  // [p][n][t]

    cdouble& at(int p, long n, int t) {
        return data[static_cast<std::size_t>((static_cast<long>(p) * n_bins + n) * n_tx + t)];
    }
    const cdouble& at(int p, long n, int t) const {
        return data[static_cast<std::size_t>((static_cast<long>(p) * n_bins + n) * n_tx + t)];
    }
};

// Draw i.i.d. QAM symbols for every (pulse, symbol, subcarrier, antenna).
// qam_order must be a perfect square >= 4. Deterministic given seed; each
// (p, m) block derives its randomness from a stream keyed by (seed, p, m).
ConstellationCube gen_constellation(const RadarConfig& cfg, int qam_order, std::uint64_t seed);

// Per symbol: length-N_c inverse DFT over subcarriers, prepend the last n_cp
// payload samples as cyclic prefix, concatenate the M blocks, zero-pad the
// silent slot in pulsed mode.
TxTimeSignal assemble_pulse(const ConstellationCube& c, const RadarConfig& cfg);

// Forward DFT of the full length-L record, CPs and silence included
// (pulsed mode only; CW processing uses the constellation itself).
TxFreqSignal fft_full_pri(const TxTimeSignal& s, const RadarConfig& cfg);

}  // namespace isac
