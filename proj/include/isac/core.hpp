#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "isac/dft.hpp"

namespace isac {

constexpr double kLightSpeed = 299792458.0;  // m/s, exact
constexpr double kPi = 3.14159265358979323846;

using Vec2 = std::array<double, 2>;

enum class Scheme { Pulsed, Cw };

// System and waveform constants of one mono-static station.
// All frequencies in Hz, times in seconds, power linear.
struct RadarConfig {
    double f_c = 10e9;     // carrier frequency
    double B = 51.2e6;     // bandwidth; T_s = 1/B
    double P_t = 1.0;      // per-antenna transmit power
    int N_t = 64;          // transmit elements
    int N_r = 64;          // receive elements
    double T_t = 50e-3;    // tracking period
    int N_p = 1;           // pulses per CPI
    double T_r = 0.0;      // PRI; 0 in CW mode means "derive as T_p"
    double T_c = 1e-6;     // cyclic-prefix duration
    double T_o = 5e-6;     // OFDM symbol duration = N_c/B
    int M = 1;             // OFDM symbols per pulse
    int N_c = 256;         // subcarriers
    Scheme scheme = Scheme::Cw;
    double snr_db = -10.0;

    double wavelength() const { return kLightSpeed / f_c; }
    double sample_time() const { return 1.0 / B; }
    double pulse_duration() const { return static_cast<double>(M) * (T_c + T_o); }  // T_p
    double cpi() const { return static_cast<double>(N_p) * T_r; }                   // T_i
    double subcarrier_spacing() const { return 1.0 / T_o; }
    double noise_power() const { return P_t * std::pow(10.0, -snr_db / 10.0); }     // sigma^2_cn
};

// Quantities derived from a validated RadarConfig.
struct DerivedLimits {
    double R_max_d = 0.0;  // maximum detectable range (m)
    double R_min_d = 0.0;  // minimum detectable range (m)
    double nu_min_ua = 0.0;
    double nu_max_ua = 0.0;
    double range_resolution = 0.0;    // C/(2B)
    double doppler_resolution = 0.0;  // 1/T_i
    long L = 0;     // samples per PRI
    long L_ss = 0;  // nonzero samples per pulse
    long N_cr = 0;  // ranging FFT length (L pulsed, N_c for CW per-symbol processing)
    long n_cp = 0;  // cyclic-prefix samples
};

struct TargetTruth {
    Vec2 position{0.0, 0.0};  // m
    Vec2 velocity{0.0, 0.0};  // m/s
    cdouble beta{1.0, 0.0};   // path gain for the current tracking step
};

struct Scatterer {
    cdouble beta{0.0, 0.0};
    double tau = 0.0;    // s
    double nu = 0.0;     // Hz
    double theta = 0.0;  // rad
};

struct Polar {
    double tau = 0.0;    // round-trip delay (s)
    double nu = 0.0;     // Doppler shift (Hz), approaching => positive
    double theta = 0.0;  // DoA from boresight (rad), CCW positive
};

// round-half-away-from-zero, the paper's rounding for sample counts
inline long round_away(double x) { return static_cast<long>(x < 0 ? std::ceil(x - 0.5) : std::floor(x + 0.5)); }

// ULA steering vector, half-wavelength spacing: element t is exp(-j pi t sin(theta)).
std::vector<cdouble> steering(double theta, int n_elems);

// Translate a Cartesian state to the station's polar view. The array lies along
// the y axis with boresight +x; theta is measured CCW from boresight. The
// station sits at `station` with its boresight rotated by `boresight` rad.
Polar cartesian_to_polar(const Vec2& position, const Vec2& velocity, const RadarConfig& cfg,
                         const Vec2& station = {0.0, 0.0}, double boresight = 0.0);

inline Polar cartesian_to_polar(const TargetTruth& truth, const RadarConfig& cfg) {
    return cartesian_to_polar(truth.position, truth.velocity, cfg);
}

// Validate the config invariants and compute derived limits. Throws
// std::invalid_argument on a violated ordering or inconsistent timing.
// Normalizes cfg first when T_r is left 0 in CW mode.
DerivedLimits derive(RadarConfig& cfg);

// JSON (de)serialization; field names are the snake_case names above.
RadarConfig radar_config_from_json_text(const std::string& text);
RadarConfig radar_config_from_json_file(const std::string& path);

}  // namespace isac
