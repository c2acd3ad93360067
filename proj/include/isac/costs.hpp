#pragma once

#include "isac/channel.hpp"

namespace isac {

// Hypothesized target parameters phi = (tau, nu, theta).
struct Hypothesis {
    double tau = 0.0;
    double nu = 0.0;
    double theta = 0.0;
};

// Region around phi0 where the expected ambiguity magnitude is unimodal:
// +-1/B in delay, +-1/T_i in Doppler, +-2/N_tr in sin-DoA space.
struct TrackingGate {
    double tau_lo = 0.0, tau_hi = 0.0;
    double nu_lo = 0.0, nu_hi = 0.0;
    double theta_lo = 0.0, theta_hi = 0.0;

    bool contains(const Hypothesis& phi) const {
        return phi.tau >= tau_lo && phi.tau <= tau_hi && phi.nu >= nu_lo && phi.nu <= nu_hi &&
               phi.theta >= theta_lo && phi.theta <= theta_hi;
    }
};

enum class RsMode { White, Empirical };

// Forward DFT of each pulse record of a time-domain snapshot cube, per rx
// element. Layout mirrors the input with l replaced by the frequency bin.
SnapshotCube to_freq(const SnapshotCube& y);

// Time-domain matched filter (pulsed):
//   sum_p sum_l y_p^H(l) b(theta) a^H(theta) s_p(l - round(tau/T_s)) e^{j 2 pi p T_r nu}
cdouble mf_time(const SnapshotCube& y, const TxTimeSignal& s, const Hypothesis& phi,
                const RadarConfig& cfg);

// Frequency-domain matched filter (pulsed); the delay enters as a continuous
// phase ramp with bin width B/N_cr.
cdouble mf_freq(const SnapshotCube& ybar, const TxFreqSignal& sbar, const Hypothesis& phi,
                const RadarConfig& cfg);

// CW matched filter over (pulse, symbol, subcarrier) against the
// constellation reference.
cdouble mf_cw(const SnapshotCube& ybar, const ConstellationCube& c, const Hypothesis& phi,
              const RadarConfig& cfg);

// Least-squares costs (gain marginalized in closed form); always >= 0.
double h1(const SnapshotCube& y, const TxTimeSignal& s, const Hypothesis& phi,
          const RadarConfig& cfg, RsMode rs_mode = RsMode::White);
double h2(const SnapshotCube& ybar, const TxFreqSignal& sbar, const Hypothesis& phi,
          const RadarConfig& cfg, RsMode rs_mode = RsMode::White);
double h2_cw(const SnapshotCube& ybar, const ConstellationCube& c, const Hypothesis& phi,
             const RadarConfig& cfg, RsMode rs_mode = RsMode::White);

// Log-ambiguity costs: -ln |mf|^2. Zero matched-filter output maps to the
// +infinity sentinel (weight exactly zero), never a crash.
double h3(const SnapshotCube& y, const TxTimeSignal& s, const Hypothesis& phi, const RadarConfig& cfg);
double h4(const SnapshotCube& ybar, const TxFreqSignal& sbar, const Hypothesis& phi,
          const RadarConfig& cfg);
double h4_cw(const SnapshotCube& ybar, const ConstellationCube& c, const Hypothesis& phi,
             const RadarConfig& cfg);

TrackingGate tracking_gate(const Hypothesis& phi0, const RadarConfig& cfg);

// |sin(pi x) / sin(pi x / N)| with the removable singularity D_N(m N) = N.
double dirichlet_kernel(double x, int n);

// Expected magnitude of the frequency-domain matched filter under white
// transmit correlation and no scatterers: the four-Dirichlet product
//   |beta0| P_t D_Nt D_Nr D_Ncr D_Np.
double expected_ambiguity_magnitude(const Hypothesis& phi, const Hypothesis& phi0,
                                    const RadarConfig& cfg, double beta_mag = 1.0);

// Empirical spatial correlation matrices (row-major N_t x N_t).
std::vector<cdouble> empirical_rs_time(const TxTimeSignal& s, const RadarConfig& cfg);
std::vector<cdouble> empirical_rs_freq(const TxFreqSignal& sbar);
std::vector<cdouble> empirical_rs_cw(const ConstellationCube& c);

}  // namespace isac
