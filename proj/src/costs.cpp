#include "isac/costs.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace isac {

namespace {

// a^H R a for a row-major Hermitian R.
double quad_form(const std::vector<cdouble>& a, const std::vector<cdouble>& r) {
    const std::size_t n = a.size();
    cdouble acc(0.0, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) acc += std::conj(a[i]) * r[i * n + j] * a[j];
    return acc.real();
}

double sum_power(const SnapshotCube& y) {
    double acc = 0.0;
    for (const auto& v : y.data) acc += std::norm(v);
    return acc;
}

double neg_log_sq(const cdouble& mf) {
    const double p = std::norm(mf);
    if (p <= 0.0) return std::numeric_limits<double>::infinity();
    return -std::log(p);
}

}  // namespace

SnapshotCube to_freq(const SnapshotCube& y) {
    if (y.scheme != Scheme::Pulsed || y.length == 0)
        throw std::invalid_argument("to_freq: time-domain pulsed cube required");
    SnapshotCube f = y;
    std::vector<cdouble> record(static_cast<std::size_t>(y.length));
    for (int p = 0; p < y.n_pulses; ++p) {
        for (int r = 0; r < y.n_rx; ++r) {
            for (long l = 0; l < y.length; ++l) record[static_cast<std::size_t>(l)] = y.at_time(p, l, r);
            const auto spec = dft(record);
            for (long n = 0; n < y.length; ++n) f.at_time(p, n, r) = spec[static_cast<std::size_t>(n)];
        }
    }
    return f;
}

cdouble mf_time(const SnapshotCube& y, const TxTimeSignal& s, const Hypothesis& phi,
                const RadarConfig& cfg) {
    if (y.n_pulses != s.n_pulses || y.length != s.length)
        throw std::invalid_argument("mf_time: shape mismatch between snapshot and transmit record");
    const auto a = steering(phi.theta, cfg.N_t);
    const auto b = steering(phi.theta, cfg.N_r);
    const long q = round_away(phi.tau / cfg.sample_time());

    cdouble acc(0.0, 0.0);
    for (int p = 0; p < y.n_pulses; ++p) {
        const double dop = 2.0 * kPi * static_cast<double>(p) * cfg.T_r * phi.nu;
        const cdouble phase(std::cos(dop), std::sin(dop));
        cdouble pulse_acc(0.0, 0.0);
        for (long l = 0; l < y.length; ++l) {
            const long src = l - q;
            if (src < 0 || src >= s.length) continue;
            cdouble tx(0.0, 0.0);  // a^H s_p(l - q)
            for (int t = 0; t < cfg.N_t; ++t) tx += std::conj(a[static_cast<std::size_t>(t)]) * s.at(p, src, t);
            if (tx == cdouble(0.0, 0.0)) continue;
            cdouble rx(0.0, 0.0);  // y_p^H(l) b
            for (int r = 0; r < cfg.N_r; ++r) rx += std::conj(y.at_time(p, l, r)) * b[static_cast<std::size_t>(r)];
            pulse_acc += rx * tx;
        }
        acc += pulse_acc * phase;
    }
    return acc;
}

cdouble mf_freq(const SnapshotCube& ybar, const TxFreqSignal& sbar, const Hypothesis& phi,
                const RadarConfig& cfg) {
    if (ybar.n_pulses != sbar.n_pulses || ybar.length != sbar.n_bins)
        throw std::invalid_argument("mf_freq: shape mismatch");
    const auto a = steering(phi.theta, cfg.N_t);
    const auto b = steering(phi.theta, cfg.N_r);
    const double delta = cfg.B / static_cast<double>(sbar.n_bins);
    const double ramp_step = -2.0 * kPi * delta * phi.tau;
    const cdouble step(std::cos(ramp_step), std::sin(ramp_step));

    cdouble acc(0.0, 0.0);
    for (int p = 0; p < ybar.n_pulses; ++p) {
        const double dop = 2.0 * kPi * static_cast<double>(p) * cfg.T_r * phi.nu;
        const cdouble phase(std::cos(dop), std::sin(dop));
        cdouble ramp(1.0, 0.0);
        cdouble pulse_acc(0.0, 0.0);
        for (long n = 0; n < ybar.length; ++n) {
            cdouble tx(0.0, 0.0);
            for (int t = 0; t < cfg.N_t; ++t) tx += std::conj(a[static_cast<std::size_t>(t)]) * sbar.at(p, n, t);
            cdouble rx(0.0, 0.0);
            for (int r = 0; r < cfg.N_r; ++r) rx += std::conj(ybar.at_time(p, n, r)) * b[static_cast<std::size_t>(r)];
            pulse_acc += rx * tx * ramp;
            ramp *= step;
        }
        acc += pulse_acc * phase;
    }
    return acc;
}

cdouble mf_cw(const SnapshotCube& ybar, const ConstellationCube& c, const Hypothesis& phi,
              const RadarConfig& cfg) {
    if (ybar.n_pulses != c.n_pulses || ybar.n_symbols != c.n_symbols ||
        ybar.n_subcarriers != c.n_subcarriers)
        throw std::invalid_argument("mf_cw: shape mismatch");
    const auto a = steering(phi.theta, cfg.N_t);
    const auto b = steering(phi.theta, cfg.N_r);
    const double ramp_step = -2.0 * kPi * cfg.subcarrier_spacing() * phi.tau;
    const cdouble step(std::cos(ramp_step), std::sin(ramp_step));

    cdouble acc(0.0, 0.0);
    for (int p = 0; p < ybar.n_pulses; ++p) {
        const double dop = 2.0 * kPi * static_cast<double>(p) * cfg.T_r * phi.nu;
        const cdouble phase(std::cos(dop), std::sin(dop));
        cdouble pulse_acc(0.0, 0.0);
        for (int m = 0; m < ybar.n_symbols; ++m) {
            cdouble ramp(1.0, 0.0);
            for (int n = 0; n < ybar.n_subcarriers; ++n) {
                cdouble tx(0.0, 0.0);
                for (int t = 0; t < cfg.N_t; ++t) tx += std::conj(a[static_cast<std::size_t>(t)]) * c.at(p, m, n, t);
                cdouble rx(0.0, 0.0);
                for (int r = 0; r < cfg.N_r; ++r)
                    rx += std::conj(ybar.at_freq(p, m, n, r)) * b[static_cast<std::size_t>(r)];
                pulse_acc += rx * tx * ramp;
                ramp *= step;
            }
        }
        acc += pulse_acc * phase;
    }
    return acc;
}

double h1(const SnapshotCube& y, const TxTimeSignal& s, const Hypothesis& phi,
          const RadarConfig& cfg, RsMode rs_mode) {
    RadarConfig local = cfg;
    const DerivedLimits d = derive(local);
    const cdouble mf = mf_time(y, s, phi, cfg);
    double denom;
    if (rs_mode == RsMode::White) {
        denom = cfg.P_t * cfg.N_t * cfg.N_r * cfg.N_p * static_cast<double>(d.L_ss);
    } else {
        const auto a = steering(phi.theta, cfg.N_t);
        denom = cfg.N_r * cfg.N_p * static_cast<double>(d.L_ss) * quad_form(a, empirical_rs_time(s, cfg));
    }
    if (denom <= 0.0) throw std::invalid_argument("h1: degenerate transmit correlation");
    return sum_power(y) - std::norm(mf) / denom;
}

double h2(const SnapshotCube& ybar, const TxFreqSignal& sbar, const Hypothesis& phi,
          const RadarConfig& cfg, RsMode rs_mode) {
    const double n_cr = static_cast<double>(sbar.n_bins);
    const cdouble mf = mf_freq(ybar, sbar, phi, cfg);
    double denom;
    if (rs_mode == RsMode::White) {
        denom = cfg.P_t * cfg.N_t * cfg.N_r * cfg.N_p * n_cr;
    } else {
        const auto a = steering(phi.theta, cfg.N_t);
        denom = cfg.N_r * cfg.N_p * n_cr * quad_form(a, empirical_rs_freq(sbar));
    }
    if (denom <= 0.0) throw std::invalid_argument("h2: degenerate transmit correlation");
    return sum_power(ybar) - std::norm(mf) / denom;
}

double h2_cw(const SnapshotCube& ybar, const ConstellationCube& c, const Hypothesis& phi,
             const RadarConfig& cfg, RsMode rs_mode) {
    const double n_terms = static_cast<double>(c.n_symbols) * c.n_subcarriers;
    const cdouble mf = mf_cw(ybar, c, phi, cfg);
    double denom;
    if (rs_mode == RsMode::White) {
        denom = cfg.P_t * cfg.N_t * cfg.N_r * cfg.N_p * n_terms;
    } else {
        const auto a = steering(phi.theta, cfg.N_t);
        denom = cfg.N_r * cfg.N_p * n_terms * quad_form(a, empirical_rs_cw(c));
    }
    if (denom <= 0.0) throw std::invalid_argument("h2_cw: degenerate transmit correlation");
    return sum_power(ybar) - std::norm(mf) / denom;
}

double h3(const SnapshotCube& y, const TxTimeSignal& s, const Hypothesis& phi, const RadarConfig& cfg) {
    return neg_log_sq(mf_time(y, s, phi, cfg));
}

double h4(const SnapshotCube& ybar, const TxFreqSignal& sbar, const Hypothesis& phi,
          const RadarConfig& cfg) {
    return neg_log_sq(mf_freq(ybar, sbar, phi, cfg));
}

double h4_cw(const SnapshotCube& ybar, const ConstellationCube& c, const Hypothesis& phi,
             const RadarConfig& cfg) {
    return neg_log_sq(mf_cw(ybar, c, phi, cfg));
}

TrackingGate tracking_gate(const Hypothesis& phi0, const RadarConfig& cfg) {
    TrackingGate g;
    g.tau_lo = phi0.tau - 1.0 / cfg.B;
    g.tau_hi = phi0.tau + 1.0 / cfg.B;
    const double t_i = cfg.cpi();
    g.nu_lo = phi0.nu - 1.0 / t_i;
    g.nu_hi = phi0.nu + 1.0 / t_i;
    const double n_tr = static_cast<double>(std::max(cfg.N_t, cfg.N_r));
    const double s0 = std::sin(phi0.theta);
    const double lo = std::max(-1.0, s0 - 2.0 / n_tr);
    const double hi = std::min(1.0, s0 + 2.0 / n_tr);
    g.theta_lo = std::asin(lo);
    g.theta_hi = std::asin(hi);
    return g;
}

double dirichlet_kernel(double x, int n) {
    const double num = std::sin(kPi * x);
    const double den = std::sin(kPi * x / static_cast<double>(n));
    if (std::abs(den) < 1e-12) {
        // removable singularity at integer multiples of n
        return static_cast<double>(n);
    }
    return std::abs(num / den);
}

double expected_ambiguity_magnitude(const Hypothesis& phi, const Hypothesis& phi0,
                                    const RadarConfig& cfg, double beta_mag) {
    RadarConfig local = cfg;
    const DerivedLimits d = derive(local);
    const double ds = std::sin(phi.theta) - std::sin(phi0.theta);
    const double d_t = dirichlet_kernel(0.5 * cfg.N_t * ds, cfg.N_t);
    const double d_r = dirichlet_kernel(0.5 * cfg.N_r * ds, cfg.N_r);
    const double d_range = dirichlet_kernel(cfg.B * (phi0.tau - phi.tau), static_cast<int>(d.N_cr));
    const double d_dop = dirichlet_kernel(cfg.cpi() * (phi.nu - phi0.nu), cfg.N_p);
    return beta_mag * cfg.P_t * d_t * d_r * d_range * d_dop;
}

std::vector<cdouble> empirical_rs_time(const TxTimeSignal& s, const RadarConfig& cfg) {
    RadarConfig local = cfg;
    const DerivedLimits d = derive(local);
    const int n = s.n_tx;
    std::vector<cdouble> rs(static_cast<std::size_t>(n) * n, cdouble(0.0, 0.0));
    for (int p = 0; p < s.n_pulses; ++p)
        for (long l = 0; l < s.length; ++l)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    rs[static_cast<std::size_t>(i) * n + j] += s.at(p, l, i) * std::conj(s.at(p, l, j));
    const double scale = 1.0 / (static_cast<double>(s.n_pulses) * static_cast<double>(d.L_ss));
    for (auto& v : rs) v *= scale;
    return rs;
}

std::vector<cdouble> empirical_rs_freq(const TxFreqSignal& sbar) {
    const int n = sbar.n_tx;
    std::vector<cdouble> rs(static_cast<std::size_t>(n) * n, cdouble(0.0, 0.0));
    for (int p = 0; p < sbar.n_pulses; ++p)
        for (long b = 0; b < sbar.n_bins; ++b)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    rs[static_cast<std::size_t>(i) * n + j] += sbar.at(p, b, i) * std::conj(sbar.at(p, b, j));
    const double scale = 1.0 / (static_cast<double>(sbar.n_pulses) * static_cast<double>(sbar.n_bins));
    for (auto& v : rs) v *= scale;
    return rs;
}

std::vector<cdouble> empirical_rs_cw(const ConstellationCube& c) {
    const int n = c.n_tx;
    std::vector<cdouble> rs(static_cast<std::size_t>(n) * n, cdouble(0.0, 0.0));
    for (int p = 0; p < c.n_pulses; ++p)
        for (int m = 0; m < c.n_symbols; ++m)
            for (int sc = 0; sc < c.n_subcarriers; ++sc)
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        rs[static_cast<std::size_t>(i) * n + j] += c.at(p, m, sc, i) * std::conj(c.at(p, m, sc, j));
    const double scale =
        1.0 / (static_cast<double>(c.n_pulses) * c.n_symbols * static_cast<double>(c.n_subcarriers));
    for (auto& v : rs) v *= scale;
    return rs;
}

}  // namespace isac
