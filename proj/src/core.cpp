#include "isac/core.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace isac {

std::vector<cdouble> steering(double theta, int n_elems) {
    if (n_elems < 1) throw std::invalid_argument("steering: n_elems must be >= 1");
    if (std::abs(theta) > kPi / 2 + 1e-12) throw std::invalid_argument("steering: |theta| exceeds pi/2");
    std::vector<cdouble> a(static_cast<std::size_t>(n_elems));
    const double s = std::sin(theta);
    for (int t = 0; t < n_elems; ++t) {
        const double phase = -kPi * static_cast<double>(t) * s;
        a[static_cast<std::size_t>(t)] = cdouble(std::cos(phase), std::sin(phase));
    }
    return a;
}

Polar cartesian_to_polar(const Vec2& position, const Vec2& velocity, const RadarConfig& cfg,
                         const Vec2& station, double boresight) {
    const double dx = position[0] - station[0];
    const double dy = position[1] - station[1];
    const double range = std::hypot(dx, dy);
    if (range <= 0.0) throw std::invalid_argument("cartesian_to_polar: target at station (bearing undefined)");
    Polar out;
    out.tau = 2.0 * range / kLightSpeed;
    // radial speed, positive when receding; approaching target => positive Doppler
    const double v_radial = (dx * velocity[0] + dy * velocity[1]) / range;
    out.nu = -2.0 * v_radial / cfg.wavelength();
    double theta = std::atan2(dy, dx) - boresight;
    while (theta > kPi) theta -= 2.0 * kPi;
    while (theta < -kPi) theta += 2.0 * kPi;
    out.theta = theta;
    return out;
}

DerivedLimits derive(RadarConfig& cfg) {
    if (cfg.B <= 0 || cfg.f_c <= 0 || cfg.P_t <= 0) throw std::invalid_argument("config: positive f_c, B, P_t required");
    if (cfg.N_t < 1 || cfg.N_r < 1 || cfg.N_p < 1 || cfg.M < 1 || cfg.N_c < 1)
        throw std::invalid_argument("config: counts must be >= 1");

    const double T_s = cfg.sample_time();
    if (std::abs(cfg.T_o - static_cast<double>(cfg.N_c) / cfg.B) > 1e-9 * cfg.T_o)
        throw std::invalid_argument("config: T_o must equal N_c/B");

    const double T_p = cfg.pulse_duration();
    if (cfg.scheme == Scheme::Cw) {
        if (cfg.T_r == 0.0) cfg.T_r = T_p;
        if (std::abs(cfg.T_r - T_p) > 1e-12 * T_p)
            throw std::invalid_argument("config: CW scheme requires T_r = T_p");
    }
    if (cfg.T_r < T_p * (1.0 - 1e-12)) throw std::invalid_argument("config: ordering T_p <= T_r violated");
    const double T_i = cfg.cpi();
    if (T_i > cfg.T_t * (1.0 + 1e-12)) throw std::invalid_argument("config: ordering T_i <= T_t violated");

    DerivedLimits d;
    d.L = round_away(cfg.T_r / T_s);
    d.L_ss = round_away(T_p / T_s);
    d.n_cp = round_away(cfg.T_c / T_s);
    if (d.L_ss > d.L) throw std::invalid_argument("config: L_ss exceeds L");
    if (d.L_ss != static_cast<long>(cfg.M) * (d.n_cp + cfg.N_c))
        throw std::invalid_argument("config: sampled pulse length inconsistent with M*(n_cp + N_c)");

    d.range_resolution = kLightSpeed / (2.0 * cfg.B);
    d.doppler_resolution = 1.0 / T_i;
    d.nu_min_ua = -0.5 / cfg.T_r;
    d.nu_max_ua = 0.5 / cfg.T_r;
    if (cfg.scheme == Scheme::Pulsed) {
        // time-division duplex: blind during the pulse itself
        d.R_min_d = kLightSpeed * T_p / 2.0;
        d.R_max_d = kLightSpeed * (cfg.T_r - T_p) / 2.0;
        d.N_cr = d.L;
    } else {
        d.R_min_d = 0.0;
        d.R_max_d = kLightSpeed * cfg.T_c / 2.0;  // circularity bound from the CP
        d.N_cr = cfg.N_c;
    }
    return d;
}

RadarConfig radar_config_from_json_text(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    RadarConfig cfg;
    cfg.f_c = j.at("f_c").get<double>();
    cfg.B = j.at("B").get<double>();
    cfg.P_t = j.at("P_t").get<double>();
    cfg.N_t = j.at("N_t").get<int>();
    cfg.N_r = j.at("N_r").get<int>();
    cfg.T_t = j.at("T_t").get<double>();
    cfg.N_p = j.at("N_p").get<int>();
    cfg.T_r = j.value("T_r", 0.0);
    cfg.T_c = j.at("T_c").get<double>();
    cfg.T_o = j.at("T_o").get<double>();
    cfg.M = j.at("M").get<int>();
    cfg.N_c = j.at("N_c").get<int>();
    const std::string scheme = j.at("scheme").get<std::string>();
    if (scheme == "pulsed") {
        cfg.scheme = Scheme::Pulsed;
    } else if (scheme == "cw") {
        cfg.scheme = Scheme::Cw;
    } else {
        throw std::invalid_argument("config: scheme must be \"pulsed\" or \"cw\"");
    }
    cfg.snr_db = j.at("snr_db").get<double>();
    return cfg;
}

RadarConfig radar_config_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return radar_config_from_json_text(ss.str());
}

}  // namespace isac
