#include "isac/harness.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <future>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "isac/channel.hpp"
#include "isac/rng.hpp"
#include "isac/waveform.hpp"

namespace isac {

namespace {

using nlohmann::json;

double get_or(const json& j, const char* key, double fallback) {
    return j.contains(key) ? j.at(key).get<double>() : fallback;
}

void validate_point(const TargetTruth& truth, const Scenario& sc, long k) {
    for (const auto& station : sc.stations) {
        const double dx = truth.position[0] - station[0];
        const double dy = truth.position[1] - station[1];
        const double range = std::hypot(dx, dy);
        if (range < sc.limits.R_min_d || range > sc.limits.R_max_d) {
            char buf[160];
            std::snprintf(buf, sizeof(buf),
                          "build_scenario: step %ld range %.3f m outside detectable [%.3f, %.3f]",
                          k, range, sc.limits.R_min_d, sc.limits.R_max_d);
            throw std::invalid_argument(buf);
        }
    }
}

struct TrialResult {
    std::vector<StepRecord> records;
    double sq_sum = 0.0;
    double step_seconds = 0.0;
    long divergences = 0;
};

void recover_uniform(ParticleCloud& cloud) {
    for (auto& p : cloud.particles) p.weight = 1.0 / static_cast<double>(cloud.particles.size());
}

void dispatch_step(Method method, ParticleCloud& cloud, const SnapshotCube& y,
                   const TxReference& tx, const RadarConfig& cfg, const FilterSettings& fs,
                   const Vec2& station) {
    switch (method) {
        case Method::PfSltr: pf_sltr_step(cloud, y, tx, cfg, fs, station); break;
        case Method::PfIltr: pf_iltr_step(cloud, y, tx, cfg, fs, station); break;
        case Method::PfSltrA: pf_sltr_a_step(cloud, y, tx, cfg, fs, station); break;
        case Method::RbpfSltrA: rbpf_sltr_a_step(cloud, y, tx, cfg, fs, station); break;
    }
}

TargetTruth station_frame(const TargetTruth& truth, const Vec2& station) {
    TargetTruth local = truth;
    local.position[0] -= station[0];
    local.position[1] -= station[1];
    return local;
}

// Simulate one snapshot for one station; fills the owning storage and returns
// the reference views the filters need.
struct StepData {
    ConstellationCube c;
    TxTimeSignal s;
    TxFreqSignal sbar;
    SnapshotCube y;
    TxReference tx;
};

void simulate_step(StepData& d, const Scenario& sc, const TargetTruth& truth, const Vec2& station,
                   std::uint64_t wave_seed, std::uint64_t noise_seed) {
    const TargetTruth local = station_frame(truth, station);
    d.c = gen_constellation(sc.cfg, sc.qam_order, wave_seed);
    if (sc.cfg.scheme == Scheme::Pulsed) {
        d.s = assemble_pulse(d.c, sc.cfg);
        d.sbar = fft_full_pri(d.s, sc.cfg);
        d.y = simulate_rx_time(d.s, local, sc.scatterers, sc.cfg, noise_seed);
        d.tx = {&d.s, &d.sbar, nullptr};
    } else {
        d.y = simulate_rx_cw(d.c, local, sc.scatterers, sc.cfg, noise_seed);
        d.tx = {nullptr, nullptr, &d.c};
    }
}

TrialResult run_trial(const Scenario& sc, Method method, int trial) {
    TrialResult result;
    FilterSettings fs = sc.filter;
    fs.seed = Rng::stream(sc.seed, 0x5eULL, static_cast<std::uint64_t>(trial)).next();
    const std::uint64_t gain_seed =
        Rng::stream(sc.seed, 0xfaULL, static_cast<std::uint64_t>(trial)).next();
    const Vec2 station = sc.stations[0];
    ParticleCloud cloud = init_cloud(sc.trajectory[0], sc.cfg, fs, fs.seed, {1.0, 0.0}, 0.5, station);

    StepData d;
    for (long k = 0; k < static_cast<long>(sc.trajectory.size()); ++k) {
        TargetTruth truth = sc.trajectory[k];
        if (sc.fast_fading) truth.beta = sample_path_gain(gain_seed, k);
        const std::uint64_t wseed = Rng::stream(sc.seed, 0x77ULL, static_cast<std::uint64_t>(trial),
                                                static_cast<std::uint64_t>(k)).next();
        const std::uint64_t nseed = Rng::stream(sc.seed, 0x6eULL, static_cast<std::uint64_t>(trial),
                                                static_cast<std::uint64_t>(k)).next();
        simulate_step(d, sc, truth, station, wseed, nseed);

        const auto t0 = std::chrono::steady_clock::now();
        try {
            dispatch_step(method, cloud, d.y, d.tx, sc.cfg, fs, station);
        } catch (const DegenerateUpdateError&) {
            recover_uniform(cloud);
            ++result.divergences;
        }
        const auto t1 = std::chrono::steady_clock::now();
        result.step_seconds += std::chrono::duration<double>(t1 - t0).count();

        StepRecord rec;
        rec.trial = trial;
        rec.k = k;
        rec.est = estimate_position(cloud);
        rec.truth = truth.position;
        const double ex = rec.est[0] - rec.truth[0];
        const double ey = rec.est[1] - rec.truth[1];
        rec.sq_err = ex * ex + ey * ey;
        result.sq_sum += rec.sq_err;
        result.records.push_back(rec);
    }
    return result;
}

PointCloud thin_cloud(const ParticleCloud& cloud, int n_atoms, std::uint64_t seed) {
    Rng rng = Rng::stream(seed, 0x74ULL);
    const double offset = rng.uniform();
    PointCloud out;
    out.atoms.reserve(static_cast<std::size_t>(n_atoms));
    double cum = cloud.particles[0].weight;
    std::size_t j = 0;
    for (int i = 0; i < n_atoms; ++i) {
        const double u = (offset + static_cast<double>(i)) / static_cast<double>(n_atoms);
        while (u > cum && j + 1 < cloud.particles.size()) cum += cloud.particles[++j].weight;
        const auto& p = cloud.particles[j];
        out.atoms.push_back({p.pos[0], p.pos[1], p.vel[0], p.vel[1]});
    }
    out.weights.assign(out.atoms.size(), 1.0 / static_cast<double>(n_atoms));
    return out;
}

TrialResult run_multipoint_trial(const Scenario& sc, int z_stations, int trial) {
    TrialResult result;
    const std::uint64_t gain_seed =
        Rng::stream(sc.seed, 0xfaULL, static_cast<std::uint64_t>(trial)).next();

    std::vector<FilterSettings> fs(static_cast<std::size_t>(z_stations), sc.filter);
    std::vector<ParticleCloud> clouds;
    std::vector<std::uint64_t> station_seeds;
    for (int z = 0; z < z_stations; ++z) {
        station_seeds.push_back(Rng::stream(sc.seed, 0xa5ULL, static_cast<std::uint64_t>(z),
                                            static_cast<std::uint64_t>(trial)).next());
        fs[static_cast<std::size_t>(z)].seed = station_seeds.back();
        clouds.push_back(init_cloud(sc.trajectory[0], sc.cfg, fs[static_cast<std::size_t>(z)],
                                    station_seeds.back(), {1.0, 0.0}, 0.5,
                                    sc.stations[static_cast<std::size_t>(z)]));
    }

    std::vector<StepData> data(static_cast<std::size_t>(z_stations));
    for (long k = 0; k < static_cast<long>(sc.trajectory.size()); ++k) {
        TargetTruth truth = sc.trajectory[k];
        if (sc.fast_fading) truth.beta = sample_path_gain(gain_seed, k);
        for (int z = 0; z < z_stations; ++z) {
            const std::uint64_t wseed = Rng::stream(station_seeds[static_cast<std::size_t>(z)],
                                                    0x77ULL, static_cast<std::uint64_t>(trial),
                                                    static_cast<std::uint64_t>(k)).next();
            const std::uint64_t nseed = Rng::stream(station_seeds[static_cast<std::size_t>(z)],
                                                    0x6eULL, static_cast<std::uint64_t>(trial),
                                                    static_cast<std::uint64_t>(k)).next();
            simulate_step(data[static_cast<std::size_t>(z)], sc, truth,
                          sc.stations[static_cast<std::size_t>(z)], wseed, nseed);
        }

        const auto t0 = std::chrono::steady_clock::now();
        for (int z = 0; z < z_stations; ++z) {
            auto& cloud = clouds[static_cast<std::size_t>(z)];
            try {
                pf_sltr_step(cloud, data[static_cast<std::size_t>(z)].y,
                             data[static_cast<std::size_t>(z)].tx, sc.cfg,
                             fs[static_cast<std::size_t>(z)],
                             sc.stations[static_cast<std::size_t>(z)]);
            } catch (const DegenerateUpdateError&) {
                recover_uniform(cloud);
                ++result.divergences;
            }
        }

        // fuse the station posteriors and redistribute as every next prior
        const std::uint64_t fseed = Rng::stream(sc.seed, 0xf5ULL, static_cast<std::uint64_t>(trial),
                                                static_cast<std::uint64_t>(k)).next();
        PointCloud fused;
        if (z_stations == 1) {
            // nothing to reconcile; keep the full station posterior as-is
            const auto& cloud = clouds[0];
            for (const auto& p : cloud.particles) {
                fused.atoms.push_back({p.pos[0], p.pos[1], p.vel[0], p.vel[1]});
                fused.weights.push_back(p.weight);
            }
        } else {
            std::vector<PointCloud> atoms;
            for (int z = 0; z < z_stations; ++z)
                atoms.push_back(thin_cloud(clouds[static_cast<std::size_t>(z)], sc.fusion_atoms,
                                           fseed + static_cast<std::uint64_t>(z)));
            FusionProblem problem = make_problem(atoms, sc.kappa, sc.fusion_mci);
            const DualSolution dual = solve_dual(problem, fseed);
            // a dense draw keeps the box-sampled density usable as a prior;
            // g* evaluation is cheap next to the dual solve, so oversample
            // hard to suppress the importance-sampling noise in the mean
            const int n_draw = 100 * sc.filter.n_par;
            fused = dual.converged ? fuse(problem, dual, n_draw, fseed + 7)
                                   : stratified_fuse(atoms, n_draw, fseed + 7);
        }
        const auto t1 = std::chrono::steady_clock::now();
        result.step_seconds += std::chrono::duration<double>(t1 - t0).count();

        Vec2 est{0.0, 0.0};
        double wsum = 0.0;
        for (std::size_t i = 0; i < fused.atoms.size(); ++i) {
            est[0] += fused.weights[i] * fused.atoms[i][0];
            est[1] += fused.weights[i] * fused.atoms[i][1];
            wsum += fused.weights[i];
        }
        est[0] /= wsum;
        est[1] /= wsum;

        if (z_stations > 1) {
            // redistribute: a quarter of each station's next prior comes
            // from the fused posterior, the rest stays its own posterior.
            // Full replacement couples the stations so tightly that their
            // errors correlate and a single bad fusion step drags every
            // filter down at once.
            for (int z = 0; z < z_stations; ++z) {
                auto& cloud = clouds[static_cast<std::size_t>(z)];
                Rng rng = Rng::stream(fseed, 0x64ULL, static_cast<std::uint64_t>(z));
                const std::size_t n = cloud.particles.size();
                const std::size_t n_fused = n / 4;

                std::vector<std::array<double, 4>> own;
                own.reserve(n - n_fused);
                {
                    const double offset = rng.uniform();
                    double cum = cloud.particles[0].weight;
                    std::size_t j = 0;
                    for (std::size_t i = 0; i < n - n_fused; ++i) {
                        const double u =
                            (offset + static_cast<double>(i)) / static_cast<double>(n - n_fused);
                        while (u > cum && j + 1 < n) cum += cloud.particles[++j].weight;
                        const auto& p = cloud.particles[j];
                        own.push_back({p.pos[0], p.pos[1], p.vel[0], p.vel[1]});
                    }
                }

                const double offset = rng.uniform();
                double cum = fused.weights[0];
                std::size_t j = 0;
                for (std::size_t i = 0; i < n_fused; ++i) {
                    const double u = (offset + static_cast<double>(i)) / static_cast<double>(n_fused);
                    while (u > cum && j + 1 < fused.atoms.size()) cum += fused.weights[++j];
                    auto& p = cloud.particles[i];
                    p.pos = {fused.atoms[j][0], fused.atoms[j][1]};
                    p.vel = {fused.atoms[j][2], fused.atoms[j][3]};
                    p.weight = 1.0 / static_cast<double>(n);
                }
                for (std::size_t i = n_fused; i < n; ++i) {
                    auto& p = cloud.particles[i];
                    const auto& o = own[i - n_fused];
                    p.pos = {o[0], o[1]};
                    p.vel = {o[2], o[3]};
                    p.weight = 1.0 / static_cast<double>(n);
                }
            }
        }

        StepRecord rec;
        rec.trial = trial;
        rec.k = k;
        rec.est = est;
        rec.truth = truth.position;
        const double ex = rec.est[0] - rec.truth[0];
        const double ey = rec.est[1] - rec.truth[1];
        rec.sq_err = ex * ex + ey * ey;
        result.sq_sum += rec.sq_err;
        result.records.push_back(rec);
    }
    return result;
}

RunReport collect(const Scenario& sc, const std::string& name, int trials,
                  const std::function<TrialResult(int)>& body) {
    std::vector<std::future<TrialResult>> futures;
    futures.reserve(static_cast<std::size_t>(trials));
    for (int t = 0; t < trials; ++t)
        futures.push_back(std::async(std::launch::async, body, t));
    RunReport report;
    report.method = name;
    double sq_sum = 0.0, seconds = 0.0;
    for (auto& f : futures) {
        TrialResult r = f.get();
        sq_sum += r.sq_sum;
        seconds += r.step_seconds;
        report.divergences += r.divergences;
        report.records.insert(report.records.end(), r.records.begin(), r.records.end());
    }
    const double n_steps = static_cast<double>(report.records.size());
    report.mse = sq_sum / n_steps;
    report.mean_step_ms = seconds * 1e3 / n_steps;
    (void)sc;
    return report;
}

void append_double(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

}  // namespace

Method method_from_name(const std::string& name) {
    if (name == "pf_sltr") return Method::PfSltr;
    if (name == "pf_iltr") return Method::PfIltr;
    if (name == "pf_sltr_a") return Method::PfSltrA;
    if (name == "rbpf_sltr_a") return Method::RbpfSltrA;
    throw std::invalid_argument("unknown method: " + name);
}

std::string method_name(Method m) {
    switch (m) {
        case Method::PfSltr: return "pf_sltr";
        case Method::PfIltr: return "pf_iltr";
        case Method::PfSltrA: return "pf_sltr_a";
        case Method::RbpfSltrA: return "rbpf_sltr_a";
    }
    return "unknown";
}

Scenario build_scenario(const std::string& json_text) {
    const json j = json::parse(json_text);
    Scenario sc;
    sc.cfg = radar_config_from_json_text(j.at("radar").dump());
    sc.limits = derive(sc.cfg);

    const json& s = j.at("scenario");
    sc.seed = s.contains("seed") ? s.at("seed").get<std::uint64_t>() : 1;
    sc.qam_order = static_cast<int>(get_or(s, "qam_order", 4));
    if (s.contains("fast_fading")) sc.fast_fading = s.at("fast_fading").get<bool>();
    if (s.contains("scatterers")) {
        for (const auto& sj : s.at("scatterers")) {
            Scatterer sca;
            sca.beta = cdouble(get_or(sj, "beta_re", 0.0), get_or(sj, "beta_im", 0.0));
            sca.tau = sj.at("tau").get<double>();
            sca.nu = get_or(sj, "nu", 0.0);
            sca.theta = get_or(sj, "theta", 0.0);
            sc.scatterers.push_back(sca);
        }
    }

    if (j.contains("filter")) {
        const json& f = j.at("filter");
        sc.filter.n_par = static_cast<int>(get_or(f, "n_par", sc.filter.n_par));
        sc.filter.n_thres = get_or(f, "n_thres", sc.filter.n_thres);
        sc.filter.xi = get_or(f, "xi", sc.filter.xi);
        sc.filter.accel_intensity = get_or(f, "accel_intensity", sc.filter.accel_intensity);
        sc.filter.beta_walk_std = get_or(f, "beta_walk_std", sc.filter.beta_walk_std);
        sc.filter.beta_process_var = get_or(f, "beta_process_var", sc.filter.beta_process_var);
        sc.filter.gate_grid = static_cast<int>(get_or(f, "gate_grid", sc.filter.gate_grid));
        sc.filter.init_vel_halfwidth = get_or(f, "init_vel_halfwidth", sc.filter.init_vel_halfwidth);
    }

    if (j.contains("fusion")) {
        const json& f = j.at("fusion");
        sc.kappa = get_or(f, "kappa", sc.kappa);
        sc.fusion_mci = static_cast<int>(get_or(f, "n_mci", sc.fusion_mci));
        sc.fusion_atoms = static_cast<int>(get_or(f, "atoms", sc.fusion_atoms));
        if (f.contains("stations")) {
            sc.stations.clear();
            for (const auto& st : f.at("stations"))
                sc.stations.push_back({st.at(0).get<double>(), st.at(1).get<double>()});
        }
    }
    if (sc.stations.empty()) sc.stations.push_back({0.0, 0.0});

    // integrate the piecewise constant-turn trajectory at the tracking period
    Vec2 pos{s.at("initial_position").at(0).get<double>(),
             s.at("initial_position").at(1).get<double>()};
    double heading = get_or(s, "initial_heading_deg", 0.0) * kPi / 180.0;
    const double dt = sc.cfg.T_t;
    for (const auto& seg : s.at("segments")) {
        const double duration = seg.at("duration").get<double>();
        const double speed = seg.at("speed").get<double>();
        const double turn = get_or(seg, "turn_rate_deg", 0.0) * kPi / 180.0;
        const long n = round_away(duration / dt);
        for (long i = 0; i < n; ++i) {
            TargetTruth truth;
            truth.position = pos;
            truth.velocity = {speed * std::cos(heading), speed * std::sin(heading)};
            validate_point(truth, sc, static_cast<long>(sc.trajectory.size()));
            sc.trajectory.push_back(truth);
            pos[0] += truth.velocity[0] * dt;
            pos[1] += truth.velocity[1] * dt;
            heading += turn * dt;
        }
    }
    if (sc.trajectory.empty()) throw std::invalid_argument("build_scenario: empty trajectory");
    return sc;
}

Scenario build_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("build_scenario_file: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return build_scenario(ss.str());
}

RunReport run_tracking(const Scenario& scenario, Method method, int trials) {
    return collect(scenario, method_name(method), trials,
                   [&](int t) { return run_trial(scenario, method, t); });
}

RunReport run_multipoint(const Scenario& scenario, int z_stations, int trials) {
    if (z_stations < 1 || z_stations > static_cast<int>(scenario.stations.size()))
        throw std::invalid_argument("run_multipoint: station count exceeds configured stations");
    return collect(scenario, "pf_sltr_fused_z" + std::to_string(z_stations), trials,
                   [&](int t) { return run_multipoint_trial(scenario, z_stations, t); });
}

std::string emit_report(const RunReport& report, ReportFormat format) {
    std::string out;
    if (format == ReportFormat::Csv) {
        out = "step,k,sq_err,est_x,est_y,true_x,true_y\n";
        long row = 0;
        for (const auto& r : report.records) {
            out += std::to_string(row++);
            out += ',';
            out += std::to_string(r.k);
            out += ',';
            append_double(out, r.sq_err);
            out += ',';
            append_double(out, r.est[0]);
            out += ',';
            append_double(out, r.est[1]);
            out += ',';
            append_double(out, r.truth[0]);
            out += ',';
            append_double(out, r.truth[1]);
            out += '\n';
        }
    } else {
        char buf[160];
        out = "method            MSE (m^2)     Time (ms)     diverged\n";
        std::snprintf(buf, sizeof(buf), "%-16s  %-12.6g  %-12.6g  %ld\n", report.method.c_str(),
                      report.mse, report.mean_step_ms, report.divergences);
        out += buf;
    }
    return out;
}

}  // namespace isac
