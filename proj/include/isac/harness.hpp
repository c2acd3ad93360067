#pragma once

#include <string>

#include "isac/filters.hpp"
#include "isac/fusion.hpp"

namespace isac {

enum class Method { PfSltr, PfIltr, PfSltrA, RbpfSltrA };

Method method_from_name(const std::string& name);
std::string method_name(Method m);

struct Scenario {
    RadarConfig cfg;
    DerivedLimits limits;
    std::vector<TargetTruth> trajectory;  // one truth per tracking step
    std::vector<Scatterer> scatterers;
    int qam_order = 4;
    std::uint64_t seed = 1;
    bool fast_fading = true;  // resample the path gain every step
    FilterSettings filter;
    // multi-station geometry and fusion knobs
    std::vector<Vec2> stations{{0.0, 0.0}};
    double kappa = 1.0;
    int fusion_mci = 2000;
    int fusion_atoms = 32;  // per-station thinned atom count fed to the dual solver
};

// Trajectory from piecewise (duration, speed, turn-rate) segments; validates
// every point against the detectable range limits of every station.
Scenario build_scenario(const std::string& json_text);
Scenario build_scenario_file(const std::string& path);

struct StepRecord {
    int trial = 0;
    long k = 0;
    double sq_err = 0.0;
    Vec2 est{0.0, 0.0};
    Vec2 truth{0.0, 0.0};
};

struct RunReport {
    std::string method;
    std::vector<StepRecord> records;
    double mse = 0.0;           // mean squared 2-D position error, m^2
    double mean_step_ms = 0.0;  // filter step only, simulation excluded
    long divergences = 0;
};

// Monte-Carlo tracking; trials run in parallel with independent seed streams.
// A degenerate weight update is recorded and the trial continues from a
// uniform-weight cloud.
RunReport run_tracking(const Scenario& scenario, Method method, int trials);

// Per-step per-station PF-SLTR + Wasserstein-entropy fusion; the fused cloud
// becomes every station's next prior. Falls back to stratified pooling when
// the dual solver fails to converge.
RunReport run_multipoint(const Scenario& scenario, int z_stations, int trials);

enum class ReportFormat { Csv, Table };

std::string emit_report(const RunReport& report, ReportFormat format);

}  // namespace isac
