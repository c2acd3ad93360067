#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "isac/harness.hpp"

using namespace isac;

namespace {

const char* kRoot = PROJECT_ROOT;

std::string small_scenario_json(int steps_tenths_of_second, const char* extra_scenario = "") {
    std::ostringstream ss;
    ss << R"({
      "radar": {
        "f_c": 10e9, "B": 16e6, "P_t": 1.0, "N_t": 8, "N_r": 8,
        "T_t": 50e-3, "N_p": 1, "T_c": 0.5e-6, "T_o": 4e-6, "M": 1,
        "N_c": 64, "scheme": "cw", "snr_db": 0.0
      },
      "scenario": {
        "seed": 3, "qam_order": 4, "fast_fading": true,)"
       << extra_scenario << R"(
        "initial_position": [50.0, 0.0],
        "initial_heading_deg": 90.0,
        "segments": [ { "duration": )"
       << 0.1 * steps_tenths_of_second << R"(, "speed": 5.0, "turn_rate_deg": 10.0 } ]
      },
      "filter": { "n_par": 60, "n_thres": 30, "xi": 1.0, "accel_intensity": 50.0, "gate_grid": 7 },
      "fusion": { "kappa": 1.0, "n_mci": 2000, "atoms": 16,
                  "stations": [[0.0, 0.0], [0.0, 20.0]] }
    })";
    return ss.str();
}

}  // namespace

TEST_CASE("method names round-trip") {
    for (const char* name : {"pf_sltr", "pf_iltr", "pf_sltr_a", "rbpf_sltr_a"})
        CHECK(method_name(method_from_name(name)) == name);
    CHECK_THROWS_AS(method_from_name("nope"), std::invalid_argument);
}

TEST_CASE("baseline config yields 100 s of steps at the tracking period") {
    const Scenario sc = build_scenario_file(std::string(kRoot) + "/configs/baseline_cw.json");
    CHECK(sc.trajectory.size() == 2000);  // 100 s / 50 ms
    CHECK(sc.cfg.N_t == 64);
}

TEST_CASE("desk config yields 400 steps") {
    const Scenario sc = build_scenario_file(std::string(kRoot) + "/configs/desk_cw.json");
    CHECK(sc.trajectory.size() == 400);
}

TEST_CASE("straight segments integrate to constant velocity") {
    const std::string text = R"({
      "radar": { "f_c": 10e9, "B": 16e6, "P_t": 1.0, "N_t": 4, "N_r": 4,
                 "T_t": 50e-3, "N_p": 1, "T_c": 0.5e-6, "T_o": 4e-6, "M": 1,
                 "N_c": 64, "scheme": "cw", "snr_db": 0.0 },
      "scenario": { "seed": 1, "initial_position": [40.0, 0.0],
                    "initial_heading_deg": 0.0,
                    "segments": [ { "duration": 1.0, "speed": 4.0 } ] }
    })";
    const Scenario sc = build_scenario(text);
    REQUIRE(sc.trajectory.size() == 20);
    for (const auto& t : sc.trajectory) {
        CHECK(t.velocity[0] == doctest::Approx(4.0));
        CHECK(t.velocity[1] == doctest::Approx(0.0).epsilon(1e-12));
    }
    CHECK(sc.trajectory[19].position[0] ==
          doctest::Approx(40.0 + 4.0 * 19.0 * 50e-3).epsilon(1e-12));
}

TEST_CASE("scenario construction is deterministic") {
    const std::string text = small_scenario_json(5);
    const Scenario a = build_scenario(text);
    const Scenario b = build_scenario(text);
    REQUIRE(a.trajectory.size() == b.trajectory.size());
    for (std::size_t i = 0; i < a.trajectory.size(); ++i)
        CHECK(a.trajectory[i].position == b.trajectory[i].position);
}

TEST_CASE("out-of-range trajectories are rejected") {
    const std::string text = R"({
      "radar": { "f_c": 10e9, "B": 16e6, "P_t": 1.0, "N_t": 4, "N_r": 4,
                 "T_t": 50e-3, "N_p": 1, "T_c": 0.5e-6, "T_o": 4e-6, "M": 1,
                 "N_c": 64, "scheme": "cw", "snr_db": 0.0 },
      "scenario": { "seed": 1, "initial_position": [200.0, 0.0],
                    "segments": [ { "duration": 1.0, "speed": 1.0 } ] }
    })";
    CHECK_THROWS_AS(build_scenario(text), std::invalid_argument);  // beyond C*T_c/2
}

TEST_CASE("empty report renders a header-only CSV") {
    RunReport report;
    report.method = "pf_sltr";
    CHECK(emit_report(report, ReportFormat::Csv) == "step,k,sq_err,est_x,est_y,true_x,true_y\n");
}

TEST_CASE("CSV rows round-trip through parsing") {
    const Scenario sc = build_scenario(small_scenario_json(2));
    const RunReport report = run_tracking(sc, Method::PfSltr, 1);
    const std::string csv = emit_report(report, ReportFormat::Csv);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "step,k,sq_err,est_x,est_y,true_x,true_y");
    std::size_t rows = 0;
    double sq_sum = 0.0;
    while (std::getline(in, line)) {
        std::istringstream row(in.eof() ? line : line);
        std::string field;
        std::vector<double> vals;
        std::istringstream fs(line);
        while (std::getline(fs, field, ',')) vals.push_back(std::stod(field));
        REQUIRE(vals.size() == 7);
        sq_sum += vals[2];
        const double dx = vals[3] - vals[5], dy = vals[4] - vals[6];
        CHECK(vals[2] == doctest::Approx(dx * dx + dy * dy).epsilon(1e-9));
        ++rows;
    }
    CHECK(rows == report.records.size());
    CHECK(sq_sum / static_cast<double>(rows) == doctest::Approx(report.mse).epsilon(1e-9));
}

TEST_CASE("identical config and seed give byte-identical CSV output") {
    const Scenario sc = build_scenario(small_scenario_json(2));
    const RunReport a = run_tracking(sc, Method::PfSltr, 2);
    const RunReport b = run_tracking(sc, Method::PfSltr, 2);
    CHECK(emit_report(a, ReportFormat::Csv) == emit_report(b, ReportFormat::Csv));
}

TEST_CASE("summary table carries the method and statistics") {
    RunReport report;
    report.method = "pf_iltr";
    report.mse = 0.125;
    report.mean_step_ms = 3.5;
    const std::string table = emit_report(report, ReportFormat::Table);
    CHECK(table.find("pf_iltr") != std::string::npos);
    CHECK(table.find("0.125") != std::string::npos);
}

TEST_CASE("short tracking runs produce sane errors for every method") {
    const Scenario sc = build_scenario(small_scenario_json(2));
    for (Method m : {Method::PfSltr, Method::PfIltr, Method::PfSltrA, Method::RbpfSltrA}) {
        const RunReport report = run_tracking(sc, m, 1);
        CHECK(report.records.size() == sc.trajectory.size());
        CHECK(std::isfinite(report.mse));
        CHECK(report.mse >= 0.0);
    }
}

TEST_CASE("single-station fusion run matches plain tracking to within noise") {
    const Scenario sc = build_scenario(small_scenario_json(3));
    const RunReport plain = run_tracking(sc, Method::PfSltr, 2);
    const RunReport fusedz1 = run_multipoint(sc, 1, 2);
    CHECK(fusedz1.records.size() == plain.records.size());
    // same filter, same scenario scale: errors agree within an order of magnitude
    CHECK(fusedz1.mse < 10.0 * plain.mse + 1.0);
}

TEST_CASE("two-station fusion runs end to end") {
    const Scenario sc = build_scenario(small_scenario_json(2));
    const RunReport report = run_multipoint(sc, 2, 1);
    CHECK(report.records.size() == sc.trajectory.size());
    CHECK(std::isfinite(report.mse));
    CHECK_THROWS_AS(run_multipoint(sc, 3, 1), std::invalid_argument);
}
