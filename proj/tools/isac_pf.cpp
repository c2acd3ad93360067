#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "isac/harness.hpp"
#include "isac/rng.hpp"

namespace {

void write_outputs(const isac::RunReport& report, const std::string& out_dir) {
    std::cout << isac::emit_report(report, isac::ReportFormat::Table);
    if (out_dir.empty()) return;
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream csv(out_dir + "/" + report.method + ".csv", std::ios::binary);
        csv << isac::emit_report(report, isac::ReportFormat::Csv);
    }
    {
        std::ofstream table(out_dir + "/" + report.method + "_summary.txt", std::ios::binary);
        table << isac::emit_report(report, isac::ReportFormat::Table);
    }
}

bool check(bool ok, const char* what, int& failures) {
    std::printf("[%s] %s\n", ok ? "pass" : "FAIL", what);
    if (!ok) ++failures;
    return ok;
}

int selftest() {
    using namespace isac;
    int failures = 0;

    const std::vector<double> alpha{0.2, 0.5, 0.3};
    auto near = [](double a, double b) { return std::abs(a - b) < 1e-4; };
    auto half = entropy_power(alpha, 0.5);
    auto twice = entropy_power(alpha, 2.0);
    check(near(half[0], 0.2628) && near(half[1], 0.4154) && near(half[2], 0.3218),
          "entropy_power xi=0.5 matches the reference simplex", failures);
    check(near(twice[0], 0.1053) && near(twice[1], 0.6579) && near(twice[2], 0.2368),
          "entropy_power xi=2 matches the reference simplex", failures);
    check(entropy(half) > entropy(alpha) && entropy(twice) < entropy(alpha),
          "weight entropy moves monotonically with xi", failures);

    ParticleCloud cloud;
    cloud.particles.resize(4);
    for (auto& p : cloud.particles) p.weight = 0.25;
    check(std::abs(ess(cloud) - 4.0) < 1e-12, "uniform-weight ESS equals N_par", failures);
    gibbs_update(cloud, {1.0, 2.0, 3.0, 4.0}, 1.0);
    ParticleCloud shifted;
    shifted.particles.resize(4);
    for (auto& p : shifted.particles) p.weight = 0.25;
    gibbs_update(shifted, {101.0, 102.0, 103.0, 104.0}, 1.0);
    bool invariant = true;
    for (std::size_t i = 0; i < 4; ++i)
        invariant = invariant &&
                    std::abs(cloud.particles[i].weight - shifted.particles[i].weight) < 1e-15;
    check(invariant, "Gibbs update is invariant to a constant cost shift", failures);

    double total = 0.0;
    for (const auto& p : cloud.particles) total += p.weight;
    check(std::abs(total - 1.0) < 1e-9, "posterior weights normalized", failures);

    systematic_resample(cloud, 7);
    check(std::abs(ess(cloud) - 4.0) < 1e-12, "post-resample weights are uniform", failures);

    check(std::abs(dirichlet_kernel(0.0, 8) - 8.0) < 1e-12 &&
              dirichlet_kernel(1.0, 8) < 1e-9,
          "Dirichlet kernel peak and first null", failures);

    std::printf("%s (%d failure%s)\n", failures == 0 ? "selftest ok" : "selftest FAILED", failures,
                failures == 1 ? "" : "s");
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MIMO-OFDM ISAC particle-filter tracking harness"};
    app.require_subcommand(1);

    std::string config, method_name = "pf_sltr", out_dir;
    int trials = 5, stations = 2;
    std::uint64_t seed = 0;

    auto* run = app.add_subcommand("run", "single-station Monte-Carlo tracking run");
    run->add_option("--config", config, "scenario JSON file")->required();
    run->add_option("--method", method_name, "pf_sltr | pf_iltr | pf_sltr_a | rbpf_sltr_a");
    run->add_option("--trials", trials, "independent Monte-Carlo trials");
    run->add_option("--seed", seed, "override the scenario seed (0 keeps the config value)");
    run->add_option("--out", out_dir, "directory for CSV and summary output");

    auto* fuse = app.add_subcommand("fuse", "multi-station tracking with posterior fusion");
    fuse->add_option("--config", config, "scenario JSON file")->required();
    fuse->add_option("--stations", stations, "number of stations to fuse");
    fuse->add_option("--trials", trials, "independent Monte-Carlo trials");
    fuse->add_option("--seed", seed, "override the scenario seed (0 keeps the config value)");
    fuse->add_option("--out", out_dir, "directory for CSV and summary output");

    auto* self = app.add_subcommand("selftest", "run the built-in oracle and invariant checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (self->parsed()) return selftest();
        isac::Scenario scenario = isac::build_scenario_file(config);
        if (seed != 0) scenario.seed = seed;
        if (run->parsed()) {
            const auto report =
                isac::run_tracking(scenario, isac::method_from_name(method_name), trials);
            write_outputs(report, out_dir);
        } else {
            const auto report = isac::run_multipoint(scenario, stations, trials);
            write_outputs(report, out_dir);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
