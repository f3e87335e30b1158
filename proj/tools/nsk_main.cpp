/// @file nsk_main.cpp
/// Command-line entry points:
///   nsk run --config <path> --out <dir>
///   nsk experiment --id <name> --spec <path> --out <dir>
///   nsk report --in <dir> --format csv|json
///
/// Exit codes: 0 success, 2 config error, 3 vacuum abort, 4 I/O error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "nsk/experiments.hpp"
#include "nsk/io.hpp"
#include "nsk/solver.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitVacuum = 3;
constexpr int kExitIo = 4;

int cmd_run(const std::string& config_path, const std::string& out_dir) {
    nsk::RunConfig config = nsk::load_run_config(config_path);
    if (!out_dir.empty()) config.output.directory = out_dir;
    if (config.output.directory.empty())
        throw nsk::ConfigError("output.directory is required (or pass --out)");

    fs::create_directories(config.output.directory);
    const fs::path out(config.output.directory);

    nsk::GridPtr grid = nsk::Grid::make(config.grid.dim, config.grid.n, config.grid.length);
    nsk::SpectralOps ops(grid);
    nsk::State initial = nsk::build_initial_state(grid, config.params, config.init, ops);

    nsk::DiagnosticsConfig diagnostics = config.diagnostics;
    const bool want_snapshots = config.output.snapshot_every > 0;
    if (want_snapshots) diagnostics.store_trajectory = true;

    nsk::RunReport report = nsk::run_simulation(initial, config.params, config.time,
                                                diagnostics, ops, config.form);

    nsk::write_diagnostics_csv(out / "diagnostics.csv", report, diagnostics.s_values);
    if (want_snapshots) {
        // Snapshots are cut from the sampled trajectory: every stride-th
        // sample, so snapshot_every rounds to a multiple of sample_every.
        const std::size_t stride = std::max(
            1, config.output.snapshot_every / std::max(1, diagnostics.sample_every));
        int index = 0;
        for (std::size_t k = 0; k < report.trajectory.size(); k += stride) {
            char stem[32];
            std::snprintf(stem, sizeof stem, "snapshot_%06d", index++);
            nsk::write_snapshot(out, stem, report.trajectory[k]);
        }
        report.trajectory.clear();
    }
    report.add_verdict("completed", !report.vacuum_abort);
    nsk::write_text_file(out / "report.json", nsk::run_report_json(report, config));

    if (report.vacuum_abort) {
        std::cerr << "vacuum abort at t = " << report.abort_time
                  << " (min rho = " << report.abort_min_rho << "); partial outputs in "
                  << out << "\n";
        return kExitVacuum;
    }
    std::cout << "run complete: t = " << report.final_time << ", " << report.step_count
              << " steps, outputs in " << out << "\n";
    return kExitOk;
}

int cmd_experiment(const std::string& id, const std::string& spec_path,
                   const std::string& out_dir) {
    nsk::ExperimentSpec spec = nsk::load_experiment_spec(spec_path);
    if (!id.empty()) spec.id = id;

    fs::create_directories(out_dir);
    const fs::path out(out_dir);

    nsk::ExperimentReport report = nsk::run_experiment(spec);

    for (std::size_t m = 0; m < report.members.size(); ++m) {
        char name[32];
        std::snprintf(name, sizeof name, "member_%02zu.csv", m);
        std::span<const double> s_values = spec.diagnostics.s_values;
        if (spec.id == "gain-scan-1d") s_values = spec.scan.s_values;
        nsk::write_diagnostics_csv(out / name, report.members[m], s_values);
    }
    nsk::write_text_file(out / "report.json", nsk::experiment_report_json(report));

    bool any_abort = false;
    for (const auto& member : report.members) any_abort = any_abort || member.vacuum_abort;
    std::cout << "experiment " << report.id << ": " << report.members.size()
              << " member run(s), report in " << out << "\n";
    return any_abort ? kExitVacuum : kExitOk;
}

int cmd_report(const std::string& in_dir, const std::string& format) {
    const fs::path path = fs::path(in_dir) / "report.json";
    std::ifstream is(path);
    if (!is) throw std::ios_base::failure("cannot read " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();

    if (format == "json") {
        std::cout << ss.str() << "\n";
        return kExitOk;
    }
    const auto j = nlohmann::json::parse(ss.str());
    std::cout << "name,value\n";
    if (j.contains("verdicts"))
        for (const auto& [k, v] : j["verdicts"].items())
            std::cout << k << "," << v.dump() << "\n";
    if (j.contains("metrics"))
        for (const auto& [k, v] : j["metrics"].items())
            std::cout << k << "," << v.dump() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pseudo-spectral Navier-Stokes-Korteweg simulator with "
                 "energy/Orlicz/gain-norm diagnostics"};
    app.require_subcommand(1);

    std::string config_path;
    std::string spec_path;
    std::string out_dir;
    std::string experiment_id;
    std::string in_dir;
    std::string format = "csv";

    auto* run = app.add_subcommand("run", "Integrate one configuration");
    run->add_option("--config", config_path, "JSON run configuration")->required();
    run->add_option("--out", out_dir, "Output directory");

    auto* experiment = app.add_subcommand("experiment", "Run a named experiment");
    experiment->add_option("--id", experiment_id, "Experiment id (see docs)");
    experiment->add_option("--spec", spec_path, "JSON experiment spec")->required();
    experiment->add_option("--out", out_dir, "Output directory")->required();

    auto* report = app.add_subcommand("report", "Summarize a report directory");
    report->add_option("--in", in_dir, "Directory containing report.json")->required();
    report->add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (run->parsed()) return cmd_run(config_path, out_dir);
        if (experiment->parsed()) return cmd_experiment(experiment_id, spec_path, out_dir);
        if (report->parsed()) return cmd_report(in_dir, format);
    } catch (const nsk::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
