/// @file io.hpp
/// Configuration parsing (JSON), diagnostics CSV emission, report
/// serialization, and raw float64 snapshot files with text sidecars.
/// All floating-point output uses 17 significant digits so files reproduce
/// bit-for-bit across runs.

#pragma once

#include <filesystem>
#include <string>

#include "nsk/experiments.hpp"
#include "nsk/init.hpp"
#include "nsk/report.hpp"
#include "nsk/solver.hpp"

namespace nsk {

/// Configuration problem; carries the offending field name in what().
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct GridConfig {
    int dim = 1;
    int n = 128;
    double length = 2.0 * 3.14159265358979323846;
};

struct OutputConfig {
    std::string directory;
    int snapshot_every = 0;  ///< in steps; 0 disables snapshots
};

struct RunConfig {
    GridConfig grid;
    PhysParams params;
    InitSpec init;
    TimeControls time;
    CapillaryForm form = CapillaryForm::Direct;
    DiagnosticsConfig diagnostics;
    OutputConfig output;

    void validate() const;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string emit_run_config(const RunConfig& config);

ExperimentSpec parse_experiment_spec(const std::string& json_text);
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

/// One row per DiagnosticsRecord. Columns: t, energy_gamma, dissipation_cum,
/// budget_drift, min_rho, sup_inv_rho, h1_deviation, orlicz_dev, j_gamma_mass,
/// then one gain column per s value (header gain_s<value>).
std::string diagnostics_csv(const RunReport& report, std::span<const double> s_values);
void write_diagnostics_csv(const std::filesystem::path& path, const RunReport& report,
                           std::span<const double> s_values);

std::string run_report_json(const RunReport& report, const RunConfig& config);
std::string experiment_report_json(const ExperimentReport& report);
std::string format_f64(double v);  ///< %.17g

/// Raw little-endian float64 per field plus a text sidecar naming the files.
void write_snapshot(const std::filesystem::path& directory, const std::string& stem,
                    const State& state);
State read_snapshot(const std::filesystem::path& sidecar_path);

/// Byte-wise file write helper; throws std::ios_base::failure on failure.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace nsk
