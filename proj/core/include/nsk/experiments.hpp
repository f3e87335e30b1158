/// @file experiments.hpp
/// Named, reproducible experiments that confront the solver with the
/// hypotheses of the a priori estimates and measure the bounded quantities:
/// energy-budget decay, 1D gain-of-derivative scans, 2D smallness scans,
/// mollified-sequence compactness probes, and 1D vacuum persistence.

#pragma once

#include <string>

#include "nsk/init.hpp"
#include "nsk/report.hpp"
#include "nsk/solver.hpp"

namespace nsk {

/// Scan inputs; lists must be non-empty and strictly monotone where used.
struct ScanValues {
    std::vector<double> amplitudes;      ///< smallness scan, increasing
    std::vector<double> s_values;        ///< gain exponents
    std::vector<double> mollify_scales;  ///< compactness, strictly decreasing
    double linf_bound = 0.0;             ///< |rho - rho_bar| bound c for vacuum runs
};

struct ExperimentSpec {
    std::string id;
    int dim = 1;
    int n = 128;
    double length = 2.0 * 3.14159265358979323846;
    PhysParams params;
    TimeControls time;
    InitSpec init;
    DiagnosticsConfig diagnostics;
    CapillaryForm form = CapillaryForm::Direct;
    ScanValues scan;
};

inline const std::vector<std::string>& experiment_ids() {
    static const std::vector<std::string> ids = {
        "energy-decay", "gain-scan-1d", "smallness-scan-2d", "compactness-probe",
        "vacuum-persistence-1d"};
    return ids;
}

/// Thresholds pinned for experiment verdicts.
inline constexpr double kBudgetDriftTol = 1e-4;      ///< drift / E(0) bound
inline constexpr double kBudgetImprovement = 8.0;    ///< required shrink at dt/2
inline constexpr double kMassDriftTol = 1e-12;       ///< relative mass drift
inline constexpr double kGainStabilizedTol = 0.05;   ///< refinement change
inline constexpr double kSequenceSlack = 0.05;       ///< compactness monotonicity

ExperimentReport energy_decay_experiment(const ExperimentSpec& spec);
ExperimentReport gain_scan_1d(const ExperimentSpec& spec);
ExperimentReport smallness_scan_2d(const ExperimentSpec& spec);
ExperimentReport compactness_probe(const ExperimentSpec& spec);
ExperimentReport vacuum_persistence_1d(const ExperimentSpec& spec);

/// Dispatch by id; unknown ids raise std::invalid_argument listing valid ids.
ExperimentReport run_experiment(const ExperimentSpec& spec);

}  // namespace nsk
