/// @file report.hpp
/// Run and experiment reports: diagnostic time series, abort bookkeeping, and
/// named verdicts.

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "nsk/functionals.hpp"

namespace nsk {

/// Result of one time integration.
struct RunReport {
    std::vector<DiagnosticsRecord> records;
    std::vector<State> trajectory;  ///< sampled states when requested

    bool vacuum_abort = false;
    double abort_time = 0.0;
    std::size_t abort_site = 0;  ///< flat grid index of the breach
    double abort_min_rho = 0.0;

    double final_time = 0.0;   ///< achieved T (t_end or the abort time)
    double initial_energy = 0.0;
    double initial_mass = 0.0;
    double max_mass_drift_rel = 0.0;
    double max_momentum_drift = 0.0;
    long step_count = 0;

    /// Named outcomes attached by experiments; insertion order is preserved
    /// so serialized reports are deterministic.
    std::vector<std::pair<std::string, double>> metrics;
    std::vector<std::pair<std::string, std::string>> verdicts;

    void add_metric(std::string name, double v) { metrics.emplace_back(std::move(name), v); }
    void add_verdict(std::string name, bool v) {
        verdicts.emplace_back(std::move(name), v ? "true" : "false");
    }
    void add_verdict(std::string name, std::string label) {
        verdicts.emplace_back(std::move(name), std::move(label));
    }
    void add_verdict(std::string name, const char* label) {
        add_verdict(std::move(name), std::string(label));
    }
};

/// Result of a named experiment: one member report per scan value plus
/// experiment-level verdicts.
struct ExperimentReport {
    std::string id;
    std::vector<std::string> member_labels;
    std::vector<RunReport> members;
    std::vector<std::pair<std::string, double>> metrics;
    std::vector<std::pair<std::string, std::string>> verdicts;

    void add_metric(std::string name, double v) { metrics.emplace_back(std::move(name), v); }
    void add_verdict(std::string name, bool v) {
        verdicts.emplace_back(std::move(name), v ? "true" : "false");
    }
    void add_verdict(std::string name, std::string label) {
        verdicts.emplace_back(std::move(name), std::move(label));
    }
    void add_verdict(std::string name, const char* label) {
        add_verdict(std::move(name), std::string(label));
    }
};

}  // namespace nsk
