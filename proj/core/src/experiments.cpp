#include "nsk/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace nsk {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

struct MemberRun {
    GridPtr grid;
    RunReport report;
};

MemberRun run_member(const ExperimentSpec& spec, int n, const InitSpec& init,
                     const TimeControls& controls, const DiagnosticsConfig& diagnostics) {
    GridPtr grid = Grid::make(spec.dim, n, spec.length);
    SpectralOps ops(grid);
    State initial = build_initial_state(grid, spec.params, init, ops);
    RunReport report =
        run_simulation(initial, spec.params, controls, diagnostics, ops, spec.form);
    return {std::move(grid), std::move(report)};
}

/// max_n budget_drift / E(0); absolute drift when E(0) = 0 (equilibrium).
double budget_drift_measure(const RunReport& report) {
    double worst = 0.0;
    for (const auto& rec : report.records) worst = std::max(worst, rec.budget_drift);
    return report.initial_energy > 0.0 ? worst / report.initial_energy : worst;
}

double gain_from_records(const RunReport& report, std::size_t s_index) {
    std::vector<double> times;
    std::vector<double> values;
    times.reserve(report.records.size());
    for (const auto& rec : report.records) {
        times.push_back(rec.t);
        values.push_back(rec.gain_samples.at(s_index));
    }
    return time_l2(times, values);
}

double linf_deviation(const State& state, double rho_bar) {
    double worst = 0.0;
    for (double v : state.rho.comp(0)) worst = std::max(worst, std::abs(v - rho_bar));
    return worst;
}

}  // namespace

ExperimentReport energy_decay_experiment(const ExperimentSpec& spec) {
    spec.params.validate();
    spec.time.validate();
    ExperimentReport out;
    out.id = "energy-decay";

    DiagnosticsConfig diag = spec.diagnostics;
    MemberRun base = run_member(spec, spec.n, spec.init, spec.time, diag);

    TimeControls halved = spec.time;
    halved.cfl *= 0.5;
    halved.dt_max *= 0.5;
    MemberRun fine = run_member(spec, spec.n, spec.init, halved, diag);

    const double drift_base = budget_drift_measure(base.report);
    const double drift_half = budget_drift_measure(fine.report);
    const bool aborted = base.report.vacuum_abort || fine.report.vacuum_abort;
    const bool budget_ok = drift_base <= kBudgetDriftTol;
    const bool improves = drift_base == 0.0 ? drift_half == 0.0
                                            : drift_half <= drift_base / kBudgetImprovement;
    const bool mass_ok = base.report.max_mass_drift_rel <= kMassDriftTol &&
                         fine.report.max_mass_drift_rel <= kMassDriftTol;

    out.add_metric("drift_dt", drift_base);
    out.add_metric("drift_dt_half", drift_half);
    out.add_metric("mass_drift_rel", std::max(base.report.max_mass_drift_rel,
                                              fine.report.max_mass_drift_rel));
    out.add_verdict("vacuum_abort", aborted);
    out.add_verdict("budget_within_tolerance", budget_ok);
    out.add_verdict("improves_8x_at_half_dt", improves);
    out.add_verdict("mass_conserved", mass_ok);
    out.add_verdict("verdict", !aborted && budget_ok && improves && mass_ok);

    out.member_labels = {"dt", "dt_half"};
    out.members.push_back(std::move(base.report));
    out.members.push_back(std::move(fine.report));
    return out;
}

ExperimentReport gain_scan_1d(const ExperimentSpec& spec) {
    if (spec.dim != 1) throw std::invalid_argument("gain-scan-1d: dim must be 1");
    if (spec.scan.s_values.empty())
        throw std::invalid_argument("gain-scan-1d: scan.s_values must be non-empty");
    spec.params.validate();

    ExperimentReport out;
    out.id = "gain-scan-1d";

    DiagnosticsConfig diag = spec.diagnostics;
    diag.s_values = spec.scan.s_values;

    MemberRun coarse = run_member(spec, spec.n, spec.init, spec.time, diag);
    MemberRun refined = run_member(spec, 2 * spec.n, spec.init, spec.time, diag);

    bool all_stabilized = true;
    for (std::size_t si = 0; si < spec.scan.s_values.size(); ++si) {
        const double s = spec.scan.s_values[si];
        const double g_n = gain_from_records(coarse.report, si);
        const double g_2n = gain_from_records(refined.report, si);
        const double rel = std::abs(g_2n - g_n) / std::max(std::abs(g_n), 1e-300);
        const bool stabilized = rel < kGainStabilizedTol;
        all_stabilized = all_stabilized && stabilized;
        const std::string tag = "s=" + fmt(s);
        out.add_metric(tag + " gain_n", g_n);
        out.add_metric(tag + " gain_2n", g_2n);
        out.add_metric(tag + " rel_change", rel);
        out.add_verdict(tag + " stabilized", stabilized);
        out.add_verdict(tag + " coverage",
                        s < 0.5 ? std::string("guaranteed") : std::string("unguaranteed"));
    }
    const bool aborted = coarse.report.vacuum_abort || refined.report.vacuum_abort;
    out.add_verdict("vacuum_abort", aborted);
    out.add_verdict("verdict", !aborted && all_stabilized);

    out.member_labels = {"n" + std::to_string(spec.n), "n" + std::to_string(2 * spec.n)};
    out.members.push_back(std::move(coarse.report));
    out.members.push_back(std::move(refined.report));
    return out;
}

ExperimentReport smallness_scan_2d(const ExperimentSpec& spec) {
    if (spec.dim != 2) throw std::invalid_argument("smallness-scan-2d: dim must be 2");
    if (spec.diagnostics.cutoff.kind != CutoffSpec::Kind::SmoothBump)
        throw std::invalid_argument("smallness-scan-2d: cutoff must be a smooth bump");
    if (spec.scan.amplitudes.empty())
        throw std::invalid_argument("smallness-scan-2d: scan.amplitudes must be non-empty");
    for (std::size_t i = 1; i < spec.scan.amplitudes.size(); ++i)
        if (!(spec.scan.amplitudes[i] > spec.scan.amplitudes[i - 1]))
            throw std::invalid_argument(
                "smallness-scan-2d: amplitudes must be strictly increasing");
    spec.params.validate();

    ExperimentReport out;
    out.id = "smallness-scan-2d";

    GridPtr grid = Grid::make(spec.dim, spec.n, spec.length);
    SpectralOps ops(grid);

    std::vector<std::array<double, 3>> triples;
    bool any_abort = false;
    for (double amp : spec.scan.amplitudes) {
        InitSpec init = spec.init;
        init.amplitude = amp;
        State initial = build_initial_state(grid, spec.params, init, ops);

        const double grad_l2 = l2_norm(ops.gradient(initial.rho));
        double weighted = 0.0;
        for (std::size_t i = 0; i < initial.rho.points(); ++i) {
            double usq = 0.0;
            for (int c = 0; c < initial.u.components(); ++c) {
                const double v = initial.u.value(c, i);
                usq += v * v;
            }
            weighted += initial.rho.value(0, i) * usq;
        }
        const double sqrt_rho_u = std::sqrt(weighted * grid->cell_volume());
        double jmass = 0.0;
        for (double r : initial.rho.comp(0)) jmass += j_gamma(r, spec.params);
        jmass *= grid->cell_volume();
        triples.push_back({grad_l2, sqrt_rho_u, jmass});

        RunReport report;
        if (const StateReport check = validate_state(initial, spec.time.rho_floor);
            !check.ok) {
            // Amplitude already below the floor at t = 0: an immediate abort row.
            report.vacuum_abort = true;
            report.abort_time = 0.0;
            report.abort_min_rho = check.min_rho;
        } else {
            report = run_simulation(initial, spec.params, spec.time, spec.diagnostics, ops,
                                    spec.form);
        }
        any_abort = any_abort || report.vacuum_abort;

        const std::string tag = "amp=" + fmt(amp);
        report.add_metric("hypothesis_grad_rho0_l2", grad_l2);
        report.add_metric("hypothesis_sqrt_rho0_u0_l2", sqrt_rho_u);
        report.add_metric("hypothesis_j_gamma_mass0", jmass);
        double sup_inv = 0.0;
        for (const auto& rec : report.records) sup_inv = std::max(sup_inv, rec.sup_inv_rho);
        report.add_metric("sup_inv_rho_over_run", sup_inv);
        for (std::size_t si = 0; si < spec.diagnostics.s_values.size(); ++si) {
            if (report.records.empty()) break;
            report.add_metric("gain_s=" + fmt(spec.diagnostics.s_values[si]),
                              gain_from_records(report, si));
        }
        report.add_verdict("vacuum_abort", report.vacuum_abort);
        out.member_labels.push_back(tag);
        out.members.push_back(std::move(report));
    }

    bool monotone = true;
    for (std::size_t i = 1; i < triples.size(); ++i)
        for (int c = 0; c < 3; ++c)
            monotone = monotone && triples[i][c] >= triples[i - 1][c] - 1e-14;
    out.add_verdict("hypothesis_monotone", monotone);
    out.add_verdict("vacuum_abort_any", any_abort);
    out.add_verdict("verdict", monotone);
    return out;
}

ExperimentReport compactness_probe(const ExperimentSpec& spec) {
    const auto& scales = spec.scan.mollify_scales;
    if (scales.empty())
        throw std::invalid_argument("compactness-probe: scan.mollify_scales must be non-empty");
    for (std::size_t i = 1; i < scales.size(); ++i)
        if (!(scales[i] <= scales[i - 1]))
            throw std::invalid_argument("compactness-probe: scales must be non-increasing");
    spec.params.validate();

    ExperimentReport out;
    out.id = "compactness-probe";

    GridPtr grid = Grid::make(spec.dim, spec.n, spec.length);
    SpectralOps ops(grid);
    const Field chi = build_cutoff(spec.diagnostics.cutoff, grid);

    // Pre-run check: mollified initial data converge to the reference in H^1.
    const double ref_scale = scales.back();
    std::vector<State> initials;
    for (double scale : scales) {
        InitSpec init = spec.init;
        init.kind = InitSpec::Kind::MollifiedSequence;
        init.mollify_scale = scale;
        initials.push_back(build_initial_state(grid, spec.params, init, ops));
    }
    {
        double prev = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < initials.size(); ++i) {
            Field diff = Field::scalar(grid);
            auto a = initials[i].rho.comp(0);
            auto b = initials.back().rho.comp(0);
            auto d = diff.comp(0);
            for (std::size_t k = 0; k < d.size(); ++k) d[k] = a[k] - b[k];
            const double h1 = ops.sobolev_norm(diff, 1.0, false);
            out.add_metric("init_h1_distance_scale=" + fmt(scales[i]), h1);
            if (h1 > prev * (1.0 + kSequenceSlack))
                throw std::invalid_argument(
                    "compactness-probe: mollified initial data do not converge in H^1");
            prev = h1;
        }
    }

    // One shared dt so member trajectories sample identical times.
    double dt_shared = spec.time.dt_max;
    for (const auto& initial : initials)
        dt_shared = std::min(dt_shared, 0.9 * admissible_dt(initial, spec.params, spec.time));
    TimeControls controls = spec.time;
    controls.dt_max = dt_shared;

    DiagnosticsConfig diag = spec.diagnostics;
    diag.store_trajectory = true;

    std::vector<RunReport> reports;
    int broken_index = -1;
    for (std::size_t i = 0; i < initials.size(); ++i) {
        RunReport r = run_simulation(initials[i], spec.params, controls, diag, ops, spec.form);
        if (r.vacuum_abort && broken_index < 0) broken_index = static_cast<int>(i);
        reports.push_back(std::move(r));
    }

    if (broken_index >= 0) {
        out.add_verdict("sequence", "broken at index " + std::to_string(broken_index));
        out.add_verdict("verdict", false);
    } else {
        const RunReport& ref = reports.back();
        std::vector<double> d_seq;
        std::vector<double> t_seq;
        for (std::size_t m = 0; m < reports.size(); ++m) {
            const RunReport& mem = reports[m];
            if (mem.trajectory.size() != ref.trajectory.size())
                throw std::runtime_error("compactness-probe: member sampling desynchronized");
            std::vector<double> times;
            std::vector<double> grad_dist;
            double tensor_accum = 0.0;
            double prev_time = 0.0;
            double prev_l1 = 0.0;
            for (std::size_t k = 0; k < mem.trajectory.size(); ++k) {
                const State& sm = mem.trajectory[k];
                const State& sr = ref.trajectory[k];
                if (std::abs(sm.t - sr.t) > 1e-12)
                    throw std::runtime_error("compactness-probe: sample times differ");
                Field gm = ops.gradient(sm.rho);
                Field gr = ops.gradient(sr.rho);
                double l2sq = 0.0;
                double l1 = 0.0;
                auto c = chi.comp(0);
                const int dim = grid->dim();
                for (std::size_t idx = 0; idx < sm.rho.points(); ++idx) {
                    for (int ci = 0; ci < dim; ++ci) {
                        const double diff = gm.value(ci, idx) - gr.value(ci, idx);
                        l2sq += c[idx] * c[idx] * diff * diff;
                        for (int cj = 0; cj < dim; ++cj) {
                            const double tm = gm.value(ci, idx) * gm.value(cj, idx);
                            const double tr = gr.value(ci, idx) * gr.value(cj, idx);
                            l1 += c[idx] * std::abs(tm - tr);
                        }
                    }
                }
                l2sq *= grid->cell_volume();
                l1 *= grid->cell_volume();
                times.push_back(sm.t);
                grad_dist.push_back(std::sqrt(l2sq));
                if (k > 0) tensor_accum += 0.5 * (sm.t - prev_time) * (prev_l1 + l1);
                prev_time = sm.t;
                prev_l1 = l1;
            }
            d_seq.push_back(time_l2(times, grad_dist));
            t_seq.push_back(tensor_accum);
            out.add_metric("d_scale=" + fmt(scales[m]), d_seq.back());
            out.add_metric("t_scale=" + fmt(scales[m]), t_seq.back());
        }
        bool decreasing = true;
        for (std::size_t i = 1; i < d_seq.size(); ++i) {
            decreasing = decreasing && d_seq[i] <= d_seq[i - 1] * (1.0 + kSequenceSlack);
            decreasing = decreasing && t_seq[i] <= t_seq[i - 1] * (1.0 + kSequenceSlack);
        }
        out.add_verdict("sequence", "complete");
        out.add_verdict("distances_decreasing", decreasing);
        out.add_verdict("verdict", decreasing);
    }

    for (std::size_t m = 0; m < reports.size(); ++m) {
        reports[m].trajectory.clear();  // keep reports lean for serialization
        out.member_labels.push_back("scale=" + fmt(scales[m]));
        out.members.push_back(std::move(reports[m]));
    }
    return out;
}

ExperimentReport vacuum_persistence_1d(const ExperimentSpec& spec) {
    if (spec.dim != 1) throw std::invalid_argument("vacuum-persistence-1d: dim must be 1");
    if (!(spec.scan.linf_bound > 0.0))
        throw std::invalid_argument("vacuum-persistence-1d: scan.linf_bound must be positive");
    spec.params.validate();

    ExperimentReport out;
    out.id = "vacuum-persistence-1d";

    DiagnosticsConfig diag = spec.diagnostics;
    diag.store_trajectory = true;
    MemberRun member = run_member(spec, spec.n, spec.init, spec.time, diag);
    RunReport& report = member.report;

    const double t_star = report.records.empty() ? 0.0 : report.records.back().t;
    double sup_inv = 0.0;
    for (const auto& rec : report.records) sup_inv = std::max(sup_inv, rec.sup_inv_rho);
    double max_dev = 0.0;
    for (const auto& s : report.trajectory)
        max_dev = std::max(max_dev, linf_deviation(s, spec.params.rho_bar));
    report.trajectory.clear();

    const bool completed = !report.vacuum_abort;
    out.add_metric("t_star", t_star);
    out.add_metric("sup_inv_rho", sup_inv);
    out.add_metric("max_linf_deviation", max_dev);
    out.add_verdict("completed", completed);
    out.add_verdict("vacuum_abort", report.vacuum_abort);
    out.add_verdict("linf_within_bound", max_dev <= spec.scan.linf_bound);
    out.add_verdict("verdict", completed && max_dev <= spec.scan.linf_bound);

    out.member_labels = {"run"};
    out.members.push_back(std::move(report));
    return out;
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
    if (spec.id == "energy-decay") return energy_decay_experiment(spec);
    if (spec.id == "gain-scan-1d") return gain_scan_1d(spec);
    if (spec.id == "smallness-scan-2d") return smallness_scan_2d(spec);
    if (spec.id == "compactness-probe") return compactness_probe(spec);
    if (spec.id == "vacuum-persistence-1d") return vacuum_persistence_1d(spec);
    std::string msg = "unknown experiment id '" + spec.id + "'; valid ids:";
    for (const auto& id : experiment_ids()) msg += " " + id;
    throw std::invalid_argument(msg);
}

}  // namespace nsk
