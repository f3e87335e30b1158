#include "nsk/solver.hpp"

#include <algorithm>
#include <cmath>

namespace nsk {

void TimeControls::validate() const {
    if (!(t_end > 0.0)) throw std::invalid_argument("TimeControls: t_end must be positive");
    if (!(cfl > 0.0) || cfl > 1.0)
        throw std::invalid_argument("TimeControls: cfl must lie in (0, 1]");
    if (!(dt_max > 0.0)) throw std::invalid_argument("TimeControls: dt_max must be positive");
    if (!(rho_floor > 0.0))
        throw std::invalid_argument("TimeControls: rho_floor must be positive");
}

namespace {

Field multiply(const Field& a, const Field& b) {
    Field out(a.grid_ptr(), 1);
    auto x = a.comp(0);
    auto y = b.comp(0);
    auto z = out.comp(0);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = x[i] * y[i];
    return out;
}

Field scalar_of(const Field& vec, int c) {
    Field out = Field::scalar(vec.grid_ptr());
    std::copy(vec.comp(c).begin(), vec.comp(c).end(), out.comp(0).begin());
    return out;
}

Field maybe_dealias(Field f, const SpectralOps& ops, bool dealias) {
    return dealias ? ops.dealias(f) : f;
}

}  // namespace

Field capillary_force(const Field& rho, double kappa, CapillaryForm form,
                      const SpectralOps& ops, bool dealias) {
    const GridPtr grid = rho.grid_ptr();
    const int dim = grid->dim();
    Field force = Field::vector(grid);

    if (form == CapillaryForm::Direct) {
        Field grad_lap = ops.gradient(ops.laplacian(rho));
        for (int c = 0; c < dim; ++c) {
            auto r = rho.comp(0);
            auto gl = grad_lap.comp(c);
            auto out = force.comp(c);
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = kappa * r[i] * gl[i];
        }
        return maybe_dealias(std::move(force), ops, dealias);
    }

    // div K with K_ij = (kappa/2)(lap rho^2 - |grad rho|^2) delta_ij
    //               - kappa d_i rho d_j rho
    Field rho2 = maybe_dealias(multiply(rho, rho), ops, dealias);
    Field lap_rho2 = ops.laplacian(rho2);
    Field grad_rho = ops.gradient(rho);

    Field grad_sq = Field::scalar(grid);
    {
        auto out = grad_sq.comp(0);
        for (int c = 0; c < dim; ++c) {
            auto g = grad_rho.comp(c);
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += g[i] * g[i];
        }
    }
    grad_sq = maybe_dealias(std::move(grad_sq), ops, dealias);

    // Diagonal part: grad of (kappa/2)(lap rho^2 - |grad rho|^2).
    Field diag = Field::scalar(grid);
    {
        auto out = diag.comp(0);
        auto l = lap_rho2.comp(0);
        auto gs = grad_sq.comp(0);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = 0.5 * kappa * (l[i] - gs[i]);
    }
    Field grad_diag = ops.gradient(diag);

    for (int j = 0; j < dim; ++j) {
        auto out = force.comp(j);
        auto gd = grad_diag.comp(j);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = gd[i];
        for (int i_axis = 0; i_axis < dim; ++i_axis) {
            Field prod = Field::scalar(grid);
            {
                auto p = prod.comp(0);
                auto gi = grad_rho.comp(i_axis);
                auto gj = grad_rho.comp(j);
                for (std::size_t i = 0; i < p.size(); ++i) p[i] = gi[i] * gj[i];
            }
            prod = maybe_dealias(std::move(prod), ops, dealias);
            Field dprod = ops.derivative(prod, i_axis);
            auto dp = dprod.comp(0);
            for (std::size_t i = 0; i < out.size(); ++i) out[i] -= kappa * dp[i];
        }
    }
    return force;
}

Tendencies tendencies(const State& state, const PhysParams& params, const SpectralOps& ops,
                      CapillaryForm form, bool dealias, double rho_floor) {
    const GridPtr grid = state.rho.grid_ptr();
    const int dim = grid->dim();

    const double min_rho = min_value(state.rho, 0);
    if (min_rho < rho_floor) {
        auto rho = state.rho.comp(0);
        std::size_t site = 0;
        for (std::size_t i = 0; i < rho.size(); ++i)
            if (rho[i] == min_rho) { site = i; break; }
        throw VacuumError(state.t, site, min_rho);
    }

    // Mass: d rho/dt = -div(rho u).
    Field momentum = Field::vector(grid);
    for (int c = 0; c < dim; ++c) {
        auto rho = state.rho.comp(0);
        auto u = state.u.comp(c);
        auto out = momentum.comp(c);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = rho[i] * u[i];
    }
    momentum = maybe_dealias(std::move(momentum), ops, dealias);
    Field drho = ops.divergence(momentum);
    for (auto& v : drho.comp(0)) v = -v;

    // Momentum: advection term (u.grad)u.
    Field advect = Field::vector(grid);
    for (int c = 0; c < dim; ++c) {
        Field uc = scalar_of(state.u, c);
        auto out = advect.comp(c);
        for (int axis = 0; axis < dim; ++axis) {
            Field d = ops.derivative(uc, axis);
            auto ua = state.u.comp(axis);
            auto dv = d.comp(0);
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += ua[i] * dv[i];
        }
    }
    advect = maybe_dealias(std::move(advect), ops, dealias);

    // Force: mu lap u + xi grad div u - grad P + capillary.
    Field force = Field::vector(grid);
    {
        Field lap_u = ops.laplacian(state.u);
        Field div_u = ops.divergence(state.u);
        Field grad_div = ops.gradient(div_u);

        Field pressure = Field::scalar(grid);
        {
            auto rho = state.rho.comp(0);
            auto p = pressure.comp(0);
            for (std::size_t i = 0; i < p.size(); ++i)
                p[i] = params.a * std::pow(rho[i], params.gamma);
        }
        pressure = maybe_dealias(std::move(pressure), ops, dealias);
        Field grad_p = ops.gradient(pressure);

        Field cap = capillary_force(state.rho, params.kappa, form, ops, dealias);

        for (int c = 0; c < dim; ++c) {
            auto out = force.comp(c);
            auto lu = lap_u.comp(c);
            auto gd = grad_div.comp(c);
            auto gp = grad_p.comp(c);
            auto cf = cap.comp(c);
            for (std::size_t i = 0; i < out.size(); ++i)
                out[i] = params.mu * lu[i] + params.xi() * gd[i] - gp[i] + cf[i];
        }
    }

    Field du = Field::vector(grid);
    for (int c = 0; c < dim; ++c) {
        auto out = du.comp(c);
        auto adv = advect.comp(c);
        auto fr = force.comp(c);
        auto rho = state.rho.comp(0);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = -adv[i] + fr[i] / rho[i];
    }
    du = maybe_dealias(std::move(du), ops, dealias);

    return {std::move(drho), std::move(du)};
}

double stability_scale(const State& state, const PhysParams& params, double rho_floor) {
    const double dx = state.rho.grid().dx();
    double umax = 0.0;
    for (int c = 0; c < state.u.components(); ++c)
        for (double v : state.u.comp(c)) umax = std::max(umax, std::abs(v));
    return std::sqrt(params.kappa * params.rho_bar) +
           (2.0 * params.mu + params.lambda) / rho_floor + umax * dx;
}

double admissible_dt(const State& state, const PhysParams& params,
                     const TimeControls& controls) {
    const double dx = state.rho.grid().dx();
    const double s = stability_scale(state, params, controls.rho_floor);
    return std::min(controls.dt_max, controls.cfl * dx * dx / s);
}

StepResult rk4_step(const State& state, const PhysParams& params, const TimeControls& controls,
                    double dt, const SpectralOps& ops, CapillaryForm form) {
    if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be positive");
    if (dt > admissible_dt(state, params, controls) * (1.0 + 1e-12))
        throw std::invalid_argument("rk4_step: dt exceeds the TimeControls bound");

    const bool dealias = controls.dealias_products;
    const double floor = controls.rho_floor;
    const int dim = state.rho.grid().dim();

    auto axpy_state = [&](const State& base, double coef, const Tendencies& k, double t) {
        State out = base;
        out.t = t;
        auto rho = out.rho.comp(0);
        auto kr = k.drho_dt.comp(0);
        for (std::size_t i = 0; i < rho.size(); ++i) rho[i] += coef * kr[i];
        for (int c = 0; c < dim; ++c) {
            auto u = out.u.comp(c);
            auto ku = k.du_dt.comp(c);
            for (std::size_t i = 0; i < u.size(); ++i) u[i] += coef * ku[i];
        }
        return out;
    };

    const Tendencies k1 = tendencies(state, params, ops, form, dealias, floor);
    const double d1 = dissipation_rate(state, params, ops);

    const State s2 = axpy_state(state, 0.5 * dt, k1, state.t + 0.5 * dt);
    const Tendencies k2 = tendencies(s2, params, ops, form, dealias, floor);
    const double d2 = dissipation_rate(s2, params, ops);

    const State s3 = axpy_state(state, 0.5 * dt, k2, state.t + 0.5 * dt);
    const Tendencies k3 = tendencies(s3, params, ops, form, dealias, floor);
    const double d3 = dissipation_rate(s3, params, ops);

    const State s4 = axpy_state(state, dt, k3, state.t + dt);
    const Tendencies k4 = tendencies(s4, params, ops, form, dealias, floor);
    const double d4 = dissipation_rate(s4, params, ops);

    State next = state;
    next.t = state.t + dt;
    {
        auto rho = next.rho.comp(0);
        auto r1 = k1.drho_dt.comp(0);
        auto r2 = k2.drho_dt.comp(0);
        auto r3 = k3.drho_dt.comp(0);
        auto r4 = k4.drho_dt.comp(0);
        const double w = dt / 6.0;
        for (std::size_t i = 0; i < rho.size(); ++i)
            rho[i] += w * (r1[i] + 2.0 * r2[i] + 2.0 * r3[i] + r4[i]);
        for (int c = 0; c < dim; ++c) {
            auto u = next.u.comp(c);
            auto u1 = k1.du_dt.comp(c);
            auto u2 = k2.du_dt.comp(c);
            auto u3 = k3.du_dt.comp(c);
            auto u4 = k4.du_dt.comp(c);
            for (std::size_t i = 0; i < u.size(); ++i)
                u[i] += w * (u1[i] + 2.0 * u2[i] + 2.0 * u3[i] + u4[i]);
        }
    }

    const double min_rho = min_value(next.rho, 0);
    if (min_rho < floor) {
        auto rho = next.rho.comp(0);
        std::size_t site = 0;
        for (std::size_t i = 0; i < rho.size(); ++i)
            if (rho[i] == min_rho) { site = i; break; }
        throw VacuumError(next.t, site, min_rho);
    }

    return {std::move(next), dt / 6.0 * (d1 + 2.0 * d2 + 2.0 * d3 + d4)};
}

namespace {

DiagnosticsRecord make_record(const State& state, const PhysParams& params,
                              const SpectralOps& ops, const DiagnosticsConfig& cfg,
                              const Field& cutoff, double dissipation_cum,
                              double budget_drift) {
    DiagnosticsRecord rec;
    rec.t = state.t;
    rec.energy_gamma = total_energy(state, params, ops);
    rec.dissipation_cum = dissipation_cum;
    rec.budget_drift = budget_drift;
    rec.min_rho = min_value(state.rho, 0);
    rec.sup_inv_rho = sup_inverse_density(state.rho);
    rec.h1_deviation = h1_deviation(state.rho, params.rho_bar, ops);

    Field dev = Field::scalar(state.rho.grid_ptr());
    {
        auto in = state.rho.comp(0);
        auto out = dev.comp(0);
        for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] - params.rho_bar;
    }
    rec.orlicz_dev = orlicz_norm(dev, cfg.orlicz);

    double jmass = 0.0;
    for (double r : state.rho.comp(0)) jmass += j_gamma(r, params);
    rec.j_gamma_mass = jmass * state.rho.grid().cell_volume();

    Field phirho2 = Field::scalar(state.rho.grid_ptr());
    {
        auto rho = state.rho.comp(0);
        auto phi = cutoff.comp(0);
        auto out = phirho2.comp(0);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = phi[i] * rho[i] * rho[i];
    }
    for (double s : cfg.s_values)
        rec.gain_samples.push_back(ops.sobolev_norm(phirho2, 1.0 + 0.5 * s, false));
    return rec;
}

std::vector<double> momentum_vector(const State& state) {
    std::vector<double> mom(state.u.components(), 0.0);
    const double dv = state.rho.grid().cell_volume();
    for (int c = 0; c < state.u.components(); ++c) {
        auto rho = state.rho.comp(0);
        auto u = state.u.comp(c);
        double sum = 0.0;
        for (std::size_t i = 0; i < rho.size(); ++i) sum += rho[i] * u[i];
        mom[c] = sum * dv;
    }
    return mom;
}

}  // namespace

RunReport run_simulation(const State& initial, const PhysParams& params,
                         const TimeControls& controls, const DiagnosticsConfig& diagnostics,
                         const SpectralOps& ops, CapillaryForm form) {
    params.validate();
    controls.validate();
    diagnostics.validate(initial.rho.grid().dim());
    const StateReport check = validate_state(initial, controls.rho_floor);
    if (!check.ok)
        throw std::invalid_argument("run_simulation: initial density below rho_floor (min " +
                                    std::to_string(check.min_rho) + ")");

    const Field cutoff = build_cutoff(diagnostics.cutoff, initial.rho.grid_ptr());

    RunReport report;
    report.initial_energy = total_energy(initial, params, ops);
    report.initial_mass = integrate(initial.rho, 0);
    const std::vector<double> mom0 = momentum_vector(initial);

    double dissipation_cum = 0.0;   // trapezoid on the sampling cadence
    double budget_q = 0.0;          // RK4 stage quadrature
    double last_sample_rate = dissipation_rate(initial, params, ops);
    double last_sample_time = 0.0;

    auto sample = [&](const State& s) {
        const double rate = dissipation_rate(s, params, ops);
        if (!report.records.empty()) {
            dissipation_cum += 0.5 * (s.t - last_sample_time) * (last_sample_rate + rate);
        }
        last_sample_rate = rate;
        last_sample_time = s.t;
        const double energy = total_energy(s, params, ops);
        DiagnosticsRecord rec = make_record(s, params, ops, diagnostics, cutoff,
                                            dissipation_cum,
                                            energy + budget_q - report.initial_energy);
        report.records.push_back(std::move(rec));
        if (diagnostics.store_trajectory) report.trajectory.push_back(s);

        const double mass = integrate(s.rho, 0);
        report.max_mass_drift_rel =
            std::max(report.max_mass_drift_rel,
                     std::abs(mass - report.initial_mass) / std::abs(report.initial_mass));
        const std::vector<double> mom = momentum_vector(s);
        for (std::size_t c = 0; c < mom.size(); ++c)
            report.max_momentum_drift =
                std::max(report.max_momentum_drift, std::abs(mom[c] - mom0[c]));
    };

    State current = initial;
    sample(current);

    long steps_since_sample = 0;
    try {
        while (current.t < controls.t_end * (1.0 - 1e-14)) {
            double dt = admissible_dt(current, params, controls);
            const double remaining = controls.t_end - current.t;
            if (dt >= remaining) {
                dt = remaining;  // land exactly on t_end
            } else if (remaining - dt < 0.1 * dt) {
                dt = 0.5 * remaining;  // avoid leaving a degenerate micro-step
            }
            StepResult step = rk4_step(current, params, controls, dt, ops, form);
            budget_q += step.dissipation_increment;
            current = std::move(step.state);
            ++report.step_count;
            ++steps_since_sample;
            const bool final_step = current.t >= controls.t_end * (1.0 - 1e-14);
            if (steps_since_sample >= diagnostics.sample_every || final_step) {
                sample(current);
                steps_since_sample = 0;
            }
        }
        report.final_time = current.t;
    } catch (const VacuumError& err) {
        report.vacuum_abort = true;
        report.abort_time = err.time;
        report.abort_site = err.site;
        report.abort_min_rho = err.min_rho;
        report.final_time = current.t;  // last completed state
    }
    return report;
}

std::vector<double> renormalized_rho2_residual(std::span<const State> window,
                                               const Field& cutoff, const SpectralOps& ops,
                                               bool dealias) {
    if (window.size() < 3)
        throw std::invalid_argument("renormalized_rho2_residual: need at least 3 snapshots");

    const GridPtr grid = window[0].rho.grid_ptr();
    const int dim = grid->dim();
    Field grad_phi = ops.gradient(cutoff);

    auto phi_rho2 = [&](const State& s) {
        Field out = Field::scalar(grid);
        auto rho = s.rho.comp(0);
        auto phi = cutoff.comp(0);
        auto o = out.comp(0);
        for (std::size_t i = 0; i < o.size(); ++i) o[i] = phi[i] * rho[i] * rho[i];
        return out;
    };

    std::vector<double> residuals;
    for (std::size_t k = 1; k + 1 < window.size(); ++k) {
        const State& s = window[k];
        // Three-point first-derivative stencil, exact on quadratics, so the
        // second-order error survives slightly non-uniform sampling.
        const double hm = window[k].t - window[k - 1].t;
        const double hp = window[k + 1].t - window[k].t;
        const double wm = -hp / (hm * (hm + hp));
        const double w0 = (hp - hm) / (hm * hp);
        const double wp = hm / (hp * (hm + hp));

        Field ddt = Field::scalar(grid);
        {
            Field fp = phi_rho2(window[k + 1]);
            Field f0 = phi_rho2(window[k]);
            Field fm = phi_rho2(window[k - 1]);
            auto o = ddt.comp(0);
            auto p = fp.comp(0);
            auto z = f0.comp(0);
            auto m = fm.comp(0);
            for (std::size_t i = 0; i < o.size(); ++i)
                o[i] = wm * m[i] + w0 * z[i] + wp * p[i];
        }

        // div(phi rho^2 u)
        Field flux = Field::vector(grid);
        for (int c = 0; c < dim; ++c) {
            auto rho = s.rho.comp(0);
            auto phi = cutoff.comp(0);
            auto u = s.u.comp(c);
            auto o = flux.comp(c);
            for (std::size_t i = 0; i < o.size(); ++i) o[i] = phi[i] * rho[i] * rho[i] * u[i];
        }
        if (dealias) flux = ops.dealias(flux);
        Field div_flux = ops.divergence(flux);

        // phi rho^2 div u
        Field div_u = ops.divergence(s.u);
        Field compress = Field::scalar(grid);
        {
            auto rho = s.rho.comp(0);
            auto phi = cutoff.comp(0);
            auto d = div_u.comp(0);
            auto o = compress.comp(0);
            for (std::size_t i = 0; i < o.size(); ++i)
                o[i] = phi[i] * rho[i] * rho[i] * d[i];
        }

        // r_phi = grad(phi) . (rho^2 u)
        Field remainder = Field::scalar(grid);
        {
            auto rho = s.rho.comp(0);
            auto o = remainder.comp(0);
            for (int c = 0; c < dim; ++c) {
                auto gp = grad_phi.comp(c);
                auto u = s.u.comp(c);
                for (std::size_t i = 0; i < o.size(); ++i)
                    o[i] += gp[i] * rho[i] * rho[i] * u[i];
            }
        }

        Field res = Field::scalar(grid);
        {
            auto o = res.comp(0);
            auto a = ddt.comp(0);
            auto b = div_flux.comp(0);
            auto c = compress.comp(0);
            auto r = remainder.comp(0);
            for (std::size_t i = 0; i < o.size(); ++i) o[i] = a[i] + b[i] + c[i] - r[i];
        }
        residuals.push_back(l2_norm(res));
    }
    return residuals;
}

}  // namespace nsk
