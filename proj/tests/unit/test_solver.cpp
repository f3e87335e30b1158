#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "nsk/solver.hpp"

using namespace nsk;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Field cos_field(GridPtr g, double mean, double amp, int mode) {
    Field f = Field::scalar(g);
    const double dk = kTwoPi / g->length();
    if (g->dim() == 1) {
        for (int i = 0; i < g->n(); ++i)
            f.comp(0)[i] = mean + amp * std::cos(mode * dk * g->coord(i));
    } else {
        for (int i = 0; i < g->n(); ++i)
            for (int j = 0; j < g->n(); ++j)
                f.comp(0)[g->index(i, j)] =
                    mean + amp * std::cos(mode * dk * g->coord(i)) *
                               std::cos(mode * dk * g->coord(j));
    }
    return f;
}

Field band_limited_density(GridPtr g, double mean, double amp, unsigned seed) {
    std::mt19937_64 rng(seed);
    auto u01 = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    Field f = Field::scalar(g);
    auto values = f.comp(0);
    std::fill(values.begin(), values.end(), mean);
    const int band = g->n() / 4;
    const double dk = kTwoPi / g->length();
    const int n = g->n();
    for (int m = 1; m <= band; ++m) {
        const double decay = std::exp(-0.3 * m);
        for (int axis = 0; axis < g->dim(); ++axis) {
            const double c = amp * decay * (2.0 * u01() - 1.0);
            const double phase = kTwoPi * u01();
            for (std::size_t idx = 0; idx < values.size(); ++idx) {
                const int i = g->dim() == 1 ? static_cast<int>(idx)
                                            : static_cast<int>(idx) / n;
                const int j = g->dim() == 1 ? 0 : static_cast<int>(idx) % n;
                const double x = axis == 0 ? g->coord(i) : g->coord(j);
                values[idx] += c * std::cos(dk * m * x + phase);
            }
        }
    }
    return f;
}

double max_diff(const Field& a, const Field& b) {
    double m = 0.0;
    for (int c = 0; c < a.components(); ++c)
        for (std::size_t i = 0; i < a.points(); ++i)
            m = std::max(m, std::abs(a.value(c, i) - b.value(c, i)));
    return m;
}

State small_wave_state(GridPtr g, double amp) {
    Field rho = cos_field(g, 1.0, amp, 1);
    Field u = Field::vector(g);
    for (std::size_t i = 0; i < u.points(); ++i)
        u.comp(0)[i] = amp * std::sin(kTwoPi / g->length() * g->coord(
                                          g->dim() == 1 ? static_cast<int>(i)
                                                        : static_cast<int>(i) / g->n()));
    return State(0.0, std::move(rho), std::move(u));
}

}  // namespace

TEST_CASE("capillary force vanishes on constant density") {
    for (int dim : {1, 2}) {
        GridPtr g = Grid::make(dim, dim == 1 ? 64 : 32, kTwoPi);
        SpectralOps ops(g);
        Field rho = cos_field(g, 1.4, 0.0, 1);
        for (auto form : {CapillaryForm::Direct, CapillaryForm::TensorDivergence}) {
            Field f = capillary_force(rho, 1.0, form, ops, true);
            CHECK(max_abs(f) < 1e-13);
        }
    }
}

TEST_CASE("direct capillary force matches the symbolic oracle") {
    // rho = 1 + 0.1 cos x, kappa = 1:
    //   lap rho = -0.1 cos x, grad lap rho = 0.1 sin x,
    //   force = rho * grad lap rho = (1 + 0.1 cos x) * 0.1 sin x.
    GridPtr g = Grid::make(1, 64, kTwoPi);
    SpectralOps ops(g);
    Field rho = cos_field(g, 1.0, 0.1, 1);
    Field force = capillary_force(rho, 1.0, CapillaryForm::Direct, ops, true);
    Field expected = Field::vector(g);
    for (int i = 0; i < g->n(); ++i) {
        const double x = g->coord(i);
        expected.comp(0)[i] = (1.0 + 0.1 * std::cos(x)) * 0.1 * std::sin(x);
    }
    CHECK(max_diff(force, expected) < 1e-10);
}

TEST_CASE("both capillary forms agree on dealiased random density") {
    for (int dim : {1, 2}) {
        GridPtr g = Grid::make(dim, 64, kTwoPi);
        SpectralOps ops(g);
        Field rho = ops.dealias(band_limited_density(g, 1.0, 0.2, 17 + dim));
        Field direct = capillary_force(rho, 0.7, CapillaryForm::Direct, ops, true);
        Field tensor = capillary_force(rho, 0.7, CapillaryForm::TensorDivergence, ops, true);
        CHECK(max_diff(direct, tensor) < 1e-8);
    }
}

TEST_CASE("tendencies at equilibrium are identically zero") {
    GridPtr g = Grid::make(1, 64, kTwoPi);
    SpectralOps ops(g);
    PhysParams p;
    State s(0.0, cos_field(g, 1.0, 0.0, 1), Field::vector(g));
    Tendencies t = tendencies(s, p, ops, CapillaryForm::Direct, true, 0.01);
    CHECK(max_abs(t.drho_dt) == 0.0);
    CHECK(max_abs(t.du_dt) == 0.0);
}

TEST_CASE("uniform translation is a steady state") {
    GridPtr g = Grid::make(2, 32, kTwoPi);
    SpectralOps ops(g);
    PhysParams p;
    Field rho = cos_field(g, 1.0, 0.0, 1);
    Field u = Field::vector(g);
    for (auto& v : u.comp(0)) v = 1.5;
    for (auto& v : u.comp(1)) v = -0.4;
    State s(0.0, rho, u);
    Tendencies t = tendencies(s, p, ops, CapillaryForm::TensorDivergence, true, 0.01);
    CHECK(max_abs(t.drho_dt) < 1e-14);
    CHECK(max_abs(t.du_dt) < 1e-13);
}

TEST_CASE("pressure-only tendency matches -2 grad rho for gamma = 2") {
    // mu = lambda = 0 (not a valid run configuration, but the right-hand side
    // is still defined) with kappa = 0, a = 1, gamma = 2, u = 0:
    //   du/dt = -grad(rho^2)/rho = -2 grad rho = 0.2 sin x.
    GridPtr g = Grid::make(1, 64, kTwoPi);
    SpectralOps ops(g);
    PhysParams p;
    p.mu = 0.0;
    p.lambda = 0.0;
    p.kappa = 0.0;
    State s(0.0, cos_field(g, 1.0, 0.1, 1), Field::vector(g));
    Tendencies t = tendencies(s, p, ops, CapillaryForm::Direct, true, 0.01);
    Field expected = Field::vector(g);
    for (int i = 0; i < g->n(); ++i) expected.comp(0)[i] = 0.2 * std::sin(g->coord(i));
    CHECK(max_abs(t.drho_dt) < 1e-13);
    CHECK(max_diff(t.du_dt, expected) < 1e-10);
}

TEST_CASE("tendencies reject density below the floor") {
    GridPtr g = Grid::make(1, 64, kTwoPi);
    SpectralOps ops(g);
    PhysParams p;
    State s(1.25, cos_field(g, 1.0, 0.999, 1), Field::vector(g));
    try {
        tendencies(s, p, ops, CapillaryForm::Direct, true, 0.01);
        FAIL("expected VacuumError");
    } catch (const VacuumError& e) {
        CHECK(e.time == 1.25);
        CHECK(e.min_rho < 0.01);
        CHECK(e.site < s.rho.points());
    }
}

TEST_CASE("rk4 step") {
    GridPtr g = Grid::make(1, 64, kTwoPi);
    SpectralOps ops(g);
    PhysParams p;
    TimeControls controls;
    controls.rho_floor = 0.5;
    controls.dt_max = 1.0;

    SUBCASE("equilibrium is an exact fixed point") {
        State s(0.0, cos_field(g, 1.0, 0.0, 1), Field::vector(g));
        const double dt = admissible_dt(s, p, controls);
        StepResult r = rk4_step(s, p, controls, dt, ops, CapillaryForm::Direct);
        CHECK(r.state.t == dt);
        CHECK(r.dissipation_increment == 0.0);
        for (std::size_t i = 0; i < s.rho.points(); ++i) {
            CHECK(r.state.rho.comp(0)[i] == s.rho.comp(0)[i]);
            CHECK(r.state.u.comp(0)[i] == s.u.comp(0)[i]);
        }
    }

    SUBCASE("one step vs two half steps converges at fifth order locally") {
        State s = small_wave_state(g, 0.05);
        const double dt = 0.01;
        REQUIRE(dt <= admissible_dt(s, p, controls));
        StepResult full = rk4_step(s, p, controls, dt, ops, CapillaryForm::Direct);
        StepResult half = rk4_step(s, p, controls, 0.5 * dt, ops, CapillaryForm::Direct);
        StepResult two = rk4_step(half.state, p, controls, 0.5 * dt, ops,
                                  CapillaryForm::Direct);
        const double err1 = std::max(max_diff(full.state.rho, two.state.rho),
                                     max_diff(full.state.u, two.state.u));

        StepResult full2 = rk4_step(s, p, controls, 0.5 * dt, ops, CapillaryForm::Direct);
        StepResult half2 = rk4_step(s, p, controls, 0.25 * dt, ops, CapillaryForm::Direct);
        StepResult two2 = rk4_step(half2.state, p, controls, 0.25 * dt, ops,
                                   CapillaryForm::Direct);
        const double err2 = std::max(max_diff(full2.state.rho, two2.state.rho),
                                     max_diff(full2.state.u, two2.state.u));
        CHECK(err1 > 1e-15);           // above round-off
        CHECK(err1 / err2 > 15.0);     // ~2^5 for a fifth-order local error
    }

    SUBCASE("dt above the bound is a precondition error") {
        State s = small_wave_state(g, 0.05);
        const double bound = admissible_dt(s, p, controls);
        CHECK_THROWS_AS(rk4_step(s, p, controls, bound * 1.5, ops, CapillaryForm::Direct),
                        std::invalid_argument);
    }
}

TEST_CASE("run_simulation") {
    PhysParams p;
    DiagnosticsConfig diag;
    diag.s_values = {0.2};
    diag.sample_every = 5;

    SUBCASE("equilibrium run: constant records, zero drift") {
        GridPtr g = Grid::make(1, 64, kTwoPi);
        SpectralOps ops(g);
        TimeControls controls;
        controls.t_end = 0.05;
        controls.dt_max = 5e-3;
        controls.rho_floor = 0.5;
        State s(0.0, cos_field(g, 1.0, 0.0, 1), Field::vector(g));
        RunReport r = run_simulation(s, p, controls, diag, ops);
        CHECK_FALSE(r.vacuum_abort);
        CHECK(r.final_time == doctest::Approx(controls.t_end));
        REQUIRE(r.records.size() >= 2);
        for (const auto& rec : r.records) {
            CHECK(rec.energy_gamma == 0.0);
            CHECK(rec.budget_drift == 0.0);
            CHECK(rec.dissipation_cum == 0.0);
            CHECK(rec.min_rho == 1.0);
            CHECK(rec.sup_inv_rho == 1.0);
            CHECK(rec.h1_deviation == doctest::Approx(0.0).epsilon(1e-14));
            CHECK(rec.gain_samples[0] ==
                  doctest::Approx(std::sqrt(kTwoPi)).epsilon(1e-12));
        }
        CHECK(r.max_mass_drift_rel == 0.0);
    }

    SUBCASE("small perturbation: energy non-increasing, mass exact") {
        GridPtr g = Grid::make(1, 128, kTwoPi);
        SpectralOps ops(g);
        TimeControls controls;
        controls.t_end = 0.25;
        controls.dt_max = 2e-3;
        controls.rho_floor = 0.5;
        State s = small_wave_state(g, 0.05);
        RunReport r = run_simulation(s, p, controls, diag, ops);
        CHECK_FALSE(r.vacuum_abort);
        REQUIRE(r.records.size() >= 3);
        const double e0 = r.records.front().energy_gamma;
        for (const auto& rec : r.records) {
            CHECK(rec.energy_gamma <= e0 * (1.0 + 1e-10));
            CHECK(std::abs(rec.budget_drift) <= 1e-8 * e0);
            CHECK(rec.dissipation_cum >= 0.0);
        }
        // dissipation_cum is non-decreasing
        for (std::size_t i = 1; i < r.records.size(); ++i)
            CHECK(r.records[i].dissipation_cum >= r.records[i - 1].dissipation_cum);
        CHECK(r.max_mass_drift_rel < 1e-12);
        CHECK(r.max_momentum_drift < 1e-10);
        // H1 deviation stays bounded along the run
        double sup_h1 = 0.0;
        for (const auto& rec : r.records) {
            CHECK(std::isfinite(rec.h1_deviation));
            sup_h1 = std::max(sup_h1, rec.h1_deviation);
        }
        CHECK(sup_h1 <= 2.0 * r.records.front().h1_deviation);
    }

    SUBCASE("initial data below the floor is rejected") {
        GridPtr g = Grid::make(1, 64, kTwoPi);
        SpectralOps ops(g);
        TimeControls controls;
        controls.rho_floor = 0.5;
        State s(0.0, cos_field(g, 1.0, 0.6, 1), Field::vector(g));
        CHECK_THROWS_AS(run_simulation(s, p, controls, diag, ops), std::invalid_argument);
    }

    SUBCASE("2d perturbation: budget, mass, and momentum stay tight") {
        GridPtr g = Grid::make(2, 32, kTwoPi);
        SpectralOps ops(g);
        TimeControls controls;
        controls.t_end = 0.1;
        controls.dt_max = 2e-3;
        controls.rho_floor = 0.5;
        Field rho = cos_field(g, 1.0, 0.05, 1);
        Field u = Field::vector(g);
        for (int i = 0; i < g->n(); ++i)
            for (int j = 0; j < g->n(); ++j)
                u.comp(1)[g->index(i, j)] = 0.05 * std::sin(g->coord(j));
        State s(0.0, rho, u);
        RunReport r = run_simulation(s, p, controls, diag, ops);
        CHECK_FALSE(r.vacuum_abort);
        const double e0 = r.records.front().energy_gamma;
        for (const auto& rec : r.records) CHECK(std::abs(rec.budget_drift) <= 1e-8 * e0);
        CHECK(r.max_mass_drift_rel < 1e-12);
        CHECK(r.max_momentum_drift < 1e-9);
    }

    SUBCASE("capillary form choice does not change the trajectory") {
        GridPtr g = Grid::make(1, 128, kTwoPi);
        SpectralOps ops(g);
        TimeControls controls;
        controls.rho_floor = 0.5;
        controls.dt_max = 2e-3;
        State s = small_wave_state(g, 0.05);
        const double dt = admissible_dt(s, p, controls);
        StepResult a = rk4_step(s, p, controls, dt, ops, CapillaryForm::Direct);
        StepResult b = rk4_step(s, p, controls, dt, ops, CapillaryForm::TensorDivergence);
        CHECK(max_diff(a.state.rho, b.state.rho) < 1e-12);
        CHECK(max_diff(a.state.u, b.state.u) < 1e-12);
    }

    SUBCASE("dealiasing off: equilibrium still exact, mass still conserved") {
        GridPtr g = Grid::make(1, 64, kTwoPi);
        SpectralOps ops(g);
        TimeControls controls;
        controls.t_end = 0.1;
        controls.dt_max = 2e-3;
        controls.rho_floor = 0.5;
        controls.dealias_products = false;
        State eq(0.0, cos_field(g, 1.0, 0.0, 1), Field::vector(g));
        RunReport r_eq = run_simulation(eq, p, controls, diag, ops);
        for (const auto& rec : r_eq.records) CHECK(rec.energy_gamma == 0.0);

        State s = small_wave_state(g, 0.03);
        RunReport r = run_simulation(s, p, controls, diag, ops);
        CHECK_FALSE(r.vacuum_abort);
        CHECK(r.max_mass_drift_rel < 1e-12);
    }

    SUBCASE("large amplitude breaches the floor mid-run") {
        GridPtr g = Grid::make(1, 128, kTwoPi);
        SpectralOps ops(g);
        PhysParams thin = p;
        thin.mu = 0.02;
        thin.kappa = 1e-3;
        TimeControls controls;
        controls.t_end = 4.0;
        controls.dt_max = 1e-3;
        controls.rho_floor = 0.24;
        // Trough at x = pi starts at 0.25 and the velocity diverges there,
        // evacuating it well below the floor before pressure rebounds.
        Field rho = cos_field(g, 1.0, 0.75, 1);
        Field u = Field::vector(g);
        for (int i = 0; i < g->n(); ++i) u.comp(0)[i] = -0.8 * std::sin(g->coord(i));
        State s(0.0, rho, u);
        REQUIRE(validate_state(s, controls.rho_floor).ok);
        RunReport r = run_simulation(s, thin, controls, diag, ops);
        CHECK(r.vacuum_abort);
        CHECK(r.abort_time > 0.0);
        CHECK(r.abort_min_rho < controls.rho_floor);
        CHECK(r.final_time < controls.t_end);
        CHECK_FALSE(r.records.empty());  // partial trajectory preserved
    }
}

TEST_CASE("renormalized rho^2 residual") {
    PhysParams p;
    GridPtr g = Grid::make(1, 128, kTwoPi);
    SpectralOps ops(g);
    Field ones = build_cutoff(CutoffSpec{}, g);

    SUBCASE("fewer than three snapshots is an error") {
        std::vector<State> w{State(0.0, cos_field(g, 1.0, 0.0, 1), Field::vector(g)),
                             State(0.1, cos_field(g, 1.0, 0.0, 1), Field::vector(g))};
        CHECK_THROWS_AS(renormalized_rho2_residual(w, ones, ops, true),
                        std::invalid_argument);
    }

    SUBCASE("equilibrium trajectory: residual exactly zero") {
        std::vector<State> w;
        for (double t : {0.0, 0.1, 0.2, 0.3})
            w.push_back(State(t, cos_field(g, 1.0, 0.0, 1), Field::vector(g)));
        auto res = renormalized_rho2_residual(w, ones, ops, true);
        REQUIRE(res.size() == 2);
        for (double v : res) CHECK(v == 0.0);
    }

    SUBCASE("residual shrinks ~4x when dt and sampling halve") {
        TimeControls controls;
        controls.t_end = 0.2;
        controls.dt_max = 2e-3;
        controls.rho_floor = 0.5;
        DiagnosticsConfig diag;
        diag.sample_every = 10;
        diag.store_trajectory = true;

        auto residual_mid = [&](const TimeControls& c) {
            State s = small_wave_state(g, 0.05);
            RunReport r = run_simulation(s, p, c, diag, ops);
            REQUIRE(r.trajectory.size() >= 5);
            auto res = renormalized_rho2_residual(r.trajectory, ones, ops, true);
            return res[res.size() / 2];
        };
        const double coarse = residual_mid(controls);
        TimeControls halved = controls;
        halved.dt_max *= 0.5;
        halved.cfl *= 0.5;
        const double fine = residual_mid(halved);
        CHECK(coarse > 0.0);
        CHECK(coarse / fine >= 3.5);  // second-order centered difference
    }

    SUBCASE("bump cutoff: r_phi sign makes the residual converge") {
        // On a traveling profile the remainder grad(phi).(rho^2 u) is O(1);
        // with the correct sign the residual is only the finite-difference
        // error, with the wrong sign it would be ~2|grad phi . rho^2 u|.
        CutoffSpec bump;
        bump.kind = CutoffSpec::Kind::SmoothBump;
        bump.center = {std::numbers::pi};
        bump.radius = 2.0;
        Field phi = build_cutoff(bump, g);

        TimeControls controls;
        controls.t_end = 0.08;
        controls.dt_max = 1e-3;
        controls.rho_floor = 0.5;
        DiagnosticsConfig diag;
        diag.sample_every = 8;
        diag.store_trajectory = true;

        Field rho = cos_field(g, 1.0, 0.1, 1);
        Field u = Field::vector(g);
        for (auto& v : u.comp(0)) v = 0.5;  // strong transport through the bump
        State s(0.0, rho, u);
        RunReport r = run_simulation(s, p, controls, diag, ops);
        REQUIRE(r.trajectory.size() >= 3);
        auto res = renormalized_rho2_residual(r.trajectory, phi, ops, true);

        // scale of the remainder term itself
        Field grad_phi = ops.gradient(phi);
        double remainder_scale = 0.0;
        for (std::size_t i = 0; i < phi.points(); ++i)
            remainder_scale = std::max(
                remainder_scale, std::abs(grad_phi.comp(0)[i] * 1.0 * 1.0 * 0.5));
        for (double v : res) CHECK(v < 0.05 * remainder_scale);
    }
}
