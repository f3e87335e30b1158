/// @file solver.hpp
/// Explicit pseudo-spectral time integration of the isothermal
/// Navier-Stokes-Korteweg system in non-conservative (rho, u) form:
///
///   d rho/dt = -div(rho u)
///   d u/dt   = -(u.grad)u + [mu lap(u) + xi grad(div u) - grad(a rho^gamma)
///               + capillary(rho)] / rho
///
/// with the capillary force computable as kappa*rho*grad(lap rho) (Direct) or
/// as div K, K_ij = (kappa/2)(lap(rho^2) - |grad rho|^2) delta_ij
/// - kappa d_i rho d_j rho (TensorDivergence); the two agree to round-off on
/// dealiased fields.

#pragma once

#include "nsk/functionals.hpp"
#include "nsk/grid.hpp"
#include "nsk/report.hpp"
#include "nsk/spectral.hpp"

namespace nsk {

enum class CapillaryForm { Direct, TensorDivergence };

/// Step-size policy and run limits. The step obeys
/// dt <= min(dt_max, cfl * dx^2 / S) with the stability scale
/// S = sqrt(kappa*rho_bar) + (2 mu + lambda)/rho_floor + max|u| * dx.
struct TimeControls {
    double t_end = 1.0;
    double cfl = 0.9;          ///< in (0, 1]
    double dt_max = 1e-3;
    double rho_floor = 0.01;   ///< vacuum floor, > 0
    bool dealias_products = true;

    void validate() const;
};

/// Vacuum breach: a measured outcome, carried as an exception so partial
/// trajectories survive in the caller.
class VacuumError : public std::runtime_error {
public:
    VacuumError(double time, std::size_t site, double min_rho)
        : std::runtime_error("vacuum breach: min rho = " + std::to_string(min_rho) +
                             " at t = " + std::to_string(time)),
          time(time), site(site), min_rho(min_rho) {}
    double time;
    std::size_t site;
    double min_rho;
};

/// Capillary force in either algebraic form; products optionally dealiased.
Field capillary_force(const Field& rho, double kappa, CapillaryForm form,
                      const SpectralOps& ops, bool dealias);

struct Tendencies {
    Field drho_dt;
    Field du_dt;
};

/// Right-hand side of the system; throws VacuumError if min rho < rho_floor.
Tendencies tendencies(const State& state, const PhysParams& params, const SpectralOps& ops,
                      CapillaryForm form, bool dealias, double rho_floor);

/// Stability scale S of the TimeControls bound, evaluated on a state.
double stability_scale(const State& state, const PhysParams& params, double rho_floor);

/// min(dt_max, cfl * dx^2 / S(state)).
double admissible_dt(const State& state, const PhysParams& params, const TimeControls& controls);

struct StepResult {
    State state;
    /// Dissipation integrated across the step with the classical RK4 stage
    /// quadrature (the same order as the state update).
    double dissipation_increment = 0.0;
};

/// Classical four-stage step; rejects dt above the TimeControls bound and
/// validates the result against rho_floor.
StepResult rk4_step(const State& state, const PhysParams& params, const TimeControls& controls,
                    double dt, const SpectralOps& ops, CapillaryForm form);

/// Integrate to t_end (or vacuum abort), sampling DiagnosticsRecord on the
/// configured cadence. Sample times always include t = 0 and the final time.
RunReport run_simulation(const State& initial, const PhysParams& params,
                         const TimeControls& controls, const DiagnosticsConfig& diagnostics,
                         const SpectralOps& ops,
                         CapillaryForm form = CapillaryForm::Direct);

/// L2 residual of d/dt(phi rho^2) + div(phi rho^2 u) + phi rho^2 div u - r_phi
/// with r_phi = grad(phi).(rho^2 u), per interior sample of a uniformly
/// sampled window (centered time difference). Needs >= 3 snapshots.
std::vector<double> renormalized_rho2_residual(std::span<const State> window,
                                               const Field& cutoff, const SpectralOps& ops,
                                               bool dealias);

}  // namespace nsk
