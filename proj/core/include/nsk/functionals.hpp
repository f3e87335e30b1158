/// @file functionals.hpp
/// Scalar functionals tracked by the diagnostics engine: gamma-law potentials,
/// total energy, viscous dissipation, Orlicz (Luxemburg) norms and splittings,
/// vacuum measures, H^1 deviation, and time-integrated gain-of-derivative
/// norms.

#pragma once

#include <optional>
#include <vector>

#include "nsk/grid.hpp"
#include "nsk/spectral.hpp"

namespace nsk {

/// Convex gauge for the Orlicz space L^q_p: psi(x) = x^p for x <= 1 and
/// (p/q) x^q + 1 - p/q for x > 1 (C^1, convex, increasing for p, q > 1).
struct OrliczSpec {
    double p = 2.0;      ///< small-argument exponent, > 1
    double q = 2.0;      ///< large-argument exponent, > 1
    double delta = 1.0;  ///< splitting threshold, > 0

    void validate() const;
    double psi(double x) const;
};

/// Localization weight. Ones is the whole-torus weight; SmoothBump is a C-inf
/// plateau bump: 1 on the half-radius ball, 0 outside the radius ball
/// (periodic distance), values in [0, 1].
struct CutoffSpec {
    enum class Kind { Ones, SmoothBump };
    Kind kind = Kind::Ones;
    std::vector<double> center;  ///< bump center, size dim
    double radius = 1.0;         ///< bump support radius, > 0

    void validate(int dim) const;
};

Field build_cutoff(const CutoffSpec& spec, GridPtr grid);

/// Pressure P, potential Pi, and equilibrium distance j_gamma at one density
/// sample: P(s) = a s^g, Pi(s) = a/(g-1) (s^g - g rhobar^{g-1} s),
/// j_g(s) = s^g + (g-1) rhobar^g - g rhobar^{g-1} s.
struct GammaPotentials {
    double P = 0.0;
    double Pi = 0.0;
    double j = 0.0;
};

GammaPotentials gamma_potentials(double s, const PhysParams& params);
double j_gamma(double s, const PhysParams& params);

/// E^g = int( rho|u|^2/2 + a/(g-1) j_g(rho) + (kappa/2)|grad rho|^2 ) dx.
double total_energy(const State& state, const PhysParams& params, const SpectralOps& ops);

/// Instantaneous rate mu int |Du|^2 + xi int |div u|^2 (Du = full velocity
/// gradient).
double dissipation_rate(const State& state, const PhysParams& params, const SpectralOps& ops);

/// Luxemburg norm inf{ t > 0 : int psi(|f|/t) dx <= 1 } by bisection on the
/// non-increasing modular; relative tolerance 1e-12. Zero field returns 0.
double orlicz_norm(const Field& f, const OrliczSpec& spec);

/// The modular int psi(|f|/t) dx (exposed for tests).
double orlicz_modular(const Field& f, const OrliczSpec& spec, double t);

struct OrliczSplit {
    Field small_part;   ///< f * 1_{|f| <= delta}
    Field large_part;   ///< f * 1_{|f| > delta}
    double small_lp = 0.0;
    double large_lq = 0.0;
};

OrliczSplit orlicz_split(const Field& f, const OrliczSpec& spec);

/// max 1/rho over the grid; a non-positive sample sets the vacuum flag and
/// returns +inf.
double sup_inverse_density(const Field& rho, bool* vacuum = nullptr);

/// ||rho - rho_bar||_{H^1}.
double h1_deviation(const Field& rho, double rho_bar, const SpectralOps& ops);

/// (integral of v(t)^2 dt)^{1/2} by trapezoid on possibly non-uniform times.
double time_l2(std::span<const double> times, std::span<const double> values);

/// ||phi rho^2||_{L^2_T(H^{1+s/2})} from sampled states; throws on an empty
/// trajectory.
double gain_norm_series(std::span<const State> samples, const Field& cutoff, double s,
                        const SpectralOps& ops);

/// Per-sample scalar diagnostics along a run.
struct DiagnosticsRecord {
    double t = 0.0;
    double energy_gamma = 0.0;
    double dissipation_cum = 0.0;  ///< trapezoid of sampled rates
    double budget_drift = 0.0;     ///< E + Q - E(0), Q from the stepper quadrature
    double min_rho = 0.0;
    double sup_inv_rho = 0.0;
    double h1_deviation = 0.0;
    double orlicz_dev = 0.0;       ///< ||rho - rho_bar|| in L^q_p
    double j_gamma_mass = 0.0;     ///< int j_gamma(rho) dx
    std::vector<double> gain_samples;  ///< ||phi rho^2||_{H^{1+s/2}} per s
};

/// What to sample and how often along a run.
struct DiagnosticsConfig {
    std::vector<double> s_values;  ///< gain exponents, subset of [0, 2)
    int sample_every = 1;          ///< record cadence in steps, >= 1
    CutoffSpec cutoff;             ///< phi for the gain samples
    OrliczSpec orlicz;             ///< gauge for orlicz_dev
    bool store_trajectory = false; ///< keep sampled states in the report

    void validate(int dim) const;
};

}  // namespace nsk
