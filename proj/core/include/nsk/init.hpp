/// @file init.hpp
/// Seeded, reproducible initial data: explicit mode perturbations around the
/// reference density and mollified sequences of a fixed band-limited profile.

#pragma once

#include <cstdint>

#include "nsk/grid.hpp"
#include "nsk/spectral.hpp"

namespace nsk {

struct ModeEntry {
    int mode = 1;           ///< integer mode along the entry's axis
    double rho_coeff = 1.0; ///< density amplitude factor
    double u_coeff = 0.0;   ///< velocity amplitude factor
};

/// Deterministic initial data builder. Same seed, same grid -> bit-identical
/// fields. Generated rho has mean rho_bar.
struct InitSpec {
    enum class Kind { ModePerturbation, MollifiedSequence };
    Kind kind = Kind::ModePerturbation;
    double amplitude = 0.0;          ///< overall scale, >= 0
    std::vector<ModeEntry> modes;    ///< ModePerturbation entries
    std::uint64_t seed = 0;          ///< drives phases / profile coefficients
    double mollify_scale = 0.1;      ///< smoothing length for MollifiedSequence
    int profile_band = 8;            ///< highest mode of the seeded profile

    void validate() const;
};

/// Builds (rho0, u0) at t = 0.
State build_initial_state(GridPtr grid, const PhysParams& params, const InitSpec& init,
                          const SpectralOps& ops);

/// The seeded base profile before mollification (mean-free, max amplitude 1),
/// exposed for the mollified-convergence pre-check.
Field base_profile(GridPtr grid, const InitSpec& init);

/// Gaussian spectral damping exp(-(scale*|k|)^2).
Field mollify(const Field& f, double scale, const SpectralOps& ops);

}  // namespace nsk
