#include "nsk/init.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace nsk {

namespace {

// 53-bit uniform in [0, 1); fully specified, unlike std distributions.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

void InitSpec::validate() const {
    if (!(amplitude >= 0.0)) throw std::invalid_argument("InitSpec: amplitude must be >= 0");
    if (kind == Kind::ModePerturbation) {
        if (modes.empty())
            throw std::invalid_argument("InitSpec: mode_perturbation needs at least one mode");
        for (const auto& m : modes)
            if (m.mode == 0) throw std::invalid_argument("InitSpec: mode 0 would shift the mean");
    } else {
        if (!(mollify_scale > 0.0))
            throw std::invalid_argument("InitSpec: mollify_scale must be positive");
        if (profile_band < 1)
            throw std::invalid_argument("InitSpec: profile_band must be >= 1");
    }
}

Field base_profile(GridPtr grid, const InitSpec& init) {
    std::mt19937_64 rng(init.seed);
    const int band = std::min(init.profile_band, grid->n() / 4);
    Field profile = Field::scalar(grid);
    auto values = profile.comp(0);
    const double two_pi = 2.0 * std::numbers::pi;
    const double dk = two_pi / grid->length();

    const int dim = grid->dim();
    const int n = grid->n();
    for (int m = 1; m <= band; ++m) {
        const double decay = 1.0 / (1.0 + m * m);
        for (int axis = 0; axis < dim; ++axis) {
            const double coeff = decay * (2.0 * uniform01(rng) - 1.0);
            const double phase = two_pi * uniform01(rng);
            const double k = dk * m;
            for (std::size_t idx = 0; idx < values.size(); ++idx) {
                const int i = dim == 1 ? static_cast<int>(idx) : static_cast<int>(idx) / n;
                const int j = dim == 1 ? 0 : static_cast<int>(idx) % n;
                const double x = axis == 0 ? grid->coord(i) : grid->coord(j);
                values[idx] += coeff * std::cos(k * x + phase);
            }
        }
    }
    const double peak = max_abs(profile);
    if (peak > 0.0)
        for (auto& v : values) v /= peak;
    return profile;
}

Field mollify(const Field& f, double scale, const SpectralOps& ops) {
    Multiplier damp;
    damp.zero_mode = 1.0;
    damp.symbol = [scale](std::span<const double>, double kmag) {
        const double t = scale * kmag;
        return std::complex<double>(std::exp(-t * t), 0.0);
    };
    return ops.apply(f, damp);
}

State build_initial_state(GridPtr grid, const PhysParams& params, const InitSpec& init,
                          const SpectralOps& ops) {
    init.validate();
    Field rho = Field::scalar(grid);
    Field u = Field::vector(grid);
    const int dim = grid->dim();
    const int n = grid->n();
    const double two_pi = 2.0 * std::numbers::pi;
    const double dk = two_pi / grid->length();

    if (init.kind == InitSpec::Kind::ModePerturbation) {
        std::mt19937_64 rng(init.seed);
        auto rho_values = rho.comp(0);
        std::fill(rho_values.begin(), rho_values.end(), params.rho_bar);
        for (std::size_t e = 0; e < init.modes.size(); ++e) {
            const ModeEntry& entry = init.modes[e];
            const int axis = static_cast<int>(e) % dim;
            const double phase = two_pi * uniform01(rng);
            const double k = dk * entry.mode;
            auto u_values = u.comp(axis);
            for (std::size_t idx = 0; idx < rho_values.size(); ++idx) {
                const int i = dim == 1 ? static_cast<int>(idx) : static_cast<int>(idx) / n;
                const int j = dim == 1 ? 0 : static_cast<int>(idx) % n;
                const double x = axis == 0 ? grid->coord(i) : grid->coord(j);
                rho_values[idx] += init.amplitude * entry.rho_coeff * std::cos(k * x + phase);
                u_values[idx] += init.amplitude * entry.u_coeff * std::sin(k * x + phase);
            }
        }
    } else {
        Field profile = mollify(base_profile(grid, init), init.mollify_scale, ops);
        auto rho_values = rho.comp(0);
        auto p = profile.comp(0);
        for (std::size_t i = 0; i < rho_values.size(); ++i)
            rho_values[i] = params.rho_bar + init.amplitude * p[i];
    }
    return State(0.0, std::move(rho), std::move(u));
}

}  // namespace nsk
