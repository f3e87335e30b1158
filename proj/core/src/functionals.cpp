#include "nsk/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nsk {

void OrliczSpec::validate() const {
    if (!(p > 1.0)) throw std::invalid_argument("OrliczSpec: p must exceed 1");
    if (!(q > 1.0)) throw std::invalid_argument("OrliczSpec: q must exceed 1");
    if (!(delta > 0.0)) throw std::invalid_argument("OrliczSpec: delta must be positive");
}

double OrliczSpec::psi(double x) const {
    if (x <= 1.0) return std::pow(x, p);
    return (p / q) * std::pow(x, q) + 1.0 - p / q;
}

void CutoffSpec::validate(int dim) const {
    if (kind == Kind::Ones) return;
    if (static_cast<int>(center.size()) != dim)
        throw std::invalid_argument("CutoffSpec: center size must match dim");
    if (!(radius > 0.0)) throw std::invalid_argument("CutoffSpec: radius must be positive");
}

namespace {

// C-inf transition: 0 for t <= 0, 1 for t >= 1.
double smooth_step(double t) {
    auto g = [](double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; };
    const double a = g(t);
    const double b = g(1.0 - t);
    return a / (a + b);
}

double periodic_distance_sq(const Grid& grid, std::size_t idx,
                            std::span<const double> center) {
    const double L = grid.length();
    auto axis_dist = [L](double x, double c) {
        double d = std::fmod(std::abs(x - c), L);
        if (d > 0.5 * L) d = L - d;
        return d;
    };
    if (grid.dim() == 1) {
        const double d = axis_dist(grid.coord(static_cast<int>(idx)), center[0]);
        return d * d;
    }
    const int n = grid.n();
    const int i = static_cast<int>(idx) / n;
    const int j = static_cast<int>(idx) % n;
    const double dx0 = axis_dist(grid.coord(i), center[0]);
    const double dx1 = axis_dist(grid.coord(j), center[1]);
    return dx0 * dx0 + dx1 * dx1;
}

}  // namespace

Field build_cutoff(const CutoffSpec& spec, GridPtr grid) {
    spec.validate(grid->dim());
    Field phi = Field::scalar(grid);
    auto values = phi.comp(0);
    if (spec.kind == CutoffSpec::Kind::Ones) {
        std::fill(values.begin(), values.end(), 1.0);
        return phi;
    }
    if (2.0 * spec.radius >= grid->length())
        throw std::invalid_argument("CutoffSpec: bump support must fit in the torus");
    for (std::size_t idx = 0; idx < values.size(); ++idx) {
        const double r = std::sqrt(periodic_distance_sq(*grid, idx, spec.center)) / spec.radius;
        values[idx] = r >= 1.0 ? 0.0 : (r <= 0.5 ? 1.0 : smooth_step(2.0 * (1.0 - r)));
    }
    return phi;
}

GammaPotentials gamma_potentials(double s, const PhysParams& params) {
    if (s < 0.0) throw std::invalid_argument("gamma_potentials: density sample must be >= 0");
    const double g = params.gamma;
    const double rb = params.rho_bar;
    GammaPotentials out;
    out.P = params.a * std::pow(s, g);
    out.Pi = params.a / (g - 1.0) * (std::pow(s, g) - g * std::pow(rb, g - 1.0) * s);
    out.j = std::pow(s, g) + (g - 1.0) * std::pow(rb, g) - g * std::pow(rb, g - 1.0) * s;
    return out;
}

double j_gamma(double s, const PhysParams& params) { return gamma_potentials(s, params).j; }

double total_energy(const State& state, const PhysParams& params, const SpectralOps& ops) {
    const Grid& grid = state.rho.grid();
    auto rho = state.rho.comp(0);
    double sum = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        double usq = 0.0;
        for (int c = 0; c < state.u.components(); ++c) {
            const double v = state.u.value(c, i);
            usq += v * v;
        }
        sum += 0.5 * rho[i] * usq + params.a / (params.gamma - 1.0) * j_gamma(rho[i], params);
    }
    Field grad = ops.gradient(state.rho);
    double grad_sq = 0.0;
    for (int c = 0; c < grad.components(); ++c)
        for (double v : grad.comp(c)) grad_sq += v * v;
    return (sum + 0.5 * params.kappa * grad_sq) * grid.cell_volume();
}

double dissipation_rate(const State& state, const PhysParams& params, const SpectralOps& ops) {
    const Grid& grid = state.u.grid();
    const int dim = grid.dim();
    double du_sq = 0.0;
    Field div = Field::scalar(state.u.grid_ptr());
    for (int c = 0; c < dim; ++c) {
        Field comp = Field::scalar(state.u.grid_ptr());
        std::copy(state.u.comp(c).begin(), state.u.comp(c).end(), comp.comp(0).begin());
        for (int axis = 0; axis < dim; ++axis) {
            Field d = ops.derivative(comp, axis);
            for (double v : d.comp(0)) du_sq += v * v;
            if (axis == c) {
                auto out = div.comp(0);
                auto in = d.comp(0);
                for (std::size_t i = 0; i < out.size(); ++i) out[i] += in[i];
            }
        }
    }
    double div_sq = 0.0;
    for (double v : div.comp(0)) div_sq += v * v;
    return (params.mu * du_sq + params.xi() * div_sq) * grid.cell_volume();
}

double orlicz_modular(const Field& f, const OrliczSpec& spec, double t) {
    double sum = 0.0;
    for (int c = 0; c < f.components(); ++c)
        for (double v : f.comp(c)) sum += spec.psi(std::abs(v) / t);
    return sum * f.grid().cell_volume();
}

double orlicz_norm(const Field& f, const OrliczSpec& spec) {
    spec.validate();
    const double fmax = max_abs(f);
    if (fmax == 0.0) return 0.0;

    // Bracket the root of modular(t) = 1; the modular is non-increasing in t.
    double hi = fmax;
    while (orlicz_modular(f, spec, hi) > 1.0) hi *= 2.0;
    double lo = hi;
    while (orlicz_modular(f, spec, lo) < 1.0) {
        lo *= 0.5;
        if (lo < fmax * 1e-300) return 0.0;  // modular never reaches 1: measure-zero support
    }
    for (int iter = 0; iter < 200 && (hi - lo) > 1e-12 * hi; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (orlicz_modular(f, spec, mid) > 1.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

OrliczSplit orlicz_split(const Field& f, const OrliczSpec& spec) {
    spec.validate();
    OrliczSplit out{Field(f.grid_ptr(), f.components()), Field(f.grid_ptr(), f.components()), 0.0, 0.0};
    double small_sum = 0.0;
    double large_sum = 0.0;
    for (int c = 0; c < f.components(); ++c) {
        auto in = f.comp(c);
        auto small = out.small_part.comp(c);
        auto large = out.large_part.comp(c);
        for (std::size_t i = 0; i < in.size(); ++i) {
            if (std::abs(in[i]) <= spec.delta) {
                small[i] = in[i];
                small_sum += std::pow(std::abs(in[i]), spec.p);
            } else {
                large[i] = in[i];
                large_sum += std::pow(std::abs(in[i]), spec.q);
            }
        }
    }
    const double dv = f.grid().cell_volume();
    out.small_lp = std::pow(small_sum * dv, 1.0 / spec.p);
    out.large_lq = std::pow(large_sum * dv, 1.0 / spec.q);
    return out;
}

double sup_inverse_density(const Field& rho, bool* vacuum) {
    if (vacuum) *vacuum = false;
    const double min_rho = min_value(rho, 0);
    if (min_rho <= 0.0) {
        if (vacuum) *vacuum = true;
        return std::numeric_limits<double>::infinity();
    }
    return 1.0 / min_rho;
}

double h1_deviation(const Field& rho, double rho_bar, const SpectralOps& ops) {
    Field dev = Field::scalar(rho.grid_ptr());
    auto in = rho.comp(0);
    auto out = dev.comp(0);
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] - rho_bar;
    return ops.sobolev_norm(dev, 1.0, /*homogeneous=*/false);
}

double time_l2(std::span<const double> times, std::span<const double> values) {
    if (times.size() != values.size())
        throw std::invalid_argument("time_l2: size mismatch");
    if (times.empty()) throw std::invalid_argument("time_l2: empty series");
    if (times.size() == 1) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
        const double dt = times[i + 1] - times[i];
        sum += 0.5 * dt * (values[i] * values[i] + values[i + 1] * values[i + 1]);
    }
    return std::sqrt(sum);
}

double gain_norm_series(std::span<const State> samples, const Field& cutoff, double s,
                        const SpectralOps& ops) {
    if (samples.empty()) throw std::invalid_argument("gain_norm_series: empty trajectory");
    std::vector<double> times(samples.size());
    std::vector<double> norms(samples.size());
    Field phirho2 = Field::scalar(samples[0].rho.grid_ptr());
    for (std::size_t k = 0; k < samples.size(); ++k) {
        auto rho = samples[k].rho.comp(0);
        auto phi = cutoff.comp(0);
        auto out = phirho2.comp(0);
        for (std::size_t i = 0; i < rho.size(); ++i) out[i] = phi[i] * rho[i] * rho[i];
        times[k] = samples[k].t;
        norms[k] = ops.sobolev_norm(phirho2, 1.0 + 0.5 * s, /*homogeneous=*/false);
    }
    return time_l2(times, norms);
}

void DiagnosticsConfig::validate(int dim) const {
    for (double s : s_values)
        if (s < 0.0 || s >= 2.0)
            throw std::invalid_argument("DiagnosticsConfig: s_values must lie in [0, 2)");
    if (sample_every < 1)
        throw std::invalid_argument("DiagnosticsConfig: sample_every must be >= 1");
    cutoff.validate(dim);
    orlicz.validate();
}

}  // namespace nsk
