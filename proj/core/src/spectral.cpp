#include "nsk/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>

namespace nsk {

namespace {

// FFTW planning is not thread-safe; execution on private buffers is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

struct SpectralOps::Impl {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
    fftw_complex* in = nullptr;
    fftw_complex* out = nullptr;
    std::size_t size = 0;

    explicit Impl(const Grid& g) {
        size = g.points();
        in = fftw_alloc_complex(size);
        out = fftw_alloc_complex(size);
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (g.dim() == 1) {
            forward = fftw_plan_dft_1d(g.n(), in, out, FFTW_FORWARD, FFTW_ESTIMATE);
            backward = fftw_plan_dft_1d(g.n(), in, out, FFTW_BACKWARD, FFTW_ESTIMATE);
        } else {
            forward = fftw_plan_dft_2d(g.n(), g.n(), in, out, FFTW_FORWARD, FFTW_ESTIMATE);
            backward = fftw_plan_dft_2d(g.n(), g.n(), in, out, FFTW_BACKWARD, FFTW_ESTIMATE);
        }
    }

    ~Impl() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(forward);
        fftw_destroy_plan(backward);
        fftw_free(in);
        fftw_free(out);
    }
};

SpectralOps::SpectralOps(GridPtr grid) : grid_(std::move(grid)) {
    if (!grid_) throw std::invalid_argument("SpectralOps: null grid");
    impl_ = std::make_unique<Impl>(*grid_);
}

SpectralOps::~SpectralOps() = default;

SpectralOps::Coeffs SpectralOps::analyze(std::span<const double> values) const {
    if (values.size() != impl_->size)
        throw std::invalid_argument("SpectralOps::analyze: size mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i]))
            throw std::invalid_argument("SpectralOps::analyze: non-finite sample");
        impl_->in[i][0] = values[i];
        impl_->in[i][1] = 0.0;
    }
    fftw_execute(impl_->forward);
    Coeffs coeffs(impl_->size);
    const double scale = 1.0 / static_cast<double>(impl_->size);
    for (std::size_t i = 0; i < coeffs.size(); ++i)
        coeffs[i] = {impl_->out[i][0] * scale, impl_->out[i][1] * scale};
    return coeffs;
}

void SpectralOps::synthesize(const Coeffs& coeffs, std::span<double> out,
                             double* imag_residue) const {
    if (coeffs.size() != impl_->size || out.size() != impl_->size)
        throw std::invalid_argument("SpectralOps::synthesize: size mismatch");
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        impl_->in[i][0] = coeffs[i].real();
        impl_->in[i][1] = coeffs[i].imag();
    }
    fftw_execute(impl_->backward);
    double residue = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = impl_->out[i][0];
        residue = std::max(residue, std::abs(impl_->out[i][1]));
    }
    if (imag_residue) *imag_residue = residue;
}

Field SpectralOps::apply(const Field& f, const Multiplier& m) const {
    const Grid& g = *grid_;
    const int n = g.n();
    const auto k = g.wavenumbers();
    Field result(f.grid_ptr(), f.components());
    for (int c = 0; c < f.components(); ++c) {
        Coeffs coeffs = analyze(f.comp(c));
        if (g.dim() == 1) {
            for (int i = 0; i < n; ++i) {
                if (i == 0) {
                    coeffs[0] *= m.zero_mode;
                } else if (m.zero_nyquist && i == n / 2) {
                    coeffs[i] = 0.0;
                } else {
                    const double kv[1] = {k[i]};
                    coeffs[i] *= m.symbol(std::span<const double>(kv, 1), std::abs(k[i]));
                }
            }
        } else {
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    const std::size_t idx = g.index(i, j);
                    if (i == 0 && j == 0) {
                        coeffs[idx] *= m.zero_mode;
                    } else if (m.zero_nyquist && (i == n / 2 || j == n / 2)) {
                        coeffs[idx] = 0.0;
                    } else {
                        const double kv[2] = {k[i], k[j]};
                        coeffs[idx] *= m.symbol(std::span<const double>(kv, 2),
                                                std::hypot(k[i], k[j]));
                    }
                }
            }
        }
        synthesize(coeffs, result.comp(c));
    }
    return result;
}

Field SpectralOps::derivative(const Field& f, int axis) const {
    if (axis < 0 || axis >= grid_->dim())
        throw std::invalid_argument("derivative: axis out of range");
    Multiplier m;
    m.zero_nyquist = true;
    m.symbol = [axis](std::span<const double> k, double) {
        return std::complex<double>(0.0, k[axis]);
    };
    return apply(f, m);
}

Field SpectralOps::gradient(const Field& scalar) const {
    if (scalar.components() != 1)
        throw std::invalid_argument("gradient: expects a scalar field");
    Field result = Field::vector(scalar.grid_ptr());
    for (int axis = 0; axis < grid_->dim(); ++axis) {
        Field d = derivative(scalar, axis);
        std::copy(d.comp(0).begin(), d.comp(0).end(), result.comp(axis).begin());
    }
    return result;
}

Field SpectralOps::divergence(const Field& vec) const {
    if (vec.components() != grid_->dim())
        throw std::invalid_argument("divergence: expects a vector field");
    Field result = Field::scalar(vec.grid_ptr());
    for (int axis = 0; axis < grid_->dim(); ++axis) {
        Field scalar_axis = Field::scalar(vec.grid_ptr());
        std::copy(vec.comp(axis).begin(), vec.comp(axis).end(), scalar_axis.comp(0).begin());
        Field d = derivative(scalar_axis, axis);
        auto out = result.comp(0);
        auto in = d.comp(0);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += in[i];
    }
    return result;
}

Field SpectralOps::laplacian(const Field& f) const {
    Multiplier m;
    m.symbol = [](std::span<const double>, double kmag) {
        return std::complex<double>(-kmag * kmag, 0.0);
    };
    return apply(f, m);
}

Field SpectralOps::fractional_power(const Field& f, double s) const {
    if (s == 0.0) return f;
    if (s < 0.0) {
        for (int c = 0; c < f.components(); ++c) {
            const double mean = field_mean(f, c);
            if (std::abs(mean) > 1e-12 * std::max(1.0, max_abs(f)))
                throw std::domain_error(
                    "fractional_power: negative order requires a mean-free field");
        }
    }
    Multiplier m;
    m.symbol = [s](std::span<const double>, double kmag) {
        return std::complex<double>(std::pow(kmag, s), 0.0);
    };
    return apply(f, m);
}

Field SpectralOps::riesz_transform(const Field& f, int axis) const {
    if (axis < 0 || axis >= grid_->dim())
        throw std::invalid_argument("riesz_transform: axis out of range");
    Multiplier m;
    m.zero_nyquist = true;
    m.symbol = [axis](std::span<const double> k, double kmag) {
        return std::complex<double>(0.0, k[axis] / kmag);
    };
    return apply(f, m);
}

SpectralOps::PoissonResult SpectralOps::solve_poisson(const Field& f) const {
    if (f.components() != 1)
        throw std::invalid_argument("solve_poisson: expects a scalar field");
    Multiplier m;
    m.symbol = [](std::span<const double>, double kmag) {
        return std::complex<double>(-1.0 / (kmag * kmag), 0.0);
    };
    PoissonResult result{apply(f, m), field_mean(f, 0)};
    return result;
}

Field SpectralOps::dealias(const Field& f) const {
    const Grid& g = *grid_;
    const int n = g.n();
    const int cutoff = dealias_cutoff();
    Field result(f.grid_ptr(), f.components());
    for (int c = 0; c < f.components(); ++c) {
        Coeffs coeffs = analyze(f.comp(c));
        if (g.dim() == 1) {
            for (int i = 0; i < n; ++i)
                if (std::abs(g.mode(i)) > cutoff) coeffs[i] = 0.0;
        } else {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (std::abs(g.mode(i)) > cutoff || std::abs(g.mode(j)) > cutoff)
                        coeffs[g.index(i, j)] = 0.0;
        }
        synthesize(coeffs, result.comp(c));
    }
    return result;
}

double SpectralOps::sobolev_norm(const Field& f, double s, bool homogeneous) const {
    const Grid& g = *grid_;
    const int n = g.n();
    const auto k = g.wavenumbers();
    double sum = 0.0;
    for (int c = 0; c < f.components(); ++c) {
        Coeffs coeffs = analyze(f.comp(c));
        if (g.dim() == 1) {
            for (int i = 0; i < n; ++i) {
                const double k2 = k[i] * k[i];
                if (homogeneous && i == 0) continue;
                const double w = homogeneous ? std::pow(k2, s) : std::pow(1.0 + k2, s);
                sum += w * std::norm(coeffs[i]);
            }
        } else {
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    const double k2 = k[i] * k[i] + k[j] * k[j];
                    if (homogeneous && i == 0 && j == 0) continue;
                    const double w = homogeneous ? std::pow(k2, s) : std::pow(1.0 + k2, s);
                    sum += w * std::norm(coeffs[g.index(i, j)]);
                }
            }
        }
    }
    return std::sqrt(sum * g.measure());
}

}  // namespace nsk
