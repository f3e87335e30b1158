/// @file spectral.hpp
/// Fourier-multiplier operators on periodic grids: derivatives, fractional
/// powers Lambda^s (symbol |k|^s), Riesz transforms (symbol i*k_i/|k|),
/// inverse Laplacian, 2/3 dealiasing, and Sobolev norms.

#pragma once

#include <complex>
#include <functional>
#include <memory>

#include "nsk/grid.hpp"

namespace nsk {

/// Diagonal operator in Fourier space. The symbol must be Hermitian
/// (sigma(-k) = conj(sigma(k))) so real fields map to real fields; symbols
/// built from |k| and i*k components satisfy this by construction.
struct Multiplier {
    /// Evaluated per nonzero mode; k is the wavenumber vector, kmag = |k|.
    std::function<std::complex<double>(std::span<const double> k, double kmag)> symbol;
    /// Value multiplying the k = 0 coefficient (homogeneous negative-order
    /// operators send the mean to zero).
    std::complex<double> zero_mode{0.0, 0.0};
    /// Odd symbols must annihilate the unpaired Nyquist modes to keep real
    /// fields real.
    bool zero_nyquist = false;
};

/// Transform workspace bound to one grid. Construction plans FFTs (guarded by
/// a global mutex); execution reuses internal scratch, so an instance must not
/// be shared between threads. Create one per run/thread.
class SpectralOps {
public:
    explicit SpectralOps(GridPtr grid);
    ~SpectralOps();
    SpectralOps(const SpectralOps&) = delete;
    SpectralOps& operator=(const SpectralOps&) = delete;

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }

    using Coeffs = std::vector<std::complex<double>>;

    /// Forward transform, normalized so coefficients are Fourier coefficients:
    /// f(x) = sum_k fhat_k exp(i k.x). Throws on non-finite input.
    Coeffs analyze(std::span<const double> values) const;

    /// Inverse transform onto a real field; the imaginary residue (max |Im|)
    /// can be queried to audit Hermitian symmetry.
    void synthesize(const Coeffs& coeffs, std::span<double> out,
                    double* imag_residue = nullptr) const;

    /// Apply a diagonal multiplier componentwise.
    Field apply(const Field& f, const Multiplier& m) const;

    Field derivative(const Field& f, int axis) const;
    Field gradient(const Field& scalar) const;
    Field divergence(const Field& vec) const;
    Field laplacian(const Field& f) const;

    /// Lambda^s. For s < 0 the input must be mean-free (the zero mode has no
    /// meaning); a nonzero mean raises std::domain_error.
    Field fractional_power(const Field& f, double s) const;

    /// R_axis = d_axis Lambda^{-1}; annihilates the mean, sum_i R_i R_i = -Id
    /// on mean-free fields.
    Field riesz_transform(const Field& f, int axis) const;

    struct PoissonResult {
        Field solution;
        double removed_mean = 0.0;  ///< mean subtracted from the source
    };
    /// Solves laplacian(u) = f - mean(f) with mean-free u.
    PoissonResult solve_poisson(const Field& f) const;

    /// Zero every mode with any |m_axis| > n/3; idempotent.
    Field dealias(const Field& f) const;
    int dealias_cutoff() const { return grid_->n() / 3; }

    /// Inhomogeneous: (measure * sum_k (1+|k|^2)^s |fhat_k|^2)^{1/2}, which
    /// equals the quadrature L2 norm at s = 0 (Parseval). Homogeneous uses
    /// |k|^{2s} and skips the zero mode. Multi-component fields sum over
    /// components.
    double sobolev_norm(const Field& f, double s, bool homogeneous = false) const;

private:
    GridPtr grid_;
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace nsk
