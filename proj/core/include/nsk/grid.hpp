/// @file grid.hpp
/// Periodic tensor grids, sampled fields, physical parameters, and state
/// validation for the capillary compressible solver.

#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsk {

class Grid;
using GridPtr = std::shared_ptr<const Grid>;

/// Uniform periodic grid on [0, L)^dim, dim in {1, 2}, n a power of two.
///
/// Wavenumbers are stored per axis in FFT order (modes 0..n/2-1, -n/2..-1),
/// k_m = 2*pi*m/L, so the signed mode set is {-n/2, ..., n/2-1}.
class Grid {
public:
    static GridPtr make(int dim, int n, double length);

    int dim() const { return dim_; }
    int n() const { return n_; }
    double length() const { return length_; }
    double dx() const { return length_ / n_; }
    double measure() const { return dim_ == 1 ? length_ : length_ * length_; }
    double cell_volume() const { return dim_ == 1 ? dx() : dx() * dx(); }
    std::size_t points() const { return points_; }

    /// Per-axis wavenumber table in FFT storage order, size n.
    std::span<const double> wavenumbers() const { return wavenumbers_; }

    /// Signed integer mode of a storage index.
    int mode(int index) const { return index < n_ / 2 ? index : index - n_; }

    double coord(int index) const { return index * dx(); }

    /// Flat row-major index; axis 0 is the slow dimension.
    std::size_t index(int i, int j = 0) const {
        return dim_ == 1 ? static_cast<std::size_t>(i)
                         : static_cast<std::size_t>(i) * n_ + j;
    }

private:
    Grid(int dim, int n, double length);

    int dim_;
    int n_;
    double length_;
    std::size_t points_;
    std::vector<double> wavenumbers_;
};

/// Real samples on a grid. Component count is 1 (scalar) or dim (vector);
/// each component is a contiguous block.
class Field {
public:
    Field(GridPtr grid, int components);

    static Field scalar(GridPtr grid) { return Field(std::move(grid), 1); }
    static Field vector(GridPtr grid);

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    int components() const { return components_; }
    std::size_t points() const { return grid_->points(); }

    std::span<double> comp(int c);
    std::span<const double> comp(int c) const;

    double& value(int c, std::size_t i) { return data_[static_cast<std::size_t>(c) * points() + i]; }
    double value(int c, std::size_t i) const { return data_[static_cast<std::size_t>(c) * points() + i]; }

private:
    GridPtr grid_;
    int components_;
    std::vector<double> data_;
};

/// Coefficients of the isothermal Korteweg system with gamma-law pressure
/// P(rho) = a*rho^gamma.
struct PhysParams {
    double mu = 0.1;       ///< shear viscosity, > 0
    double lambda = 0.0;   ///< second viscosity, 2*mu + lambda > 0
    double kappa = 0.01;   ///< capillarity, > 0
    double a = 1.0;        ///< pressure constant, > 0
    double gamma = 2.0;    ///< adiabatic exponent, > 1
    double rho_bar = 1.0;  ///< reference density, > 0

    double xi() const { return mu + lambda; }
    void validate() const;
};

/// Density and velocity at one time instant.
struct State {
    double t = 0.0;
    Field rho;
    Field u;

    State(double time, Field density, Field velocity);
};

/// Outcome of a positivity/finiteness check. Structural problems (grid
/// mismatch, non-finite samples) throw instead of reporting.
struct StateReport {
    bool ok = true;
    double min_rho = 0.0;
    std::vector<std::size_t> violations;  ///< flat indices with rho < floor
};

StateReport validate_state(const State& state, double floor);

// Rectangle-rule quadrature and pointwise reductions.
double integrate(std::span<const double> values, const Grid& grid);
double integrate(const Field& f, int comp = 0);
double field_mean(const Field& f, int comp = 0);
double min_value(const Field& f, int comp = 0);
double max_abs(const Field& f);
bool all_finite(const Field& f);
/// sqrt of the quadrature of the squared magnitude over all components.
double l2_norm(const Field& f);

}  // namespace nsk
