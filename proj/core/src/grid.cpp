#include "nsk/grid.hpp"

#include <algorithm>
#include <numbers>

namespace nsk {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

Grid::Grid(int dim, int n, double length) : dim_(dim), n_(n), length_(length) {
    points_ = dim == 1 ? static_cast<std::size_t>(n)
                       : static_cast<std::size_t>(n) * n;
    wavenumbers_.resize(n);
    const double dk = 2.0 * std::numbers::pi / length;
    for (int i = 0; i < n; ++i) wavenumbers_[i] = dk * mode(i);
}

GridPtr Grid::make(int dim, int n, double length) {
    if (dim != 1 && dim != 2)
        throw std::invalid_argument("Grid: dim must be 1 or 2, got " + std::to_string(dim));
    if (!is_power_of_two(n) || n < 8)
        throw std::invalid_argument("Grid: n must be a power of two >= 8, got " + std::to_string(n));
    if (!(length > 0.0) || !std::isfinite(length))
        throw std::invalid_argument("Grid: length must be positive and finite");
    return GridPtr(new Grid(dim, n, length));
}

Field::Field(GridPtr grid, int components) : grid_(std::move(grid)), components_(components) {
    if (!grid_) throw std::invalid_argument("Field: null grid");
    if (components_ != 1 && components_ != grid_->dim())
        throw std::invalid_argument("Field: component count must be 1 or dim");
    data_.assign(static_cast<std::size_t>(components_) * grid_->points(), 0.0);
}

Field Field::vector(GridPtr grid) {
    const int d = grid->dim();
    return Field(std::move(grid), d);
}

std::span<double> Field::comp(int c) {
    return {data_.data() + static_cast<std::size_t>(c) * points(), points()};
}

std::span<const double> Field::comp(int c) const {
    return {data_.data() + static_cast<std::size_t>(c) * points(), points()};
}

void PhysParams::validate() const {
    if (!(mu > 0.0)) throw std::invalid_argument("PhysParams: mu must be positive");
    if (!(2.0 * mu + lambda > 0.0))
        throw std::invalid_argument("PhysParams: 2*mu + lambda must be positive");
    if (!(kappa > 0.0)) throw std::invalid_argument("PhysParams: kappa must be positive");
    if (!(a > 0.0)) throw std::invalid_argument("PhysParams: a must be positive");
    if (!(gamma > 1.0)) throw std::invalid_argument("PhysParams: gamma must exceed 1");
    if (!(rho_bar > 0.0)) throw std::invalid_argument("PhysParams: rho_bar must be positive");
}

State::State(double time, Field density, Field velocity)
    : t(time), rho(std::move(density)), u(std::move(velocity)) {
    if (rho.components() != 1) throw std::invalid_argument("State: rho must be scalar");
    if (u.components() != u.grid().dim())
        throw std::invalid_argument("State: u must have dim components");
}

StateReport validate_state(const State& state, double floor) {
    if (&state.rho.grid() != &state.u.grid())
        throw std::invalid_argument("validate_state: rho and u live on different grids");
    if (!all_finite(state.rho) || !all_finite(state.u))
        throw std::invalid_argument("validate_state: non-finite sample");

    StateReport report;
    auto rho = state.rho.comp(0);
    report.min_rho = rho[0];
    for (std::size_t i = 0; i < rho.size(); ++i) {
        report.min_rho = std::min(report.min_rho, rho[i]);
        if (rho[i] < floor) report.violations.push_back(i);
    }
    report.ok = report.violations.empty();
    return report;
}

double integrate(std::span<const double> values, const Grid& grid) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum * grid.cell_volume();
}

double integrate(const Field& f, int comp) { return integrate(f.comp(comp), f.grid()); }

double field_mean(const Field& f, int comp) { return integrate(f, comp) / f.grid().measure(); }

double min_value(const Field& f, int comp) {
    auto v = f.comp(comp);
    return *std::min_element(v.begin(), v.end());
}

double max_abs(const Field& f) {
    double m = 0.0;
    for (int c = 0; c < f.components(); ++c)
        for (double v : f.comp(c)) m = std::max(m, std::abs(v));
    return m;
}

bool all_finite(const Field& f) {
    for (int c = 0; c < f.components(); ++c)
        for (double v : f.comp(c))
            if (!std::isfinite(v)) return false;
    return true;
}

double l2_norm(const Field& f) {
    double sum = 0.0;
    for (int c = 0; c < f.components(); ++c)
        for (double v : f.comp(c)) sum += v * v;
    return std::sqrt(sum * f.grid().cell_volume());
}

}  // namespace nsk
