#include "qclock/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qclock {

Grid1D make_grid(double y_min, double y_max, std::size_t n_points)
{
    if (!std::isfinite(y_min) || !std::isfinite(y_max))
        throw std::invalid_argument("make_grid: non-finite bounds");
    if (!(y_min < y_max))
        throw std::invalid_argument("make_grid: require y_min < y_max");
    if (n_points < kMinGridPoints)
        throw std::invalid_argument("make_grid: need at least " + std::to_string(kMinGridPoints) + " points");
    Grid1D g;
    g.y_min = y_min;
    g.y_max = y_max;
    g.n_points = n_points;
    g.dy = (y_max - y_min) / static_cast<double>(n_points - 1);
    return g;
}

Grid1D make_grid_spacing(double y_min, double dy, std::size_t n_points)
{
    if (!std::isfinite(y_min) || !std::isfinite(dy) || !(dy > 0.0))
        throw std::invalid_argument("make_grid_spacing: invalid origin or spacing");
    if (n_points < kMinGridPoints)
        throw std::invalid_argument("make_grid_spacing: need at least " + std::to_string(kMinGridPoints) + " points");
    Grid1D g;
    g.y_min = y_min;
    g.dy = dy;
    g.n_points = n_points;
    g.y_max = g.node(n_points - 1);
    return g;
}

void validate(const PacketSpec& spec)
{
    if (!(spec.sigma_y > 0.0) || !std::isfinite(spec.sigma_y))
        throw std::invalid_argument("packet: sigma_y must be positive");
    if (!(spec.k0 > 0.0) || !std::isfinite(spec.k0))
        throw std::invalid_argument("packet: k0 must be positive");
    if (!std::isfinite(spec.y0))
        throw std::invalid_argument("packet: y0 must be finite");
    const auto& n = spec.spin_axis;
    const double len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
    if (std::abs(len - 1.0) > 1e-12)
        throw std::invalid_argument("packet: spin_axis must be a unit vector");
    if (spec.spin_sign != 1 && spec.spin_sign != -1)
        throw std::invalid_argument("packet: spin_sign must be +1 or -1");
}

std::array<cplx, 2> spin_eigenvector(const Vec3& axis, int sign)
{
    const double s = sign >= 0 ? 1.0 : -1.0;
    const double nx = axis[0], ny = axis[1], nz = axis[2];
    // Two candidate (unnormalized) eigenvectors of n.sigma for eigenvalue s;
    // pick the better-conditioned one.
    std::array<cplx, 2> a{cplx(s + nz, 0.0), cplx(nx, ny)};
    std::array<cplx, 2> b{cplx(nx, -ny), cplx(s - nz, 0.0)};
    auto sq = [](const std::array<cplx, 2>& v) { return std::norm(v[0]) + std::norm(v[1]); };
    std::array<cplx, 2> v = sq(a) >= sq(b) ? a : b;
    const double len = std::sqrt(sq(v));
    v[0] /= len;
    v[1] /= len;
    const cplx lead = std::abs(v[0]) > 1e-14 ? v[0] : v[1];
    const cplx phase = std::conj(lead) / std::abs(lead);
    v[0] *= phase;
    v[1] *= phase;
    if (std::abs(v[0]) <= 1e-14) v[0] = 0.0;
    return v;
}

SpinorField init_gaussian(const Grid1D& grid, const PacketSpec& spec)
{
    validate(spec);
    const double margin = kTailSigmas * spec.sigma_y;
    if (spec.y0 - grid.y_min < margin || grid.y_max - spec.y0 < margin)
        throw std::invalid_argument("init_gaussian: packet tails reach the boundary (need 8 sigma_y clearance)");

    const auto chi = spin_eigenvector(spec.spin_axis, spec.spin_sign);
    const double amp = 1.0 / std::pow(2.0 * std::numbers::pi * spec.sigma_y * spec.sigma_y, 0.25);
    const double inv4s2 = 1.0 / (4.0 * spec.sigma_y * spec.sigma_y);

    SpinorField field(grid);
    for (std::size_t j = 0; j < grid.n_points; ++j) {
        const double y = grid.node(j);
        const double d = y - spec.y0;
        const cplx psi = amp * std::exp(-d * d * inv4s2) * std::polar(1.0, spec.k0 * y);
        field.up[j] = psi * chi[0];
        field.down[j] = psi * chi[1];
    }
    normalize(field);
    return field;
}

double integrate_nodal(const Grid1D& grid, std::span<const double> values, double lo, double hi)
{
    if (values.size() != grid.n_points)
        throw std::invalid_argument("integrate_nodal: size mismatch");
    const double tol = 1e-12 * (grid.y_max - grid.y_min);
    if (!(lo < hi) || lo < grid.y_min - tol || hi > grid.y_max + tol)
        throw std::invalid_argument("integrate_nodal: window outside the grid");
    lo = std::max(lo, grid.y_min);
    hi = std::min(hi, grid.y_max);

    const std::size_t last_cell = grid.n_points - 2;
    auto cell_of = [&](double y) {
        const double x = (y - grid.y_min) / grid.dy;
        const auto c = static_cast<std::size_t>(std::max(0.0, std::floor(x)));
        return std::min(c, last_cell);
    };
    // Integral of the linear interpolant on cell c between local coords a, b in [0,1].
    auto partial = [&](std::size_t c, double a, double b) {
        const double f0 = values[c], f1 = values[c + 1];
        const double slope = f1 - f0;
        return grid.dy * ((b - a) * f0 + 0.5 * slope * (b * b - a * a));
    };
    auto local = [&](std::size_t c, double y) {
        return std::clamp((y - grid.node(c)) / grid.dy, 0.0, 1.0);
    };

    const std::size_t c_lo = cell_of(lo);
    const std::size_t c_hi = cell_of(hi);
    if (c_lo == c_hi) return partial(c_lo, local(c_lo, lo), local(c_lo, hi));

    double sum = partial(c_lo, local(c_lo, lo), 1.0);
    double inner = 0.0;
    for (std::size_t c = c_lo + 1; c < c_hi; ++c)
        inner += values[c] + values[c + 1];
    sum += 0.5 * grid.dy * inner;
    sum += partial(c_hi, 0.0, local(c_hi, hi));
    return sum;
}

std::vector<double> density(const SpinorField& field)
{
    std::vector<double> rho(field.grid.n_points);
    for (std::size_t j = 0; j < rho.size(); ++j)
        rho[j] = std::norm(field.up[j]) + std::norm(field.down[j]);
    return rho;
}

double norm(const SpinorField& field, double y_lo, double y_hi)
{
    const auto rho = density(field);
    return integrate_nodal(field.grid, rho, y_lo, y_hi);
}

double norm(const SpinorField& field)
{
    return norm(field, field.grid.y_min, field.grid.y_max);
}

void normalize(SpinorField& field)
{
    const double n = norm(field);
    if (!(n > 0.0) || !std::isfinite(n))
        throw std::invalid_argument("normalize: field has zero or non-finite norm");
    const double s = 1.0 / std::sqrt(n);
    for (auto& v : field.up) v *= s;
    for (auto& v : field.down) v *= s;
}

}  // namespace qclock
