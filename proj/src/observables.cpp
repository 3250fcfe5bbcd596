#include "qclock/observables.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "qclock/errors.hpp"
#include "qclock/fields.hpp"

namespace qclock {

namespace {

void check_cut(const Grid1D& g, double y_cut)
{
    if (!(y_cut >= g.y_min) || !(y_cut < g.y_max))
        throw std::invalid_argument("y_cut lies outside the grid");
}

}  // namespace

SpinExpectations spin_expectations(const SpinorField& field, double y_cut)
{
    const auto& g = field.grid;
    check_cut(g, y_cut);
    std::vector<double> rho(g.n_points), sx(g.n_points), sy(g.n_points), sz(g.n_points);
    for (std::size_t j = 0; j < g.n_points; ++j) {
        const cplx c = std::conj(field.up[j]) * field.down[j];
        const double pu = std::norm(field.up[j]);
        const double pd = std::norm(field.down[j]);
        rho[j] = pu + pd;
        sx[j] = 2.0 * c.real();
        sy[j] = 2.0 * c.imag();
        sz[j] = pu - pd;
    }
    SpinExpectations s;
    s.region_norm = integrate_nodal(g, rho, y_cut, g.y_max);
    if (!(s.region_norm >= kMinRegionNorm))
        throw NoTransmission("no transmitted amplitude beyond y_cut (region norm " +
                             std::to_string(s.region_norm) + ")");
    const double scale = 0.5 / s.region_norm;
    s.sx = scale * integrate_nodal(g, sx, y_cut, g.y_max);
    s.sy = scale * integrate_nodal(g, sy, y_cut, g.y_max);
    s.sz = scale * integrate_nodal(g, sz, y_cut, g.y_max);
    return s;
}

LarmorTimes larmor_times(const SpinExpectations& spins, double omega0)
{
    if (!(omega0 > 0.0)) throw std::invalid_argument("larmor_times: omega0 must be positive");
    if (spins.sx == 0.0 && spins.sy == 0.0)
        throw std::domain_error("larmor_times: precession phase undefined for S_x = S_y = 0");
    double phase = std::atan2(-spins.sy, spins.sx);
    if (phase < 0.0) phase += 2.0 * std::numbers::pi;
    LarmorTimes t;
    t.tau_y = phase / omega0;
    t.tau_z = std::atan(spins.sz / std::hypot(spins.sx, spins.sy)) / omega0;
    return t;
}

double transmission_probability(const SpinorField& field, double y_cut)
{
    check_cut(field.grid, y_cut);
    return norm(field, y_cut, field.grid.y_max);
}

double spin_flip_probability(const SpinorField& field, double y_cut, const Vec3& exit_axis, int initial_sign)
{
    const auto& g = field.grid;
    check_cut(g, y_cut);
    const auto e = spin_eigenvector(exit_axis, initial_sign >= 0 ? -1 : +1);
    std::vector<double> rho(g.n_points), proj(g.n_points);
    for (std::size_t j = 0; j < g.n_points; ++j) {
        rho[j] = std::norm(field.up[j]) + std::norm(field.down[j]);
        proj[j] = std::norm(std::conj(e[0]) * field.up[j] + std::conj(e[1]) * field.down[j]);
    }
    const double den = integrate_nodal(g, rho, y_cut, g.y_max);
    if (!(den >= kMinRegionNorm))
        throw NoTransmission("spin_flip_probability: no transmitted amplitude beyond y_cut");
    return integrate_nodal(g, proj, y_cut, g.y_max) / den;
}

double mean_kinetic_energy_transmitted(const SpinorField& field, double y_cut, double mass)
{
    const auto& g = field.grid;
    check_cut(g, y_cut);
    const double taper = 4.0 * g.dy;
    const std::size_t n = g.n_points;
    std::vector<cplx> up(n), down(n);
    double w2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double x = g.node(j) - y_cut;
        double w = 0.0;
        if (x >= taper)
            w = 1.0;
        else if (x > 0.0)
            w = 0.5 * (1.0 - std::cos(std::numbers::pi * x / taper));
        up[j] = w * field.up[j];
        down[j] = w * field.down[j];
        w2 += std::norm(up[j]) + std::norm(down[j]);
    }
    if (!(w2 * g.dy >= 1e-10))
        throw NoTransmission("mean_kinetic_energy_transmitted: empty transmitted region");
    std::vector<cplx> ku(n), kd(n);
    apply_kinetic(g, mass, up, ku);
    apply_kinetic(g, mass, down, kd);
    double e = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        e += (std::conj(up[j]) * ku[j] + std::conj(down[j]) * kd[j]).real();
    return e / w2;
}

}  // namespace qclock
