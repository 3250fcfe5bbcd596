#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace qclock {

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;

/// Uniform grid on [y_min, y_max]; nodes are y_min + j*dy.
struct Grid1D {
    double y_min = 0.0;
    double y_max = 0.0;
    std::size_t n_points = 0;
    double dy = 0.0;

    double node(std::size_t j) const { return y_min + static_cast<double>(j) * dy; }
};

inline constexpr std::size_t kMinGridPoints = 16;

Grid1D make_grid(double y_min, double y_max, std::size_t n_points);

/// Grid with prescribed spacing; y_max is derived from the node count.
Grid1D make_grid_spacing(double y_min, double dy, std::size_t n_points);

/// Two-component wavefunction in the sigma_z eigenbasis.
struct SpinorField {
    Grid1D grid;
    std::vector<cplx> up;
    std::vector<cplx> down;

    SpinorField() = default;
    explicit SpinorField(const Grid1D& g) : grid(g), up(g.n_points), down(g.n_points) {}
};

/// Gaussian packet with a pure spin state along spin_axis.
struct PacketSpec {
    double y0 = 0.0;
    double sigma_y = 1.0;
    double k0 = 1.0;
    Vec3 spin_axis{1.0, 0.0, 0.0};
    int spin_sign = +1;
};

inline constexpr double kTailSigmas = 8.0;

void validate(const PacketSpec& spec);

/// Unit spinor chi with (axis . sigma) chi = sign * chi. The first non-zero
/// component is made real and positive.
std::array<cplx, 2> spin_eigenvector(const Vec3& axis, int sign);

SpinorField init_gaussian(const Grid1D& grid, const PacketSpec& spec);

/// Integral over [lo, hi] of the piecewise-linear interpolant of nodal values.
/// This is the trapezoidal rule with exact partial cells at the window edges.
double integrate_nodal(const Grid1D& grid, std::span<const double> values, double lo, double hi);

std::vector<double> density(const SpinorField& field);

/// Probability in [y_lo, y_hi].
double norm(const SpinorField& field, double y_lo, double y_hi);
double norm(const SpinorField& field);

void normalize(SpinorField& field);

}  // namespace qclock
