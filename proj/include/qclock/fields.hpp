#pragma once

#include <span>
#include <vector>

#include "qclock/grid.hpp"

namespace qclock {

/// 2x2 complex matrix, row-major.
struct Mat2 {
    cplx a00{}, a01{}, a10{}, a11{};

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    /// a*1 + b.sigma
    static Mat2 from_pauli(double a, const Vec3& b);

    std::array<cplx, 2> apply(const std::array<cplx, 2>& v) const
    {
        return {a00 * v[0] + a01 * v[1], a10 * v[0] + a11 * v[1]};
    }
};

/// Decomposition h = a*1 + b.sigma of a Hermitian 2x2 matrix.
struct PauliDecomposition {
    double a = 0.0;
    Vec3 b{0.0, 0.0, 0.0};
};
PauliDecomposition pauli_decompose(const Mat2& h);

/// Exact exp(-i h tau) for Hermitian h.
Mat2 unitary_exp(const PauliDecomposition& h, double tau);

enum class PotentialKind { none, rectangular };

struct PotentialProfile {
    PotentialKind kind = PotentialKind::none;
    double U0 = 0.0;
    double half_width = 0.0;

    /// U(y) with the closed interval |y| <= half_width inside.
    double at(double y) const;
    double support() const { return kind == PotentialKind::none ? 0.0 : half_width; }
};

enum class CouplingKind { none, larmor_z, rotating_xy };

/// Spin coupling written as (omega0/2) f(y).sigma. For the Larmor clock
/// f = -g(y) z_hat, which is -(omega0/2) g(y) sigma_z.
struct SpinCouplingProfile {
    CouplingKind kind = CouplingKind::none;
    double omega0 = 0.0;
    double D = 0.0;
    double L = 0.0;

    Vec3 field_direction(double y) const;
    Mat2 at(double y) const;
    double support() const;
};

PotentialProfile no_potential();
PotentialProfile rectangular_barrier(double U0, double half_width);
SpinCouplingProfile no_coupling();
SpinCouplingProfile larmor_profile(double omega0, double D);
SpinCouplingProfile rotating_field_profile(double omega0, double D, double L);

struct DiscretizedHamiltonian {
    Grid1D grid;
    std::vector<double> u;
    std::vector<Mat2> h_sf;
    double mass = 1.0;
};

/// Samples both profiles at the grid nodes. Both supports plus
/// support_margin must fit inside the grid.
DiscretizedHamiltonian sample(const Grid1D& grid, const PotentialProfile& pot,
                              const SpinCouplingProfile& sf, double support_margin = 0.0);

/// out = K in with K = -(1/2m) d^2/dy^2, three-point stencil, zero outside the grid.
void apply_kinetic(const Grid1D& grid, double mass, std::span<const cplx> in, std::span<cplx> out);

}  // namespace qclock
