#include "qclock/fields.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qclock {

namespace {

// Nodes meant to sit on an edge may carry a few ulps of rounding.
bool inside_closed(double y, double half_width)
{
    return std::abs(y) <= half_width * (1.0 + 1e-12);
}

}  // namespace

Mat2 Mat2::from_pauli(double a, const Vec3& b)
{
    return {cplx(a + b[2], 0.0), cplx(b[0], -b[1]), cplx(b[0], b[1]), cplx(a - b[2], 0.0)};
}

PauliDecomposition pauli_decompose(const Mat2& h)
{
    PauliDecomposition d;
    d.a = 0.5 * (h.a00.real() + h.a11.real());
    d.b[0] = 0.5 * (h.a01.real() + h.a10.real());
    d.b[1] = 0.5 * (h.a10.imag() - h.a01.imag());
    d.b[2] = 0.5 * (h.a00.real() - h.a11.real());
    return d;
}

Mat2 unitary_exp(const PauliDecomposition& h, double tau)
{
    const double bn = std::sqrt(h.b[0] * h.b[0] + h.b[1] * h.b[1] + h.b[2] * h.b[2]);
    const cplx global = std::polar(1.0, -h.a * tau);
    if (bn == 0.0) return {global, 0.0, 0.0, global};
    const double c = std::cos(bn * tau);
    const double s = std::sin(bn * tau) / bn;
    // exp(-i b.sigma tau) = cos(|b| tau) - i sin(|b| tau) b_hat.sigma
    const cplx m00(c, -s * h.b[2]);
    const cplx m11(c, s * h.b[2]);
    const cplx m01 = cplx(0.0, -s) * cplx(h.b[0], -h.b[1]);
    const cplx m10 = cplx(0.0, -s) * cplx(h.b[0], h.b[1]);
    return {global * m00, global * m01, global * m10, global * m11};
}

double PotentialProfile::at(double y) const
{
    if (kind == PotentialKind::none) return 0.0;
    return inside_closed(y, half_width) ? U0 : 0.0;
}

Vec3 SpinCouplingProfile::field_direction(double y) const
{
    switch (kind) {
    case CouplingKind::none:
        return {0.0, 0.0, 0.0};
    case CouplingKind::larmor_z:
        return inside_closed(y, D) ? Vec3{0.0, 0.0, -1.0} : Vec3{0.0, 0.0, 0.0};
    case CouplingKind::rotating_xy: {
        const double ay = std::abs(y);
        if (ay < D) {
            const double phase = std::numbers::pi * y / (2.0 * D);
            return {-std::sin(phase), std::cos(phase), 0.0};
        }
        if (inside_closed(y, L)) return {y > 0.0 ? -1.0 : 1.0, 0.0, 0.0};
        return {0.0, 0.0, 0.0};
    }
    }
    return {0.0, 0.0, 0.0};
}

Mat2 SpinCouplingProfile::at(double y) const
{
    const Vec3 f = field_direction(y);
    const double h = 0.5 * omega0;
    return Mat2::from_pauli(0.0, {h * f[0], h * f[1], h * f[2]});
}

double SpinCouplingProfile::support() const
{
    switch (kind) {
    case CouplingKind::none: return 0.0;
    case CouplingKind::larmor_z: return D;
    case CouplingKind::rotating_xy: return L;
    }
    return 0.0;
}

PotentialProfile no_potential() { return {}; }

PotentialProfile rectangular_barrier(double U0, double half_width)
{
    if (!(U0 >= 0.0) || !std::isfinite(U0))
        throw std::invalid_argument("rectangular_barrier: U0 must be >= 0");
    if (!(half_width > 0.0) || !std::isfinite(half_width))
        throw std::invalid_argument("rectangular_barrier: half_width must be > 0");
    return {PotentialKind::rectangular, U0, half_width};
}

SpinCouplingProfile no_coupling() { return {}; }

SpinCouplingProfile larmor_profile(double omega0, double D)
{
    if (!(omega0 >= 0.0) || !std::isfinite(omega0))
        throw std::invalid_argument("larmor_profile: omega0 must be >= 0");
    if (!(D > 0.0) || !std::isfinite(D))
        throw std::invalid_argument("larmor_profile: D must be > 0");
    return {CouplingKind::larmor_z, omega0, D, D};
}

SpinCouplingProfile rotating_field_profile(double omega0, double D, double L)
{
    if (!(omega0 >= 0.0) || !std::isfinite(omega0))
        throw std::invalid_argument("rotating_field_profile: omega0 must be >= 0");
    if (!(D > 0.0) || !(L >= D) || !std::isfinite(L))
        throw std::invalid_argument("rotating_field_profile: require L >= D > 0");
    return {CouplingKind::rotating_xy, omega0, D, L};
}

DiscretizedHamiltonian sample(const Grid1D& grid, const PotentialProfile& pot,
                              const SpinCouplingProfile& sf, double support_margin)
{
    const double reach = std::max(pot.support(), sf.support()) + support_margin;
    if (reach > 0.0 && (-reach < grid.y_min || reach > grid.y_max))
        throw std::invalid_argument("sample: profile support (plus margin) exceeds the grid");

    DiscretizedHamiltonian h;
    h.grid = grid;
    h.u.resize(grid.n_points);
    h.h_sf.resize(grid.n_points);
    for (std::size_t j = 0; j < grid.n_points; ++j) {
        const double y = grid.node(j);
        h.u[j] = pot.at(y);
        h.h_sf[j] = sf.at(y);
    }
    return h;
}

void apply_kinetic(const Grid1D& grid, double mass, std::span<const cplx> in, std::span<cplx> out)
{
    const std::size_t n = grid.n_points;
    if (in.size() != n || out.size() != n)
        throw std::invalid_argument("apply_kinetic: size mismatch");
    const double c = 1.0 / (2.0 * mass * grid.dy * grid.dy);
    for (std::size_t j = 0; j < n; ++j) {
        const cplx left = j > 0 ? in[j - 1] : cplx{};
        const cplx right = j + 1 < n ? in[j + 1] : cplx{};
        out[j] = c * (2.0 * in[j] - left - right);
    }
}

}  // namespace qclock
