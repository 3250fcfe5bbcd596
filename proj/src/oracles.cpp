#include "qclock/oracles.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qclock::oracle {

using cplx = std::complex<double>;

RabiParams make_rabi_params(double omega0, double v0, double D)
{
    if (!(omega0 > 0.0) || !(v0 > 0.0) || !(D > 0.0))
        throw std::invalid_argument("rabi params must be positive");
    return {omega0, v0, D, std::numbers::pi * v0 / (2.0 * D)};
}

double rabi_flip_probability_ratio(double x)
{
    const double root = std::sqrt(1.0 + x * x);
    const double a = std::sin(0.5 * std::numbers::pi * root) / root;
    return a * a;
}

double rabi_flip_probability(const RabiParams& p)
{
    return rabi_flip_probability_ratio(p.omega0 / p.omega_rot);
}

double free_flight_time(double D, double v0)
{
    if (!(v0 > 0.0)) throw std::invalid_argument("free_flight_time: v0 must be positive");
    return 2.0 * D / v0;
}

namespace {

// cos(q a) and sin(q a)/q for q^2 = z (z may be negative), continuous at z = 0.
void trig_pair(double z, double a, double& c, double& s)
{
    const double q = std::sqrt(std::abs(z));
    const double x = q * a;
    if (x < 1e-4) {
        // series in z a^2, exact to ~1e-20 relative for x < 1e-4
        const double za2 = z * a * a;
        c = 1.0 - za2 / 2.0 + za2 * za2 / 24.0;
        s = a * (1.0 - za2 / 6.0 + za2 * za2 / 120.0);
        return;
    }
    if (z >= 0.0) {
        c = std::cos(x);
        s = std::sin(x) / q;
    } else {
        c = std::cosh(x);
        s = std::sinh(x) / q;
    }
}

}  // namespace

BarrierScattering barrier_transmission(double E, double U_eff, double half_width, double mass)
{
    if (!(E > 0.0)) throw std::invalid_argument("barrier_transmission: E must be positive");
    if (!(half_width >= 0.0)) throw std::invalid_argument("barrier_transmission: half_width must be >= 0");
    BarrierScattering b;
    b.E = E;
    b.U_eff = U_eff;
    b.half_width = half_width;
    const double k = std::sqrt(2.0 * mass * E);
    const double z = 2.0 * mass * (E - U_eff);  // q^2 inside
    b.kappa = z < 0.0 ? std::sqrt(-z) : 0.0;
    const double a = 2.0 * half_width;
    double c = 0.0, s = 0.0;
    trig_pair(z, a, c, s);
    const cplx denom((k * k + z) * s, 2.0 * k * c);
    b.t_amp = cplx(0.0, 2.0 * k) * std::polar(1.0, -k * a) / denom;
    // Reflection for a barrier on [0, a], shifted to [-a/2, a/2].
    b.r_amp = (k * k - z) * s / denom * std::polar(1.0, -k * a);
    return b;
}

PlaneWaveLarmor plane_wave_larmor_times(double E0, double U0, double omega0, double D, double mass)
{
    if (!(E0 > 0.0) || !(omega0 > 0.0))
        throw std::invalid_argument("plane_wave_larmor_times: E0 and omega0 must be positive");
    const cplx tu = barrier_transmission(E0, U0 - 0.5 * omega0, D, mass).t_amp;
    const cplx td = barrier_transmission(E0, U0 + 0.5 * omega0, D, mass).t_amp;
    const double pu = std::norm(tu), pd = std::norm(td);
    const double den = pu + pd;
    if (!(den > 0.0)) throw std::domain_error("plane_wave_larmor_times: zero transmitted amplitude");
    const cplx c = std::conj(tu) * td;
    PlaneWaveLarmor out;
    out.sx = c.real() / den;
    out.sy = c.imag() / den;
    out.sz = 0.5 * (pu - pd) / den;
    out.transmission = 0.5 * den;
    double phase = std::atan2(-out.sy, out.sx);
    if (phase < 0.0) phase += 2.0 * std::numbers::pi;
    out.tau_y = phase / omega0;
    out.tau_z = std::atan(out.sz / std::hypot(out.sx, out.sy)) / omega0;
    return out;
}

PlaneWaveLarmor packet_averaged_larmor(double k0, double sigma_y, double U0, double omega0, double D,
                                       int order, double mass)
{
    if (!(k0 > 0.0) || !(sigma_y > 0.0) || !(omega0 > 0.0))
        throw std::invalid_argument("packet_averaged_larmor: invalid parameters");
    const auto gh = gauss_hermite(order);
    // |phi(k)|^2 is normal with standard deviation 1/(2 sigma_y).
    const double sigma_k = 1.0 / (2.0 * sigma_y);
    double mx = 0.0, my = 0.0, mz = 0.0, mn = 0.0;
    for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
        const double k = k0 + std::numbers::sqrt2 * sigma_k * gh.nodes[i];
        if (k <= 0.0) continue;  // left-moving modes never reach the barrier
        const double w = gh.weights[i] / std::sqrt(std::numbers::pi);
        const double E = k * k / (2.0 * mass);
        const cplx tu = barrier_transmission(E, U0 - 0.5 * omega0, D, mass).t_amp;
        const cplx td = barrier_transmission(E, U0 + 0.5 * omega0, D, mass).t_amp;
        const cplx c = std::conj(tu) * td;
        mx += w * c.real();
        my += w * c.imag();
        mz += w * 0.5 * (std::norm(tu) - std::norm(td));
        mn += w * 0.5 * (std::norm(tu) + std::norm(td));
    }
    if (!(mn > 0.0)) throw std::domain_error("packet_averaged_larmor: zero transmitted amplitude");
    PlaneWaveLarmor out;
    out.transmission = mn;
    out.sx = 0.5 * mx / mn;
    out.sy = 0.5 * my / mn;
    out.sz = 0.5 * mz / mn;
    double phase = std::atan2(-out.sy, out.sx);
    if (phase < 0.0) phase += 2.0 * std::numbers::pi;
    out.tau_y = phase / omega0;
    out.tau_z = std::atan(out.sz / std::hypot(out.sx, out.sy)) / omega0;
    return out;
}

GaussHermite gauss_hermite(int order)
{
    if (order < 1) throw std::invalid_argument("gauss_hermite: order must be >= 1");
    // Newton iteration on orthonormal Hermite functions, roots located from
    // the largest down using the usual asymptotic starting guesses.
    const int n = order;
    const double pim4 = 1.0 / std::pow(std::numbers::pi, 0.25);
    GaussHermite gh;
    gh.nodes.assign(n, 0.0);
    gh.weights.assign(n, 0.0);
    const int m = (n + 1) / 2;
    double z = 0.0;
    for (int i = 0; i < m; ++i) {
        if (i == 0)
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
        else if (i == 1)
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        else if (i == 2)
            z = 1.86 * z - 0.86 * gh.nodes[0];
        else if (i == 3)
            z = 1.91 * z - 0.91 * gh.nodes[1];
        else
            z = 2.0 * z - gh.nodes[i - 2];
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = pim4, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
        }
        gh.nodes[i] = z;
        gh.nodes[n - 1 - i] = -z;
        gh.weights[i] = 2.0 / (pp * pp);
        gh.weights[n - 1 - i] = gh.weights[i];
    }
    return gh;
}

}  // namespace qclock::oracle
