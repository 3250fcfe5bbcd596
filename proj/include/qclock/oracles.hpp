#pragma once

#include <complex>
#include <vector>

namespace qclock::oracle {

// Closed-form references. Nothing here touches the grid or the propagator.

struct RabiParams {
    double omega0 = 0.0;
    double v0 = 0.0;
    double D = 0.0;
    double omega_rot = 0.0;  // pi v0 / 2D
};

RabiParams make_rabi_params(double omega0, double v0, double D);

/// Rotating-field spin-flip probability as a function of omega0/omega(v0):
///   P = [ sin((pi/2) sqrt(1 + x^2)) / sqrt(1 + x^2) ]^2,  x = omega0/omega_rot
double rabi_flip_probability(const RabiParams& p);
double rabi_flip_probability_ratio(double omega0_over_omega_rot);

/// 2D / v0
double free_flight_time(double D, double v0);

struct BarrierScattering {
    double E = 0.0;
    double U_eff = 0.0;
    double half_width = 0.0;
    std::complex<double> t_amp;
    std::complex<double> r_amp;
    double kappa = 0.0;  // sqrt(2m(U_eff - E)) below the barrier top, else 0
};

/// Stationary scattering of e^{iky} (k = sqrt(2mE)) off U_eff on |y| <= half_width.
/// Transmitted wave is t e^{iky}; reflected r e^{-iky}.
BarrierScattering barrier_transmission(double E, double U_eff, double half_width, double mass = 1.0);

struct PlaneWaveLarmor {
    double tau_y = 0.0;
    double tau_z = 0.0;
    double sx = 0.0, sy = 0.0, sz = 0.0;
    double transmission = 0.0;
};

/// Transmitted spinor (t_up, t_down)/sqrt(2) of an x-polarised plane wave
/// through the Larmor barrier (U_eff = U0 -+ omega0/2 for up/down), read out
/// as Larmor times.
PlaneWaveLarmor plane_wave_larmor_times(double E0, double U0, double omega0, double D, double mass = 1.0);

/// Larmor readout averaged over the momentum distribution of a Gaussian packet
/// (centre k0, momentum spread 1/(2 sigma_y)); spin moments are averaged with
/// Gauss-Hermite quadrature before forming the times.
PlaneWaveLarmor packet_averaged_larmor(double k0, double sigma_y, double U0, double omega0, double D,
                                       int order = 41, double mass = 1.0);

struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;  // for weight function exp(-x^2)
};

GaussHermite gauss_hermite(int order);

}  // namespace qclock::oracle
