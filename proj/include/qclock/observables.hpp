#pragma once

#include "qclock/grid.hpp"
#include "qclock/propagator.hpp"

namespace qclock {

/// Spin-1/2 expectations (hbar = 1) conditional on y > y_cut.
struct SpinExpectations {
    double sx = 0.0;
    double sy = 0.0;
    double sz = 0.0;
    double region_norm = 0.0;
};

struct LarmorTimes {
    double tau_y = 0.0;
    double tau_z = 0.0;
};

struct ClockReadout {
    double tau_y = 0.0;
    double tau_z = 0.0;
    double transmission = 0.0;
    double flip_prob = 0.0;
    double mean_kinetic_energy = 0.0;
    EvolveDiagnostics diagnostics;
};

inline constexpr double kMinRegionNorm = 1e-12;

SpinExpectations spin_expectations(const SpinorField& field, double y_cut);

/// tau_y = arg(S_x - i S_y) in [0, 2 pi) / omega0; tau_z = atan(S_z / |S_perp|) / omega0.
LarmorTimes larmor_times(const SpinExpectations& spins, double omega0);

double transmission_probability(const SpinorField& field, double y_cut);

/// Conditional probability, on y > y_cut, of the outcome of exit_axis.sigma
/// opposite to initial_sign (the state prepared along the entry field with
/// initial_sign adiabatically maps onto initial_sign along the exit field).
double spin_flip_probability(const SpinorField& field, double y_cut, const Vec3& exit_axis, int initial_sign);

/// <k^2/2m> of the part of the packet right of y_cut. The window rises as a
/// raised cosine over 4 dy starting at y_cut; the windowed field is
/// renormalised and the three-point kinetic stencil is applied.
double mean_kinetic_energy_transmitted(const SpinorField& field, double y_cut, double mass = 1.0);

}  // namespace qclock
