#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qclock/fields.hpp"
#include "qclock/grid.hpp"

namespace qclock {

struct EvolveParams {
    double dt = 0.0;
    double t_final = 0.0;
    std::size_t snapshot_stride = 1;
    /// Width of the edge strips whose probability is reported as boundary_norm.
    double boundary_margin = 0.0;
    /// Runs abort once boundary_norm exceeds this.
    double boundary_tol = 1e-6;
};

struct EvolveDiagnostics {
    double norm_drift = 0.0;
    double boundary_norm = 0.0;
    std::size_t steps_taken = 0;
    double wall_time = 0.0;
};

/// Called with (step index, time, state) every snapshot_stride steps and
/// after the final step. The state is consistent (all split factors applied).
using Observer = std::function<void(std::size_t, double, const SpinorField&)>;

/// Strang-split propagator for a time-independent Hamiltonian:
///   psi <- R(dt/2) CN(dt) R(dt/2) psi
/// R is the exact cellwise spin rotation exp(-i h_sf dt/2); CN is the
/// Crank-Nicolson Cayley form of K + U with hard walls. The tridiagonal
/// factorisation is computed once and reused for every step.
class Propagator {
public:
    Propagator(const DiscretizedHamiltonian& ham, double dt);

    double dt() const { return dt_; }
    const Grid1D& grid() const { return grid_; }

    /// One full Strang step.
    void step(SpinorField& state) const;

    /// Building blocks, exposed so that consecutive half rotations can be fused.
    void rotate_half(SpinorField& state) const { rotate(state, half_); }
    void rotate_full(SpinorField& state) const { rotate(state, full_); }
    void kinetic_potential(SpinorField& state) const;

private:
    struct CellRotation {
        std::size_t index;
        Mat2 u;
    };
    void rotate(SpinorField& state, const std::vector<CellRotation>& rot) const;
    void cn_solve(std::vector<cplx>& psi) const;

    Grid1D grid_;
    double dt_;
    std::vector<CellRotation> half_;
    std::vector<CellRotation> full_;
    // (1 + i dt/2 H) x = (1 - i dt/2 H) psi with H = K + U tridiagonal.
    std::vector<cplx> diag_minus_;   // 1 - i dt/2 H_jj
    cplx off_plus_;                  // i dt/2 H_{j,j+1}
    cplx off_minus_;                 // -i dt/2 H_{j,j+1}
    std::vector<cplx> inv_pivot_;    // Thomas elimination pivots (inverted)
    std::vector<cplx> upper_;        // modified super-diagonal
};

SpinorField step(const SpinorField& state, const DiscretizedHamiltonian& ham, double dt);

/// Evolves to t_final in ceil(t_final/dt) equal steps (the last step size is
/// folded into a uniform dt_eff = t_final / steps <= dt).
std::pair<SpinorField, EvolveDiagnostics> evolve(SpinorField state, const DiscretizedHamiltonian& ham,
                                                 const EvolveParams& params,
                                                 std::span<const Observer> observers = {});

/// <psi|H|psi> / <psi|psi> with the discrete operator used by the propagator.
double expected_energy(const SpinorField& field, const DiscretizedHamiltonian& ham);

/// Global <sigma_i> (not spin-1/2 scaled) over the whole grid.
Vec3 global_sigma(const SpinorField& field);

double boundary_norm(const SpinorField& field, double margin);

struct ResolutionRules {
    double ppw = 20.0;          // points per shortest wavelength
    double eta = 0.1;           // dt = eta * 2 m dy^2
    std::size_t cell_cap = std::size_t{1} << 22;
    double tail_sigmas = kTailSigmas;
    double mass = 1.0;
};

struct Resolution {
    Grid1D grid;
    double dt = 0.0;
    std::size_t steps = 0;
    double k_max = 0.0;
};

/// Grid and time step for a run of duration t_final:
///   k_max = k0 + 6/sigma_y + sqrt(2 m max(U0, omega0))
///   dy <= 2 pi / (k_max ppw), dt = eta 2 m dy^2
/// The domain extends by k_max t_final / m beyond the packet's 8-sigma tails on
/// both sides. dy is snapped to D/M for integer M and the nodes are offset by
/// half a cell from the origin, so every profile edge (+-D, +-L, barrier edges
/// at multiples of D/M) falls at a cell midpoint.
Resolution auto_resolution(const PacketSpec& packet, const PotentialProfile& pot,
                           const SpinCouplingProfile& sf, double t_final,
                           const ResolutionRules& rules = {});

/// Same extent as `base` refined by an integer factor (dy/f, dt/f); edges stay
/// at cell midpoints.
Resolution refine(const Resolution& base, int factor, double t_final);

/// Spin-only reduction of the rotating-field clock: the spin sees
/// H(t) = (omega0/2) f(-D + v0 t).sigma for 0 <= t <= 2D/v0, starting along
/// +-f(-D). Integrated with `steps` exact exponential midpoint steps. Returns
/// the probability of ending opposite to the adiabatic image of the start.
double spin_only_flip_probability(double omega0, double v0, double D, int initial_sign,
                                  std::size_t steps = 200000);

/// Binary snapshot stream:
///   header line "SPINOR1D v1 n_points=<N> dy=<dy> y_min=<y_min>\n"
///   per record (little-endian): u64 step, f64 time, then N x
///   [Re up, Im up, Re down, Im down] f64.
class SnapshotWriter {
public:
    SnapshotWriter(const std::filesystem::path& path, const Grid1D& grid);
    void write(std::uint64_t step, double time, const SpinorField& field);
    Observer observer();

private:
    std::ofstream out_;
    Grid1D grid_;
    std::vector<char> buffer_;
};

struct Snapshot {
    std::uint64_t step = 0;
    double time = 0.0;
    SpinorField field;
};

std::vector<Snapshot> read_snapshots(const std::filesystem::path& path);

}  // namespace qclock
