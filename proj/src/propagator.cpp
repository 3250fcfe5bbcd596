#include "qclock/propagator.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "qclock/errors.hpp"

namespace qclock {

namespace {

bool is_zero(const Mat2& m)
{
    return m.a00 == cplx{} && m.a01 == cplx{} && m.a10 == cplx{} && m.a11 == cplx{};
}

std::size_t steps_for(double t_final, double dt)
{
    if (t_final <= 0.0) return 0;
    // Tolerate t_final/dt landing a few ulps above an integer.
    return static_cast<std::size_t>(std::ceil(t_final / dt * (1.0 - 1e-12)));
}

void check_same_grid(const Grid1D& a, const Grid1D& b)
{
    if (a.n_points != b.n_points || a.y_min != b.y_min || a.dy != b.dy)
        throw std::invalid_argument("state and Hamiltonian live on different grids");
}

}  // namespace

Propagator::Propagator(const DiscretizedHamiltonian& ham, double dt) : grid_(ham.grid), dt_(dt)
{
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw std::invalid_argument("Propagator: dt must be positive");
    const std::size_t n = grid_.n_points;
    if (ham.u.size() != n || ham.h_sf.size() != n)
        throw std::invalid_argument("Propagator: Hamiltonian arrays do not match the grid");

    for (std::size_t j = 0; j < n; ++j) {
        if (is_zero(ham.h_sf[j])) continue;
        const auto d = pauli_decompose(ham.h_sf[j]);
        half_.push_back({j, unitary_exp(d, 0.5 * dt)});
        full_.push_back({j, unitary_exp(d, dt)});
    }

    const double kin_diag = 1.0 / (ham.mass * grid_.dy * grid_.dy);
    const double kin_off = -0.5 * kin_diag;
    const cplx half_i_dt(0.0, 0.5 * dt);
    off_plus_ = half_i_dt * kin_off;
    off_minus_ = -off_plus_;
    diag_minus_.resize(n);
    inv_pivot_.resize(n);
    upper_.resize(n);
    cplx prev_upper{};
    for (std::size_t j = 0; j < n; ++j) {
        const double h_jj = kin_diag + ham.u[j];
        diag_minus_[j] = 1.0 - half_i_dt * h_jj;
        const cplx d_plus = 1.0 + half_i_dt * h_jj;
        const cplx pivot = j == 0 ? d_plus : d_plus - off_plus_ * prev_upper;
        inv_pivot_[j] = 1.0 / pivot;
        upper_[j] = off_plus_ * inv_pivot_[j];
        prev_upper = upper_[j];
    }
}

void Propagator::rotate(SpinorField& state, const std::vector<CellRotation>& rot) const
{
    for (const auto& r : rot) {
        const cplx a = state.up[r.index];
        const cplx b = state.down[r.index];
        state.up[r.index] = r.u.a00 * a + r.u.a01 * b;
        state.down[r.index] = r.u.a10 * a + r.u.a11 * b;
    }
}

void Propagator::cn_solve(std::vector<cplx>& psi) const
{
    const std::size_t n = psi.size();
    // Forward sweep fused with the explicit half step; psi is overwritten
    // with the eliminated right-hand side.
    cplx left{};
    cplx prev{};
    for (std::size_t j = 0; j < n; ++j) {
        const cplx centre = psi[j];
        const cplx right = j + 1 < n ? psi[j + 1] : cplx{};
        const cplx rhs = diag_minus_[j] * centre + off_minus_ * (left + right);
        prev = (rhs - off_plus_ * prev) * inv_pivot_[j];
        left = centre;
        psi[j] = prev;
    }
    for (std::size_t j = n - 1; j-- > 0;)
        psi[j] -= upper_[j] * psi[j + 1];
}

void Propagator::kinetic_potential(SpinorField& state) const
{
    cn_solve(state.up);
    cn_solve(state.down);
}

void Propagator::step(SpinorField& state) const
{
    rotate_half(state);
    kinetic_potential(state);
    rotate_half(state);
}

SpinorField step(const SpinorField& state, const DiscretizedHamiltonian& ham, double dt)
{
    check_same_grid(state.grid, ham.grid);
    Propagator prop(ham, dt);
    SpinorField out = state;
    prop.step(out);
    for (std::size_t j = 0; j < out.grid.n_points; ++j)
        if (!std::isfinite(out.up[j].real()) || !std::isfinite(out.up[j].imag()) ||
            !std::isfinite(out.down[j].real()) || !std::isfinite(out.down[j].imag()))
            throw NumericalError("step: non-finite amplitude at node " + std::to_string(j));
    return out;
}

double boundary_norm(const SpinorField& field, double margin)
{
    const auto& g = field.grid;
    if (!(margin > 0.0)) return 0.0;
    margin = std::min(margin, 0.5 * (g.y_max - g.y_min));
    const auto rho = density(field);
    return integrate_nodal(g, rho, g.y_min, g.y_min + margin) +
           integrate_nodal(g, rho, g.y_max - margin, g.y_max);
}

std::pair<SpinorField, EvolveDiagnostics> evolve(SpinorField state, const DiscretizedHamiltonian& ham,
                                                 const EvolveParams& params,
                                                 std::span<const Observer> observers)
{
    if (!(params.dt > 0.0)) throw std::invalid_argument("evolve: dt must be positive");
    if (!(params.t_final >= 0.0)) throw std::invalid_argument("evolve: t_final must be >= 0");
    if (params.snapshot_stride < 1) throw std::invalid_argument("evolve: snapshot_stride must be >= 1");
    check_same_grid(state.grid, ham.grid);

    const auto t0 = std::chrono::steady_clock::now();
    EvolveDiagnostics diag;
    const std::size_t steps = steps_for(params.t_final, params.dt);
    diag.steps_taken = steps;

    const double norm0 = norm(state);
    if (!std::isfinite(norm0) || !(norm0 > 0.0))
        throw NumericalError("evolve: initial state has zero or non-finite norm");
    diag.boundary_norm = boundary_norm(state, params.boundary_margin);
    if (diag.boundary_norm > params.boundary_tol)
        throw BoundaryContamination("evolve: initial state already touches the boundary strips",
                                    diag.boundary_norm, 0.0);

    auto checkpoint = [&](std::size_t s, double t) {
        const double n = norm(state);
        if (!std::isfinite(n))
            throw NumericalError("evolve: non-finite amplitudes at step " + std::to_string(s));
        diag.norm_drift = std::max(diag.norm_drift, std::abs(n / norm0 - 1.0));
        diag.boundary_norm = boundary_norm(state, params.boundary_margin);
        if (diag.boundary_norm > params.boundary_tol) {
            std::ostringstream msg;
            msg << "evolve: boundary norm " << diag.boundary_norm << " exceeds tolerance at t=" << t;
            throw BoundaryContamination(msg.str(), diag.boundary_norm, t);
        }
        for (const auto& obs : observers) obs(s, t, state);
    };

    checkpoint(0, 0.0);
    if (steps > 0) {
        const double dt_eff = params.t_final / static_cast<double>(steps);
        const Propagator prop(ham, dt_eff);
        bool open = false;  // a trailing half rotation is still pending
        for (std::size_t s = 1; s <= steps; ++s) {
            if (open)
                prop.rotate_full(state);
            else
                prop.rotate_half(state);
            prop.kinetic_potential(state);
            if (s % params.snapshot_stride == 0 || s == steps) {
                prop.rotate_half(state);
                open = false;
                checkpoint(s, s == steps ? params.t_final : static_cast<double>(s) * dt_eff);
            } else {
                open = true;
            }
        }
    }
    diag.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(state), diag};
}

double expected_energy(const SpinorField& field, const DiscretizedHamiltonian& ham)
{
    check_same_grid(field.grid, ham.grid);
    const std::size_t n = field.grid.n_points;
    std::vector<cplx> ku(n), kd(n);
    apply_kinetic(field.grid, ham.mass, field.up, ku);
    apply_kinetic(field.grid, ham.mass, field.down, kd);
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const cplx u = field.up[j], d = field.down[j];
        const auto hs = ham.h_sf[j].apply({u, d});
        num += (std::conj(u) * (ku[j] + ham.u[j] * u + hs[0])).real();
        num += (std::conj(d) * (kd[j] + ham.u[j] * d + hs[1])).real();
        den += std::norm(u) + std::norm(d);
    }
    return num / den;
}

Vec3 global_sigma(const SpinorField& field)
{
    double sx = 0.0, sy = 0.0, sz = 0.0, den = 0.0;
    for (std::size_t j = 0; j < field.grid.n_points; ++j) {
        const cplx c = std::conj(field.up[j]) * field.down[j];
        const double pu = std::norm(field.up[j]), pd = std::norm(field.down[j]);
        sx += 2.0 * c.real();
        sy += 2.0 * c.imag();
        sz += pu - pd;
        den += pu + pd;
    }
    return {sx / den, sy / den, sz / den};
}

Resolution auto_resolution(const PacketSpec& packet, const PotentialProfile& pot,
                           const SpinCouplingProfile& sf, double t_final, const ResolutionRules& rules)
{
    validate(packet);
    if (!(t_final >= 0.0) || !std::isfinite(t_final))
        throw std::invalid_argument("auto_resolution: t_final must be >= 0");
    if (!(rules.ppw > 0.0) || !(rules.eta > 0.0))
        throw std::invalid_argument("auto_resolution: ppw and eta must be positive");

    const double m = rules.mass;
    const double u_max = pot.kind == PotentialKind::none ? 0.0 : pot.U0;
    const double w_max = sf.kind == CouplingKind::none ? 0.0 : sf.omega0;
    Resolution res;
    res.k_max = packet.k0 + 6.0 / packet.sigma_y + std::sqrt(2.0 * m * std::max(u_max, w_max));

    double unit = 1.0;
    if (sf.kind != CouplingKind::none)
        unit = sf.D;
    else if (pot.kind != PotentialKind::none)
        unit = pot.half_width;
    const double dy_rule = 2.0 * std::numbers::pi / (res.k_max * rules.ppw);
    const double cells_per_unit = std::ceil(unit / dy_rule * (1.0 - 1e-12));
    const double dy = unit / cells_per_unit;

    const double reach = res.k_max / m * t_final;
    const double tails = rules.tail_sigmas * packet.sigma_y;
    const double support = std::max(pot.support(), sf.support());
    const double left = std::min(packet.y0 - tails - reach, -support - tails);
    const double right = std::max(packet.y0 + tails + reach, support + tails);

    // nodes at (i + 1/2) dy for integer i
    const double k_left = std::ceil(-left / dy - 0.5);
    const double k_right = std::ceil(right / dy - 0.5);
    const double cells = k_left + k_right + 2.0;
    if (cells > static_cast<double>(rules.cell_cap))
        throw ConfigError("auto_resolution: " + std::to_string(static_cast<long long>(cells)) +
                          " cells exceed the cap of " + std::to_string(rules.cell_cap));
    res.grid = make_grid_spacing(-(k_left + 0.5) * dy, dy, static_cast<std::size_t>(cells));
    res.dt = rules.eta * 2.0 * m * dy * dy;
    res.steps = steps_for(t_final, res.dt);
    return res;
}

Resolution refine(const Resolution& base, int factor, double t_final)
{
    if (factor < 1) throw std::invalid_argument("refine: factor must be >= 1");
    Resolution r = base;
    const double dy = base.grid.dy / factor;
    const double k_left = std::ceil(-base.grid.y_min / dy - 0.5);
    const double k_right = std::ceil(base.grid.y_max / dy - 0.5);
    r.grid = make_grid_spacing(-(k_left + 0.5) * dy, dy, static_cast<std::size_t>(k_left + k_right + 2.0));
    r.dt = base.dt / factor;
    r.steps = steps_for(t_final, r.dt);
    return r;
}

double spin_only_flip_probability(double omega0, double v0, double D, int initial_sign, std::size_t steps)
{
    if (!(omega0 >= 0.0) || !(v0 > 0.0) || !(D > 0.0) || steps == 0)
        throw std::invalid_argument("spin_only_flip_probability: invalid parameters");
    const auto profile = rotating_field_profile(omega0, D, D);
    const double t_total = 2.0 * D / v0;
    const double dt = t_total / static_cast<double>(steps);

    auto chi = spin_eigenvector(profile.field_direction(-D), initial_sign);
    for (std::size_t s = 0; s < steps; ++s) {
        const double y_mid = -D + v0 * (static_cast<double>(s) + 0.5) * dt;
        const Vec3 f = profile.field_direction(y_mid);
        const double h = 0.5 * omega0;
        const Mat2 u = unitary_exp(PauliDecomposition{0.0, {h * f[0], h * f[1], h * f[2]}}, dt);
        chi = u.apply(chi);
    }
    const auto flipped = spin_eigenvector(profile.field_direction(D), -initial_sign);
    const cplx overlap = std::conj(flipped[0]) * chi[0] + std::conj(flipped[1]) * chi[1];
    return std::norm(overlap) / (std::norm(chi[0]) + std::norm(chi[1]));
}

namespace {

template <class T>
void put_le(std::vector<char>& buf, T value)
{
    static_assert(sizeof(T) == 8);
    std::uint64_t bits;
    std::memcpy(&bits, &value, 8);
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
}

template <class T>
T get_le(const char* p)
{
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    T value;
    std::memcpy(&value, &bits, 8);
    return value;
}

}  // namespace

SnapshotWriter::SnapshotWriter(const std::filesystem::path& path, const Grid1D& grid)
    : out_(path, std::ios::binary), grid_(grid)
{
    if (!out_) throw std::runtime_error("cannot open snapshot file " + path.string());
    std::ostringstream header;
    header.precision(17);
    header << "SPINOR1D v1 n_points=" << grid.n_points << " dy=" << grid.dy << " y_min=" << grid.y_min << "\n";
    out_ << header.str();
}

void SnapshotWriter::write(std::uint64_t step, double time, const SpinorField& field)
{
    check_same_grid(field.grid, grid_);
    buffer_.clear();
    buffer_.reserve(16 + 32 * grid_.n_points);
    put_le(buffer_, step);
    put_le(buffer_, time);
    for (std::size_t j = 0; j < grid_.n_points; ++j) {
        put_le(buffer_, field.up[j].real());
        put_le(buffer_, field.up[j].imag());
        put_le(buffer_, field.down[j].real());
        put_le(buffer_, field.down[j].imag());
    }
    out_.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
    if (!out_) throw std::runtime_error("snapshot write failed");
}

Observer SnapshotWriter::observer()
{
    return [this](std::size_t s, double t, const SpinorField& f) { write(s, t, f); };
}

std::vector<Snapshot> read_snapshots(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open snapshot file " + path.string());
    std::string header;
    std::getline(in, header);
    std::istringstream hs(header);
    std::string magic, version, f_n, f_dy, f_ymin;
    hs >> magic >> version >> f_n >> f_dy >> f_ymin;
    if (magic != "SPINOR1D" || version != "v1" || f_n.rfind("n_points=", 0) != 0 ||
        f_dy.rfind("dy=", 0) != 0 || f_ymin.rfind("y_min=", 0) != 0)
        throw std::runtime_error("not a SPINOR1D v1 snapshot file");
    const auto n = static_cast<std::size_t>(std::stoull(f_n.substr(9)));
    const double dy = std::stod(f_dy.substr(3));
    const double y_min = std::stod(f_ymin.substr(6));
    const Grid1D grid = make_grid_spacing(y_min, dy, n);

    std::vector<Snapshot> out;
    std::vector<char> rec(16 + 32 * n);
    while (in.read(rec.data(), static_cast<std::streamsize>(rec.size()))) {
        Snapshot s;
        s.step = get_le<std::uint64_t>(rec.data());
        s.time = get_le<double>(rec.data() + 8);
        s.field = SpinorField(grid);
        const char* p = rec.data() + 16;
        for (std::size_t j = 0; j < n; ++j, p += 32) {
            s.field.up[j] = {get_le<double>(p), get_le<double>(p + 8)};
            s.field.down[j] = {get_le<double>(p + 16), get_le<double>(p + 24)};
        }
        out.push_back(std::move(s));
    }
    if (in.gcount() != 0) throw std::runtime_error("truncated snapshot record");
    return out;
}

}  // namespace qclock
