#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "qclock/errors.hpp"
#include "qclock/propagator.hpp"

using namespace qclock;

namespace {

double l2_distance(const SpinorField& a, const SpinorField& b)
{
    double s = 0.0;
    for (std::size_t j = 0; j < a.grid.n_points; ++j) s += std::norm(a.up[j] - b.up[j]) + std::norm(a.down[j] - b.down[j]);
    return std::sqrt(s * a.grid.dy);
}

double first_moment(const SpinorField& f, int power)
{
    const auto rho = density(f);
    std::vector<double> m(rho.size());
    for (std::size_t j = 0; j < rho.size(); ++j) m[j] = std::pow(f.grid.node(j), power) * rho[j];
    return integrate_nodal(f.grid, m, f.grid.y_min, f.grid.y_max) / integrate_nodal(f.grid, rho, f.grid.y_min, f.grid.y_max);
}

// exp(-i H t) psi with H assembled densely from the same discrete pieces
SpinorField dense_evolve(const SpinorField& psi, const DiscretizedHamiltonian& ham, double t)
{
    const auto n = static_cast<Eigen::Index>(psi.grid.n_points);
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
    const double c = 1.0 / (2.0 * ham.mass * psi.grid.dy * psi.grid.dy);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index s = 0; s < 2; ++s) {
            const Eigen::Index r = 2 * j + s;
            H(r, r) += 2.0 * c + ham.u[j];
            if (j > 0) H(r, r - 2) -= c;
            if (j + 1 < n) H(r, r + 2) -= c;
        }
        const auto& m = ham.h_sf[j];
        H(2 * j, 2 * j) += m.a00;
        H(2 * j, 2 * j + 1) += m.a01;
        H(2 * j + 1, 2 * j) += m.a10;
        H(2 * j + 1, 2 * j + 1) += m.a11;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    Eigen::VectorXcd v(2 * n);
    for (Eigen::Index j = 0; j < n; ++j) {
        v(2 * j) = psi.up[j];
        v(2 * j + 1) = psi.down[j];
    }
    Eigen::VectorXcd coeff = es.eigenvectors().adjoint() * v;
    for (Eigen::Index k = 0; k < 2 * n; ++k) coeff(k) *= std::polar(1.0, -es.eigenvalues()(k) * t);
    const Eigen::VectorXcd out = es.eigenvectors() * coeff;
    SpinorField r(psi.grid);
    for (Eigen::Index j = 0; j < n; ++j) {
        r.up[j] = out(2 * j);
        r.down[j] = out(2 * j + 1);
    }
    return r;
}

EvolveParams params(double dt, double t_final, std::size_t stride = 1)
{
    EvolveParams p;
    p.dt = dt;
    p.t_final = t_final;
    p.snapshot_stride = stride;
    return p;
}

}  // namespace

TEST_CASE("single step is unitary")
{
    const auto g = make_grid(-20.0, 20.0, 1601);
    PacketSpec p;
    p.y0 = -5.0;
    p.k0 = 2.0;
    const auto psi = init_gaussian(g, p);
    const auto free = sample(g, no_potential(), no_coupling());
    const auto next = step(psi, free, 0.01);
    CHECK(std::abs(norm(next) - norm(psi)) <= 1e-13);

    const auto full = sample(g, rectangular_barrier(1.0, 1.0), rotating_field_profile(2.0, 1.0, 2.0));
    CHECK(std::abs(norm(step(psi, full, 0.01)) - norm(psi)) <= 1e-13);
}

TEST_CASE("zero steps leave the state untouched")
{
    const auto g = make_grid(-20.0, 20.0, 801);
    PacketSpec p;
    p.y0 = -2.0;
    const auto psi = init_gaussian(g, p);
    const auto ham = sample(g, rectangular_barrier(1.0, 1.0), larmor_profile(1.0, 1.0));
    int calls = 0;
    std::vector<Observer> obs{[&](std::size_t, double, const SpinorField&) { ++calls; }};
    const auto [out, diag] = evolve(psi, ham, params(0.01, 0.0), obs);
    CHECK(diag.steps_taken == 0);
    CHECK(calls == 1);
    CHECK(out.up == psi.up);
    CHECK(out.down == psi.down);
}

TEST_CASE("observers fire at stride and at the end")
{
    const auto g = make_grid(-20.0, 20.0, 401);
    PacketSpec p;
    p.y0 = -2.0;
    const auto ham = sample(g, no_potential(), no_coupling());
    std::vector<std::size_t> seen;
    double last_t = -1.0;
    std::vector<Observer> obs{[&](std::size_t s, double t, const SpinorField&) {
        seen.push_back(s);
        last_t = t;
    }};
    const auto [out, diag] = evolve(init_gaussian(g, p), ham, params(0.1, 1.05, 4), obs);
    CHECK(diag.steps_taken == 11);
    CHECK(seen == std::vector<std::size_t>{0, 4, 8, 11});
    CHECK(last_t == 1.05);
}

TEST_CASE("fused rotations equal plain Strang steps")
{
    const auto g = make_grid(-15.0, 15.0, 601);
    PacketSpec p;
    p.y0 = -3.0;
    p.k0 = 1.5;
    const auto psi = init_gaussian(g, p);
    const auto ham = sample(g, rectangular_barrier(0.5, 2.0), rotating_field_profile(3.0, 1.0, 2.0));
    const double dt = 0.01;
    SpinorField plain = psi;
    Propagator prop(ham, dt);
    for (int s = 0; s < 50; ++s) prop.step(plain);
    const auto [fused, diag] = evolve(psi, ham, params(dt, 0.5, 7));
    CHECK(l2_distance(plain, fused) < 1e-12);
}

TEST_CASE("cross-check against dense matrix exponential")
{
    // 192 cells, 384 x 384 Hamiltonian
    const auto g = make_grid(-9.6, 9.5, 192);
    PacketSpec p;
    p.y0 = -1.5;
    p.sigma_y = 0.8;
    p.k0 = 1.0;
    p.spin_axis = {0.6, 0.0, 0.8};
    const auto psi = init_gaussian(g, p);
    const double T = 1.5;

    SUBCASE("rotating field with barrier")
    {
        const auto ham = sample(g, rectangular_barrier(0.7, 1.0), rotating_field_profile(2.0, 0.5, 1.0));
        const auto exact = dense_evolve(psi, ham, T);
        const auto [num, diag] = evolve(psi, ham, params(2e-5, T, 1000));
        CHECK(l2_distance(exact, num) < 1e-6);
    }
    SUBCASE("larmor window with barrier")
    {
        const auto ham = sample(g, rectangular_barrier(1.2, 1.0), larmor_profile(0.9, 1.0));
        const auto exact = dense_evolve(psi, ham, T);
        const auto [num, diag] = evolve(psi, ham, params(2e-5, T, 1000));
        CHECK(l2_distance(exact, num) < 1e-6);
    }
}

TEST_CASE("long runs stay unitary and conserve sigma_z and energy under larmor coupling")
{
    PacketSpec p;
    p.y0 = -9.5;
    p.k0 = 3.0;
    const double t_final = 15.0 / p.k0;
    const auto pot = rectangular_barrier(1.0, 1.0);
    const auto sf = larmor_profile(0.6, 1.0);
    auto res = auto_resolution(p, pot, sf, t_final, ResolutionRules{.ppw = 10.0});
    res.dt = t_final / 100000.0;
    const auto ham = sample(res.grid, pot, sf);
    const auto psi = init_gaussian(res.grid, p);
    const double e0 = expected_energy(psi, ham);
    const double sz0 = global_sigma(psi)[2];
    double sz_drift = 0.0, e_drift = 0.0;
    std::vector<Observer> obs{[&](std::size_t, double, const SpinorField& f) {
        sz_drift = std::max(sz_drift, std::abs(global_sigma(f)[2] - sz0));
        e_drift = std::max(e_drift, std::abs(expected_energy(f, ham) - e0));
    }};
    const auto [out, diag] = evolve(psi, ham, params(res.dt, t_final, 5000), obs);
    CHECK(diag.steps_taken >= 100000);
    CHECK(diag.norm_drift <= 1e-10);
    CHECK(std::abs(sz0) < 1e-12);
    CHECK(sz_drift <= 1e-10);
    CHECK(e_drift <= 1e-8 * 0.5 * p.k0 * p.k0);
}

TEST_CASE("energy is conserved under the rotating field")
{
    PacketSpec p;
    p.y0 = -9.5;
    p.k0 = 3.0;
    const double t_final = 15.0 / p.k0;
    const auto pot = no_potential();
    const auto sf = rotating_field_profile(4.0, 1.0, 2.0);
    const auto res = auto_resolution(p, pot, sf, t_final);
    const auto ham = sample(res.grid, pot, sf);
    const auto psi = init_gaussian(res.grid, p);
    const double e0 = expected_energy(psi, ham);
    auto drift = [&](double dt) {
        double e_drift = 0.0;
        std::vector<Observer> obs{[&](std::size_t, double, const SpinorField& f) {
            e_drift = std::max(e_drift, std::abs(expected_energy(f, ham) - e0));
        }};
        evolve(psi, ham, params(dt, t_final, 200), obs);
        return e_drift;
    };
    // the field jumps to zero at |y| = L, so the split-step energy error is
    // ~1e-8 E0 at the default dt; it is second order and gone at dt/2
    const double coarse = drift(res.dt);
    const double fine = drift(0.5 * res.dt);
    CHECK(fine <= 1e-8 * 0.5 * p.k0 * p.k0);
    CHECK(coarse / fine >= 3.0);
}

TEST_CASE("uniform larmor field precesses an x spinor by omega0 t")
{
    // packet broad and slow enough that the window edges never matter
    const auto g = make_grid(-300.0, 300.0, 6001);
    PacketSpec p;
    p.y0 = 0.0;
    p.sigma_y = 30.0;
    p.k0 = 1e-3;
    const double w = 1.7;
    const auto ham = sample(g, no_potential(), larmor_profile(w, 299.0));
    const double t = std::numbers::pi / (2.0 * w);
    const auto [out, diag] = evolve(init_gaussian(g, p), ham, params(t / 500.0, t));
    const auto s = global_sigma(out);
    CHECK(std::abs(s[0]) < 1e-10);
    // -(w/2) sigma_z turns +x towards -y
    CHECK(s[1] == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(std::abs(s[2]) < 1e-12);

    const auto [quarter, d2] = evolve(init_gaussian(g, p), ham, params(t / 500.0, 0.5 * t));
    const auto q = global_sigma(quarter);
    CHECK(-q[1] / q[0] == doctest::Approx(std::tan(0.5 * w * t)).epsilon(1e-9));
}

TEST_CASE("free gaussian: centre and width follow the analytic law")
{
    const double sigma = 1.0, k0 = 1.0, y0 = -9.5;
    const double t = 15.0 / k0;
    const double dy = 0.005;
    const auto g = make_grid(-70.0, 70.0, static_cast<std::size_t>(140.0 / dy) + 1);
    PacketSpec p;
    p.y0 = y0;
    p.sigma_y = sigma;
    p.k0 = k0;
    const auto ham = sample(g, no_potential(), no_coupling());
    const auto [out, diag] = evolve(init_gaussian(g, p), ham, params(1e-3, t, 1000));
    const double centre = first_moment(out, 1);
    const double width = std::sqrt(first_moment(out, 2) - centre * centre);
    CHECK(std::abs(centre - (y0 + k0 * t)) <= 0.1 * g.dy);
    const double expect = sigma * std::sqrt(1.0 + std::pow(t / (2.0 * sigma * sigma), 2));
    CHECK(width == doctest::Approx(expect).epsilon(0.01));
}

TEST_CASE("boundary contamination aborts")
{
    const auto g = make_grid(-20.0, 20.0, 801);
    PacketSpec p;
    p.y0 = 5.0;
    p.k0 = 3.0;
    const auto ham = sample(g, no_potential(), no_coupling());
    auto ep = params(0.01, 10.0, 10);
    ep.boundary_margin = 2.0;
    ep.boundary_tol = 1e-6;
    try {
        evolve(init_gaussian(g, p), ham, ep);
        FAIL("expected BoundaryContamination");
    } catch (const BoundaryContamination& e) {
        CHECK(e.boundary_norm > 1e-6);
        CHECK(e.time > 0.0);
        CHECK(e.time < 10.0);
    }
}

TEST_CASE("non-finite amplitudes abort")
{
    const auto g = make_grid(-20.0, 20.0, 401);
    PacketSpec p;
    auto psi = init_gaussian(g, p);
    psi.up[200] = cplx(NAN, 0.0);
    const auto ham = sample(g, no_potential(), no_coupling());
    CHECK_THROWS_AS(step(psi, ham, 0.01), NumericalError);
    CHECK_THROWS_AS(evolve(psi, ham, params(0.01, 0.1)), NumericalError);
}

TEST_CASE("auto_resolution rule arithmetic")
{
    PacketSpec p;
    p.y0 = -9.5;
    p.sigma_y = 1.0;
    p.k0 = 4.0;
    const auto pot = rectangular_barrier(2.0, 1.0);
    const auto sf = larmor_profile(0.5, 1.0);
    const auto r = auto_resolution(p, pot, sf, 3.0);
    const double k_max = 4.0 + 6.0 + 2.0;
    CHECK(r.k_max == doctest::Approx(k_max));
    CHECK(r.grid.dy <= 2.0 * std::numbers::pi / (k_max * 20.0));
    CHECK(r.dt == doctest::Approx(0.1 * 2.0 * r.grid.dy * r.grid.dy));
    // D/dy is an integer and the edges sit halfway between nodes
    const double m = 1.0 / r.grid.dy;
    CHECK(m == doctest::Approx(std::round(m)).epsilon(1e-12));
    const double off = (1.0 - r.grid.y_min) / r.grid.dy;
    CHECK(off - std::floor(off) == doctest::Approx(0.5).epsilon(1e-6));
    // reach: packet tails plus k_max t on both sides
    CHECK(r.grid.y_min <= p.y0 - 8.0 - k_max * 3.0);
    CHECK(r.grid.y_max >= p.y0 + 8.0 + k_max * 3.0);

    SUBCASE("k0 doubled shrinks dy by the k_max ratio")
    {
        PacketSpec q = p;
        q.k0 = 8.0;
        const auto r2 = auto_resolution(q, pot, sf, 3.0);
        CHECK(r2.grid.dy <= 2.0 * std::numbers::pi / (r2.k_max * 20.0));
        CHECK(r2.grid.dy < r.grid.dy);
        // halved outright once k0 dominates k_max
        PacketSpec fast = p, faster = p;
        fast.k0 = 400.0;
        fast.sigma_y = 50.0;
        faster.k0 = 800.0;
        faster.sigma_y = 50.0;
        const auto a = auto_resolution(fast, no_potential(), larmor_profile(1e-6, 1.0), 0.0);
        const auto b = auto_resolution(faster, no_potential(), larmor_profile(1e-6, 1.0), 0.0);
        CHECK(b.grid.dy <= 0.5 * a.grid.dy * 1.01);
    }
    SUBCASE("t_final doubled grows the domain")
    {
        const auto r2 = auto_resolution(p, pot, sf, 6.0);
        CHECK(r2.grid.y_max - r2.grid.y_min > r.grid.y_max - r.grid.y_min);
        CHECK(r2.grid.dy == r.grid.dy);
    }
    SUBCASE("cell cap")
    {
        ResolutionRules rules;
        rules.cell_cap = 1000;
        CHECK_THROWS_AS(auto_resolution(p, pot, sf, 3.0, rules), ConfigError);
    }
    SUBCASE("refine keeps the extent and the midpoint alignment")
    {
        const auto f = refine(r, 4, 3.0);
        CHECK(f.grid.dy == doctest::Approx(r.grid.dy / 4));
        CHECK(f.dt == doctest::Approx(r.dt / 4));
        CHECK(f.grid.y_min == doctest::Approx(r.grid.y_min).epsilon(1e-3));
        const double o = (1.0 - f.grid.y_min) / f.grid.dy;
        CHECK(o - std::floor(o) == doctest::Approx(0.5).epsilon(1e-6));
    }
}

TEST_CASE("spin-only integrator reproduces the rotating-frame formula")
{
    auto rabi = [](double x) {
        const double r = std::sqrt(1.0 + x * x);
        const double s = std::sin(0.5 * std::numbers::pi * r) / r;
        return s * s;
    };
    const double D = 1.0, v0 = 3.0;
    const double w_rot = std::numbers::pi * v0 / (2.0 * D);
    for (double x : {0.1, 0.5, 1.0, std::sqrt(3.0), 2.5, 5.0}) {
        for (int sign : {+1, -1}) {
            const double pf = spin_only_flip_probability(x * w_rot, v0, D, sign);
            CHECK(pf == doctest::Approx(rabi(x)).epsilon(1e-6).scale(1.0));
        }
    }
    CHECK(spin_only_flip_probability(0.0, v0, D, +1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(spin_only_flip_probability(std::sqrt(3.0) * w_rot, v0, D, +1) < 1e-6);
}

TEST_CASE("snapshot round trip")
{
    const auto dir = std::filesystem::temp_directory_path() / "qclock_snap_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "run.spinor";
    const auto g = make_grid(-20.0, 20.0, 401);
    PacketSpec p;
    p.y0 = -3.0;
    p.spin_axis = {0.0, 1.0, 0.0};
    const auto ham = sample(g, rectangular_barrier(0.4, 1.0), rotating_field_profile(1.0, 1.0, 1.0));
    std::vector<SpinorField> kept;
    {
        SnapshotWriter w(path, g);
        std::vector<Observer> obs{w.observer(), [&](std::size_t, double, const SpinorField& f) { kept.push_back(f); }};
        evolve(init_gaussian(g, p), ham, params(0.01, 0.25, 10), obs);
    }
    const auto snaps = read_snapshots(path);
    REQUIRE(snaps.size() == kept.size());
    CHECK(snaps.size() == 4);
    CHECK(snaps.back().step == 25);
    CHECK(snaps.back().time == 0.25);
    CHECK(snaps[1].field.grid.n_points == g.n_points);
    CHECK(snaps[1].field.grid.dy == g.dy);
    for (std::size_t i = 0; i < snaps.size(); ++i) {
        CHECK(snaps[i].field.up == kept[i].up);
        CHECK(snaps[i].field.down == kept[i].down);
    }
    // header line
    std::ifstream in(path, std::ios::binary);
    std::string header;
    std::getline(in, header);
    CHECK(header.rfind("SPINOR1D v1 n_points=401 dy=", 0) == 0);
    std::filesystem::remove_all(dir);
}
