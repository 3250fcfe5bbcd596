#include "qclock/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

#include "qclock/errors.hpp"
#include "qclock/oracles.hpp"

namespace qclock {

using nlohmann::json;

std::string to_string(Coupling c)
{
    return c == Coupling::larmor ? "larmor" : "rotating";
}

std::string to_string(SweepParameter p)
{
    return p == SweepParameter::omega0_over_E0 ? "omega0_over_E0" : "U0_over_E0";
}

std::string to_string(RowStatus s)
{
    switch (s) {
    case RowStatus::ok: return "ok";
    case RowStatus::boundary_contamination: return "boundary_contamination";
    case RowStatus::numerical_failure: return "numerical_failure";
    case RowStatus::no_transmission: return "no_transmission";
    }
    return "unknown";
}

namespace {

void require(bool ok, const std::string& field, const std::string& what)
{
    if (!ok) throw ConfigError(field + ": " + what);
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

std::vector<double> linspace(double a, double b, int n)
{
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

std::vector<double> logspace(double a, double b, int n)
{
    std::vector<double> v(n);
    const double la = std::log(a), lb = std::log(b);
    for (int i = 0; i < n; ++i) v[i] = std::exp(la + (lb - la) * i / (n - 1));
    v.front() = a;
    v.back() = b;
    return v;
}

}  // namespace

void validate(const ExperimentConfig& cfg)
{
    const auto& p = cfg.physics;
    require(finite_positive(p.D), "physics.D", "must be positive");
    require(std::isfinite(p.L) && p.L > 0.0, "physics.L", "must be positive");
    if (p.coupling == Coupling::rotating) require(p.L >= p.D, "physics.L", "rotating field needs L >= D");
    require(finite_positive(p.sigma_y_over_D), "physics.sigma_y_over_D", "must be positive");
    require(std::isfinite(p.y0_over_D), "physics.y0_over_D", "must be finite");
    require(finite_positive(p.measure_time_over_D_per_v0), "physics.measure_time_over_D_per_v0", "must be positive");
    require(p.spin_sign == 1 || p.spin_sign == -1, "physics.spin_sign", "must be +1 or -1");
    const double len = std::sqrt(p.spin_axis[0] * p.spin_axis[0] + p.spin_axis[1] * p.spin_axis[1] +
                                 p.spin_axis[2] * p.spin_axis[2]);
    require(std::abs(len - 1.0) <= 1e-12, "physics.spin_axis", "must be a unit vector");
    require(std::isfinite(p.U0_over_E0) && p.U0_over_E0 >= 0.0, "physics.U0_over_E0", "must be >= 0");

    const auto& s = cfg.sweep;
    require(!s.values.empty(), "sweep.values", "sweep list is empty");
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        require(std::isfinite(s.values[i]), "sweep.values[" + std::to_string(i) + "]", "must be finite");
        if (i > 0)
            require(s.values[i] > s.values[i - 1], "sweep.values[" + std::to_string(i) + "]",
                    "values must be strictly increasing");
    }
    if (s.parameter == SweepParameter::omega0_over_E0) {
        require(finite_positive(p.omega0), "physics.omega0", "fixed coupling must be positive");
        require(s.values.front() > 0.0, "sweep.values", "omega0_over_E0 must be positive");
    } else {
        require(finite_positive(p.E0), "physics.E0", "fixed energy must be positive");
        require(finite_positive(p.omega0_over_E0), "physics.omega0_over_E0", "must be positive");
        require(s.values.front() >= 0.0, "sweep.values", "U0_over_E0 must be >= 0");
    }

    const auto& n = cfg.numerics;
    require(finite_positive(n.ppw), "numerics.ppw", "must be positive");
    require(finite_positive(n.eta), "numerics.eta", "must be positive");
    require(n.cell_cap >= kMinGridPoints, "numerics.cell_cap", "must be at least 16");
    require(finite_positive(n.boundary_tol) && n.boundary_tol <= 1.0, "numerics.boundary_tol", "must be in (0, 1]");
}

std::vector<std::string> preset_names()
{
    return {"fig1", "fig2", "fig3", "fig3-down", "fig5", "fig5-w0.1-down", "fig5-w0.5-up", "fig5-w0.5-down"};
}

std::vector<std::string> figure_presets(const std::string& figure)
{
    if (figure == "fig1") return {"fig1"};
    if (figure == "fig2") return {"fig2"};
    if (figure == "fig3") return {"fig3", "fig3-down"};
    if (figure == "fig5") return {"fig5", "fig5-w0.1-down", "fig5-w0.5-up", "fig5-w0.5-down"};
    throw ConfigError("unknown figure '" + figure + "'");
}

ExperimentConfig preset(const std::string& name)
{
    ExperimentConfig c;
    c.preset = name;
    auto& p = c.physics;
    if (name == "fig1") {
        // Free Larmor clock; v0 varies at fixed omega0.
        p.coupling = Coupling::larmor;
        p.omega0 = 6.5;
        p.sigma_y_over_D = 1.0;
        p.y0_over_D = -9.5;
        p.measure_time_over_D_per_v0 = 15.0;
        c.sweep = {SweepParameter::omega0_over_E0, linspace(0.01, 0.13, 25)};
    } else if (name == "fig2") {
        p.coupling = Coupling::larmor;
        p.E0 = 2.0;
        p.omega0_over_E0 = 0.1;
        p.sigma_y_over_D = 10.0;
        p.y0_over_D = -50.0;
        p.measure_time_over_D_per_v0 = 120.0;
        c.sweep = {SweepParameter::U0_over_E0, linspace(0.0, 2.0, 31)};
    } else if (name == "fig3" || name == "fig3-down") {
        p.coupling = Coupling::rotating;
        p.L = 2.0;
        p.omega0 = 30.0;
        p.sigma_y_over_D = 1.0;
        p.y0_over_D = -9.5;
        p.measure_time_over_D_per_v0 = 15.0;
        p.spin_sign = name == "fig3" ? +1 : -1;
        c.sweep = {SweepParameter::omega0_over_E0, logspace(0.01, 6.2, 25)};
    } else if (name.rfind("fig5", 0) == 0) {
        double w = 0.1;
        int sign = +1;
        if (name == "fig5" || name == "fig5-w0.1-up") {
        } else if (name == "fig5-w0.1-down") {
            sign = -1;
        } else if (name == "fig5-w0.5-up") {
            w = 0.5;
        } else if (name == "fig5-w0.5-down") {
            w = 0.5;
            sign = -1;
        } else {
            throw ConfigError("unknown preset '" + name + "'");
        }
        p.coupling = Coupling::rotating;
        p.L = 1.0;
        p.E0 = 2.0;
        p.omega0_over_E0 = w;
        p.sigma_y_over_D = 10.0;
        p.y0_over_D = -50.0;
        p.spin_sign = sign;
        p.measure_time_over_D_per_v0 = 120.0;
        c.sweep = {SweepParameter::U0_over_E0, linspace(0.0, 2.0, 31)};
    } else {
        throw ConfigError("unknown preset '" + name + "'");
    }
    validate(c);
    return c;
}

json to_json(const ExperimentConfig& cfg)
{
    const auto& p = cfg.physics;
    const auto& n = cfg.numerics;
    json j;
    j["preset"] = cfg.preset;
    j["physics"] = {
        {"coupling", to_string(p.coupling)},
        {"D", p.D},
        {"L", p.L},
        {"omega0", p.omega0},
        {"E0", p.E0},
        {"omega0_over_E0", p.omega0_over_E0},
        {"U0_over_E0", p.U0_over_E0},
        {"sigma_y_over_D", p.sigma_y_over_D},
        {"y0_over_D", p.y0_over_D},
        {"spin_axis", p.spin_axis},
        {"spin_sign", p.spin_sign},
        {"measure_time_over_D_per_v0", p.measure_time_over_D_per_v0},
    };
    j["numerics"] = {
        {"ppw", n.ppw},
        {"eta", n.eta},
        {"cell_cap", n.cell_cap},
        {"boundary_tol", n.boundary_tol},
    };
    j["sweep"] = {{"parameter", to_string(cfg.sweep.parameter)}, {"values", cfg.sweep.values}};
    j["output"] = cfg.output;
    return j;
}

namespace {

class Reader {
public:
    Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path))
    {
        if (!obj_.is_object()) throw ConfigError(where() + ": expected an object");
    }

    void allow(std::initializer_list<const char*> keys)
    {
        std::set<std::string> ok(keys.begin(), keys.end());
        for (const auto& item : obj_.items())
            if (!ok.count(item.key())) throw ConfigError(field(item.key()) + ": unknown key");
    }

    bool has(const char* key) const { return obj_.contains(key); }

    void number(const char* key, double& out) const
    {
        if (!has(key)) return;
        const auto& v = obj_.at(key);
        if (!v.is_number()) throw ConfigError(field(key) + ": expected a number");
        out = v.get<double>();
    }

    void integer(const char* key, int& out) const
    {
        if (!has(key)) return;
        const auto& v = obj_.at(key);
        if (!v.is_number_integer()) throw ConfigError(field(key) + ": expected an integer");
        out = v.get<int>();
    }

    void count(const char* key, std::size_t& out) const
    {
        if (!has(key)) return;
        const auto& v = obj_.at(key);
        if (!v.is_number_unsigned()) throw ConfigError(field(key) + ": expected a non-negative integer");
        out = v.get<std::size_t>();
    }

    void text(const char* key, std::string& out) const
    {
        if (!has(key)) return;
        const auto& v = obj_.at(key);
        if (!v.is_string()) throw ConfigError(field(key) + ": expected a string");
        out = v.get<std::string>();
    }

    std::vector<double> numbers(const char* key) const
    {
        const auto& v = obj_.at(key);
        if (!v.is_array()) throw ConfigError(field(key) + ": expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number())
                throw ConfigError(field(key) + "[" + std::to_string(i) + "]: expected a number");
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    Reader child(const char* key) const { return Reader(obj_.at(key), field(key)); }
    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    std::string where() const { return path_.empty() ? "config" : path_; }
    const json& obj_;
    std::string path_;
};

}  // namespace

ExperimentConfig config_from_json(const json& j)
{
    Reader root(j, "");
    root.allow({"preset", "physics", "numerics", "sweep", "output"});

    ExperimentConfig cfg;
    std::string preset_name = "custom";
    root.text("preset", preset_name);
    if (preset_name != "custom") {
        const auto names = preset_names();
        if (std::find(names.begin(), names.end(), preset_name) == names.end())
            throw ConfigError("preset: unknown preset '" + preset_name + "'");
        cfg = preset(preset_name);
    }
    cfg.preset = preset_name;

    if (root.has("physics")) {
        auto r = root.child("physics");
        r.allow({"coupling", "D", "L", "omega0", "E0", "omega0_over_E0", "U0_over_E0", "sigma_y_over_D",
                 "y0_over_D", "spin_axis", "spin_sign", "measure_time_over_D_per_v0"});
        auto& p = cfg.physics;
        if (r.has("coupling")) {
            std::string c;
            r.text("coupling", c);
            if (c == "larmor")
                p.coupling = Coupling::larmor;
            else if (c == "rotating")
                p.coupling = Coupling::rotating;
            else
                throw ConfigError("physics.coupling: expected \"larmor\" or \"rotating\"");
        }
        r.number("D", p.D);
        r.number("L", p.L);
        r.number("omega0", p.omega0);
        r.number("E0", p.E0);
        r.number("omega0_over_E0", p.omega0_over_E0);
        r.number("U0_over_E0", p.U0_over_E0);
        r.number("sigma_y_over_D", p.sigma_y_over_D);
        r.number("y0_over_D", p.y0_over_D);
        r.number("measure_time_over_D_per_v0", p.measure_time_over_D_per_v0);
        r.integer("spin_sign", p.spin_sign);
        if (r.has("spin_axis")) {
            const auto axis = r.numbers("spin_axis");
            if (axis.size() != 3) throw ConfigError("physics.spin_axis: expected 3 components");
            p.spin_axis = {axis[0], axis[1], axis[2]};
        }
    }
    if (root.has("numerics")) {
        auto r = root.child("numerics");
        r.allow({"ppw", "eta", "cell_cap", "boundary_tol"});
        r.number("ppw", cfg.numerics.ppw);
        r.number("eta", cfg.numerics.eta);
        r.count("cell_cap", cfg.numerics.cell_cap);
        r.number("boundary_tol", cfg.numerics.boundary_tol);
    }
    if (root.has("sweep")) {
        auto r = root.child("sweep");
        r.allow({"parameter", "values"});
        if (!r.has("parameter") || !r.has("values"))
            throw ConfigError("sweep: needs both \"parameter\" and \"values\"");
        std::string name;
        r.text("parameter", name);
        if (name == "omega0_over_E0")
            cfg.sweep.parameter = SweepParameter::omega0_over_E0;
        else if (name == "U0_over_E0")
            cfg.sweep.parameter = SweepParameter::U0_over_E0;
        else
            throw ConfigError("sweep.parameter: expected \"omega0_over_E0\" or \"U0_over_E0\"");
        cfg.sweep.values = r.numbers("values");
    } else if (preset_name == "custom") {
        throw ConfigError("sweep: missing (custom configs must define exactly one sweep)");
    }
    root.text("output", cfg.output);
    validate(cfg);
    return cfg;
}

ExperimentConfig read_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

void write_config(const ExperimentConfig& cfg, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write config file " + path.string());
    out << to_json(cfg).dump(2) << "\n";
}

PointSetup setup_point(const ExperimentConfig& cfg, double value)
{
    const auto& p = cfg.physics;
    PointSetup s;
    s.sweep_value = value;
    double w_ratio = p.omega0_over_E0;
    double u_ratio = p.U0_over_E0;
    if (cfg.sweep.parameter == SweepParameter::omega0_over_E0) {
        w_ratio = value;
        s.omega0 = p.omega0;
        s.E0 = p.omega0 / w_ratio;
    } else {
        u_ratio = value;
        s.E0 = p.E0;
        s.omega0 = w_ratio * p.E0;
    }
    s.U0 = u_ratio * s.E0;
    s.k0 = std::sqrt(2.0 * s.E0);
    s.v0 = s.k0;
    s.t_final = p.measure_time_over_D_per_v0 * p.D / s.v0;

    s.packet.y0 = p.y0_over_D * p.D;
    s.packet.sigma_y = p.sigma_y_over_D * p.D;
    s.packet.k0 = s.k0;
    s.packet.spin_axis = p.spin_axis;
    s.packet.spin_sign = p.spin_sign;

    if (p.coupling == Coupling::larmor) {
        s.potential = rectangular_barrier(s.U0, p.D);
        s.coupling = larmor_profile(s.omega0, p.D);
        s.y_cut = p.D;
    } else {
        s.potential = rectangular_barrier(s.U0, p.L);
        s.coupling = rotating_field_profile(s.omega0, p.D, p.L);
        const bool has_barrier = cfg.sweep.parameter == SweepParameter::U0_over_E0 || p.U0_over_E0 > 0.0;
        s.y_cut = has_barrier ? p.L : p.D;
    }
    return s;
}

Resolution resolution_for(const ExperimentConfig& cfg, const PointSetup& s)
{
    ResolutionRules rules;
    rules.ppw = cfg.numerics.ppw;
    rules.eta = cfg.numerics.eta;
    rules.cell_cap = cfg.numerics.cell_cap;
    return auto_resolution(s.packet, s.potential, s.coupling, s.t_final, rules);
}

OracleColumns oracle_columns(const ExperimentConfig& cfg, const PointSetup& s)
{
    OracleColumns o;
    const double D = cfg.physics.D;
    if (cfg.physics.coupling == Coupling::larmor) {
        const auto pw = oracle::packet_averaged_larmor(s.k0, s.packet.sigma_y, s.U0, s.omega0, D, kGaussHermiteOrder);
        o.names = {"oracle_v0", "oracle_free_flight_time", "oracle_tau_y", "oracle_tau_z", "oracle_transmission"};
        o.values = {s.v0, oracle::free_flight_time(D, s.v0), pw.tau_y, pw.tau_z, pw.transmission};
    } else {
        const auto rp = oracle::make_rabi_params(s.omega0, s.v0, D);
        o.names = {"oracle_v0", "oracle_omega_ratio", "oracle_flip_prob"};
        o.values = {s.v0, rp.omega0 / rp.omega_rot, oracle::rabi_flip_probability(rp)};
    }
    return o;
}

SweepRow simulate_point(const ExperimentConfig& cfg, const PointSetup& s, const Resolution& res,
                        const RunOptions& opts, std::size_t row_index)
{
    SweepRow row;
    row.sweep_value = s.sweep_value;
    row.n_points = res.grid.n_points;
    row.dy = res.grid.dy;
    // the step actually taken; the rule value is rounded down to hit t_final
    row.dt = res.steps > 0 ? s.t_final / static_cast<double>(res.steps) : res.dt;
    if (opts.overlay_oracle) row.oracle = oracle_columns(cfg, s);

    try {
        const auto ham = sample(res.grid, s.potential, s.coupling);
        auto field = init_gaussian(res.grid, s.packet);

        EvolveParams ep;
        ep.dt = res.dt;
        ep.t_final = s.t_final;
        ep.snapshot_stride = std::max<std::size_t>(1, res.steps / std::max<std::size_t>(1, opts.snapshots_per_run));
        ep.boundary_margin = s.packet.sigma_y;
        ep.boundary_tol = cfg.numerics.boundary_tol;

        const double sz0 = global_sigma(field)[2];
        const double e0 = opts.track_energy ? expected_energy(field, ham) : 0.0;
        std::vector<Observer> observers;
        observers.emplace_back([&](std::size_t, double, const SpinorField& f) {
            row.sz_drift = std::max(row.sz_drift, std::abs(global_sigma(f)[2] - sz0));
            row.readout.diagnostics.norm_drift = std::max(row.readout.diagnostics.norm_drift, std::abs(norm(f) - 1.0));
            if (opts.track_energy)
                row.energy_drift = std::max(row.energy_drift, std::abs(expected_energy(f, ham) - e0));
        });
        std::optional<SnapshotWriter> writer;
        if (opts.snapshot_dir) {
            std::ostringstream name;
            name << "row_" << std::setw(3) << std::setfill('0') << row_index << ".spinor";
            writer.emplace(*opts.snapshot_dir / name.str(), res.grid);
            observers.push_back(writer->observer());
        }

        auto [final_state, diag] = evolve(std::move(field), ham, ep, observers);
        row.readout.diagnostics = diag;

        auto& out = row.readout;
        out.transmission = transmission_probability(final_state, s.y_cut);
        if (cfg.physics.coupling == Coupling::larmor) {
            const auto spins = spin_expectations(final_state, s.y_cut);
            const auto times = larmor_times(spins, s.omega0);
            out.tau_y = times.tau_y;
            out.tau_z = times.tau_z;
            row.has_larmor = true;
        } else {
            out.flip_prob = spin_flip_probability(final_state, s.y_cut, s.coupling.field_direction(cfg.physics.D),
                                                  s.packet.spin_sign);
            row.has_flip = true;
        }
        out.mean_kinetic_energy = mean_kinetic_energy_transmitted(final_state, s.y_cut);
    } catch (const BoundaryContamination& e) {
        row.status = RowStatus::boundary_contamination;
        row.message = e.what();
        row.readout.diagnostics.boundary_norm = e.boundary_norm;
    } catch (const NoTransmission& e) {
        row.status = RowStatus::no_transmission;
        row.message = e.what();
    } catch (const std::exception& e) {
        row.status = RowStatus::numerical_failure;
        row.message = e.what();
    }
    return row;
}

namespace {

std::string utc_timestamp()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

}  // namespace

SweepResult run(const ExperimentConfig& cfg, const RunOptions& opts)
{
    validate(cfg);
    SweepResult result;
    result.config = cfg;
    const std::size_t n = cfg.sweep.values.size();
    result.rows.resize(n);
    if (opts.snapshot_dir) std::filesystem::create_directories(*opts.snapshot_dir);

    std::vector<double> wall(n, 0.0);
    std::vector<std::size_t> steps(n, 0);
    auto job = [&](std::size_t i) {
        const auto s = setup_point(cfg, cfg.sweep.values[i]);
        Resolution res;
        try {
            res = resolution_for(cfg, s);
        } catch (const std::exception& e) {
            SweepRow row;
            row.sweep_value = s.sweep_value;
            row.status = RowStatus::numerical_failure;
            row.message = e.what();
            if (opts.overlay_oracle) row.oracle = oracle_columns(cfg, s);
            result.rows[i] = std::move(row);
            return;
        }
        steps[i] = res.steps;
        result.rows[i] = simulate_point(cfg, s, res, opts, i);
        wall[i] = result.rows[i].readout.diagnostics.wall_time;
    };

    const unsigned threads = std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(n)));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) job(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) job(i);
            });
        for (auto& th : pool) th.join();
    }

    json rows = json::array();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = result.rows[i];
        rows.push_back({{"sweep_value", r.sweep_value},
                        {"status", to_string(r.status)},
                        {"message", r.message},
                        {"n_points", r.n_points},
                        {"dy", r.dy},
                        {"dt", r.dt},
                        {"steps", steps[i]},
                        {"wall_time", wall[i]},
                        {"sz_drift", r.sz_drift}});
    }
    result.metadata = {{"code_version", kCodeVersion},
                       {"timestamp", utc_timestamp()},
                       {"config", to_json(cfg)},
                       {"sweep_points", n},
                       {"gauss_hermite_order", kGaussHermiteOrder},
                       {"threads", threads},
                       {"rows", rows}};
    return result;
}

std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string csv_header(const SweepResult& result)
{
    std::string h = "sweep_param,sweep_value,tau_y,tau_z,transmission,flip_prob,mean_kinetic_energy,norm_drift,"
                    "boundary_norm,status";
    for (const auto& r : result.rows) {
        if (!r.oracle) continue;
        for (const auto& name : r.oracle->names) h += "," + name;
        break;
    }
    return h;
}

std::string to_csv(const SweepResult& result)
{
    std::string out = csv_header(result) + "\n";
    const std::string param = to_string(result.config.sweep.parameter);
    const bool overlay = !result.rows.empty() && result.rows.front().oracle.has_value();
    for (const auto& r : result.rows) {
        const bool ok = r.status == RowStatus::ok;
        const auto& o = r.readout;
        auto field = [&](bool present, double v) { return present ? format_double(v) : std::string(); };
        out += param;
        out += "," + format_double(r.sweep_value);
        out += "," + field(ok && r.has_larmor, o.tau_y);
        out += "," + field(ok && r.has_larmor, o.tau_z);
        out += "," + field(ok, o.transmission);
        out += "," + field(ok && r.has_flip, o.flip_prob);
        out += "," + field(ok, o.mean_kinetic_energy);
        out += "," + format_double(o.diagnostics.norm_drift);
        out += "," + format_double(o.diagnostics.boundary_norm);
        out += "," + to_string(r.status);
        if (overlay && r.oracle)
            for (double v : r.oracle->values) out += "," + format_double(v);
        out += "\n";
    }
    return out;
}

void write_csv(const SweepResult& result, const std::filesystem::path& path)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        out << to_csv(result);
    }
    std::ofstream meta(path.string() + ".meta.json", std::ios::binary);
    meta << result.metadata.dump(2) << "\n";
}

}  // namespace qclock
