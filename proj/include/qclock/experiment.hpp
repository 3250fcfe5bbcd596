#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qclock/fields.hpp"
#include "qclock/grid.hpp"
#include "qclock/observables.hpp"
#include "qclock/propagator.hpp"

namespace qclock {

enum class Coupling { larmor, rotating };
enum class SweepParameter { omega0_over_E0, U0_over_E0 };

/// Physics in natural units (hbar = m = 1). All experiment inputs are ratios
/// except the absolute scale: `omega0` is held fixed when the sweep runs over
/// omega0_over_E0 (E0 follows), `E0` is held fixed otherwise.
struct PhysicsConfig {
    Coupling coupling = Coupling::larmor;
    double D = 1.0;
    double L = 1.0;
    double omega0 = 1.0;
    double E0 = 1.0;
    double omega0_over_E0 = 0.1;
    double U0_over_E0 = 0.0;
    double sigma_y_over_D = 1.0;
    double y0_over_D = -9.5;
    Vec3 spin_axis{1.0, 0.0, 0.0};
    int spin_sign = +1;
    double measure_time_over_D_per_v0 = 15.0;

    bool operator==(const PhysicsConfig&) const = default;
};

struct NumericsConfig {
    double ppw = 20.0;
    double eta = 0.1;
    std::size_t cell_cap = std::size_t{1} << 22;
    double boundary_tol = 1e-6;

    bool operator==(const NumericsConfig&) const = default;
};

struct SweepConfig {
    SweepParameter parameter = SweepParameter::U0_over_E0;
    std::vector<double> values;

    bool operator==(const SweepConfig&) const = default;
};

struct ExperimentConfig {
    std::string preset = "custom";
    PhysicsConfig physics;
    NumericsConfig numerics;
    SweepConfig sweep;
    std::string output;

    bool operator==(const ExperimentConfig&) const = default;
};

std::string to_string(Coupling c);
std::string to_string(SweepParameter p);

/// Throws ConfigError naming the offending field.
void validate(const ExperimentConfig& cfg);

/// Names accepted by preset(): fig1, fig2, fig3, fig3-down, fig5 (= fig5-w0.1-up),
/// fig5-w0.1-down, fig5-w0.5-up, fig5-w0.5-down.
std::vector<std::string> preset_names();
ExperimentConfig preset(const std::string& name);
/// All runs that make up one figure (e.g. four for fig5).
std::vector<std::string> figure_presets(const std::string& figure);

nlohmann::json to_json(const ExperimentConfig& cfg);
/// Rejects unknown keys and wrong types with the JSON path of the field.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig read_config(const std::filesystem::path& path);
void write_config(const ExperimentConfig& cfg, const std::filesystem::path& path);

/// Fully resolved physical setup of one sweep point.
struct PointSetup {
    double sweep_value = 0.0;
    double E0 = 0.0;
    double omega0 = 0.0;
    double U0 = 0.0;
    double k0 = 0.0;
    double v0 = 0.0;
    double t_final = 0.0;
    double y_cut = 0.0;
    PacketSpec packet;
    PotentialProfile potential;
    SpinCouplingProfile coupling;
};

PointSetup setup_point(const ExperimentConfig& cfg, double sweep_value);
Resolution resolution_for(const ExperimentConfig& cfg, const PointSetup& setup);

struct OracleColumns {
    std::vector<std::string> names;
    std::vector<double> values;
};

/// Closed-form overlay values for one point (free flight and plane-wave
/// Larmor readout for the Larmor clock; rotating-field Rabi formula otherwise).
OracleColumns oracle_columns(const ExperimentConfig& cfg, const PointSetup& setup);

enum class RowStatus { ok, boundary_contamination, numerical_failure, no_transmission };
std::string to_string(RowStatus s);

struct SweepRow {
    double sweep_value = 0.0;
    RowStatus status = RowStatus::ok;
    std::string message;
    ClockReadout readout;
    bool has_larmor = false;  // tau_y, tau_z valid
    bool has_flip = false;    // flip_prob valid
    double sz_drift = 0.0;    // max |<sigma_z>(t) - <sigma_z>(0)|
    double energy_drift = 0.0;
    std::size_t n_points = 0;
    double dy = 0.0;
    double dt = 0.0;
    std::optional<OracleColumns> oracle;
};

struct RunOptions {
    unsigned threads = 1;
    bool overlay_oracle = false;
    std::optional<std::filesystem::path> snapshot_dir;
    std::size_t snapshots_per_run = 200;
    bool track_energy = false;
};

/// Simulates one point on an explicit resolution. Numerical failures are
/// captured in the row status.
SweepRow simulate_point(const ExperimentConfig& cfg, const PointSetup& setup, const Resolution& res,
                        const RunOptions& opts = {}, std::size_t row_index = 0);

struct SweepResult {
    ExperimentConfig config;
    std::vector<SweepRow> rows;
    nlohmann::json metadata;
};

/// Runs every sweep value (rows in parallel when opts.threads > 1); rows come
/// back in the order of config.sweep.values.
SweepResult run(const ExperimentConfig& cfg, const RunOptions& opts = {});

std::string csv_header(const SweepResult& result);
std::string to_csv(const SweepResult& result);
/// Writes the CSV and a `<path>.meta.json` sidecar with config echo and per-row
/// resolution data.
void write_csv(const SweepResult& result, const std::filesystem::path& path);

/// Shortest decimal that round-trips the double.
std::string format_double(double v);

inline constexpr const char* kCodeVersion = "qclock 1.0.0";
inline constexpr int kGaussHermiteOrder = 41;

}  // namespace qclock
