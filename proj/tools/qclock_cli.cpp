// qclock: sweep runner for the Larmor and rotating-field clocks.

#include <chrono>
#include <iostream>

#include <CLI11.hpp>

#include "qclock/errors.hpp"
#include "qclock/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitAllFailed = 3;

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"qclock - spin-1/2 wave packet clocks"};
    app.require_subcommand(1);

    std::string preset_name, config_path, out_path, snapshot_dir;
    unsigned threads = 1;
    double ppw = 0.0;
    bool overlay = false;
    bool quiet = false;

    auto* run = app.add_subcommand("run", "run a sweep and write CSV");
    auto* src = run->add_option_group("source");
    src->add_option("--preset", preset_name, "built-in preset");
    src->add_option("--config", config_path, "JSON config file");
    src->require_option(1);
    run->add_option("--out", out_path, "CSV output path (default: config output)");
    run->add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 1024u));
    run->add_option("--ppw", ppw, "points per shortest wavelength (override)")->check(CLI::PositiveNumber);
    run->add_option("--dump-snapshots", snapshot_dir, "write binary spinor snapshots per row");
    run->add_flag("--overlay-oracle", overlay, "add oracle_* columns");
    run->add_flag("-q,--quiet", quiet, "no per-row log");

    auto* list = app.add_subcommand("presets", "list preset names");

    std::string dump_name, dump_out;
    auto* dump = app.add_subcommand("write-config", "write a preset as JSON");
    dump->add_option("preset", dump_name)->required();
    dump->add_option("out", dump_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*list) {
            for (const auto& n : qclock::preset_names()) std::cout << n << "\n";
            return 0;
        }
        if (*dump) {
            qclock::write_config(qclock::preset(dump_name), dump_out);
            return 0;
        }

        auto cfg = config_path.empty() ? qclock::preset(preset_name) : qclock::read_config(config_path);
        if (ppw > 0.0) cfg.numerics.ppw = ppw;
        if (!out_path.empty()) cfg.output = out_path;
        if (cfg.output.empty()) throw qclock::ConfigError("output: no --out given and config has no output path");
        qclock::validate(cfg);

        qclock::RunOptions opts;
        opts.threads = threads;
        opts.overlay_oracle = overlay;
        if (!snapshot_dir.empty()) opts.snapshot_dir = snapshot_dir;

        const auto t0 = std::chrono::steady_clock::now();
        const auto result = qclock::run(cfg, opts);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        qclock::write_csv(result, cfg.output);

        std::size_t failed = 0;
        for (const auto& r : result.rows) {
            if (r.status != qclock::RowStatus::ok) ++failed;
            if (!quiet)
                std::cerr << qclock::to_string(cfg.sweep.parameter) << "=" << r.sweep_value << "  "
                          << qclock::to_string(r.status) << "  n=" << r.n_points << "  wall="
                          << r.readout.diagnostics.wall_time << "s" << (r.message.empty() ? "" : "  " + r.message)
                          << "\n";
        }
        if (!quiet) std::cerr << result.rows.size() << " rows, " << failed << " failed, " << secs << " s\n";
        if (failed == result.rows.size()) return kExitAllFailed;
        return 0;
    } catch (const qclock::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
