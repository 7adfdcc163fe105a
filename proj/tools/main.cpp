#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gridlock/config.hpp"
#include "gridlock/errors.hpp"
#include "gridlock/harness.hpp"
#include "gridlock/small_signal.hpp"
#include "gridlock/trace_io.hpp"
#include "gridlock/validation.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Exit codes: 0 success, 1 usage/config error, 2 validation failure,
// 3 numerical divergence. Nothing else.
constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kValidationFailure = 2;
constexpr int kDivergence = 3;

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::vector<std::string> overrides;
};

json load_config(const CommonOpts& opts) {
    json doc = gridlock::load_json_file(opts.config_path);
    for (const std::string& ov : opts.overrides) {
        gridlock::apply_override(doc, ov);
    }
    return doc;
}

void ensure_out_dir(const std::string& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir)) {
        throw gridlock::ConfigError("cannot create output directory: " + out_dir);
    }
}

int cmd_run(const CommonOpts& opts) {
    const json doc = load_config(opts);
    const gridlock::RunConfig config = gridlock::run_config_from_json(doc);
    ensure_out_dir(opts.out_dir);

    const gridlock::RunTrace trace = gridlock::run(config);
    gridlock::write_file((fs::path(opts.out_dir) / "trace.csv").string(),
                         gridlock::trace_csv(trace));
    // Effective config (overrides applied) goes next to the trace.
    gridlock::write_file((fs::path(opts.out_dir) / "run_config.json").string(),
                         gridlock::run_config_to_json(config).dump(2) + "\n");
    return kOk;
}

int cmd_sweep(const CommonOpts& opts) {
    const json doc = load_config(opts);
    if (!doc.contains("suite")) {
        throw gridlock::ConfigError("sweep config: missing field 'suite'");
    }
    const gridlock::Suite suite = gridlock::suite_from_name(doc["suite"].get<std::string>());
    ensure_out_dir(opts.out_dir);

    const gridlock::SweepReport report = gridlock::paper_sweep(suite);
    for (const gridlock::SweepCell& cell : report.cells) {
        const std::string name = "trace_" + std::string(gridlock::estimator_name(cell.estimator)) +
                                 "_" + cell.label + ".csv";
        gridlock::write_file((fs::path(opts.out_dir) / name).string(),
                             gridlock::trace_csv(cell.trace));
    }
    gridlock::write_file((fs::path(opts.out_dir) / "metrics.csv").string(),
                         gridlock::metrics_csv(gridlock::sweep_metrics_rows(report)));

    for (const gridlock::SweepCheck& check : report.checks) {
        std::cout << (check.pass ? "PASS" : "FAIL") << "  " << check.name;
        if (!check.detail.empty()) {
            std::cout << "  [" << check.detail << "]";
        }
        std::cout << "\n";
    }
    return kOk;
}

int cmd_bode(const CommonOpts& opts) {
    const json doc = load_config(opts);
    const gridlock::BodeConfig config = gridlock::bode_config_from_json(doc);
    ensure_out_dir(opts.out_dir);

    const std::vector<double> grid =
        gridlock::log_spaced(config.omega_min, config.omega_max, config.points);
    std::vector<gridlock::BodeRow> rows;
    rows.reserve(grid.size() * config.kinds.size());
    for (gridlock::TfKind kind : config.kinds) {
        const gridlock::RationalTf tf = gridlock::build_tf(kind, config.k, config.d);
        const std::vector<double> mags = gridlock::bode_magnitude(tf, grid);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            rows.push_back({grid[i], std::string(gridlock::tf_kind_name(kind)), mags[i]});
        }
    }
    gridlock::write_file((fs::path(opts.out_dir) / "bode.csv").string(), gridlock::bode_csv(rows));
    return kOk;
}

int cmd_validate(const std::vector<std::string>& criteria) {
    const auto results = gridlock::run_acceptance(criteria);
    bool all_pass = true;
    for (const gridlock::CriterionResult& r : results) {
        std::cout << (r.passed ? "PASS" : "FAIL") << "  " << r.name << "  [" << r.detail << "]\n";
        all_pass &= r.passed;
    }
    std::cout << (all_pass ? "all criteria passed" : "validation FAILED") << "\n";
    return all_pass ? kOk : kValidationFailure;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Grid-synchronization FLL simulation toolkit"};
    app.require_subcommand(1);

    CommonOpts run_opts;
    CLI::App* run_cmd = app.add_subcommand("run", "Run one estimator over one scenario");
    run_cmd->add_option("--config", run_opts.config_path, "JSON config")->required();
    run_cmd->add_option("--out", run_opts.out_dir, "output directory");
    run_cmd->add_option("--set", run_opts.overrides, "config override key.path=value");

    CommonOpts sweep_opts;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run a comparison suite");
    sweep_cmd->add_option("--config", sweep_opts.config_path, "JSON config naming a suite")->required();
    sweep_cmd->add_option("--out", sweep_opts.out_dir, "output directory");
    sweep_cmd->add_option("--set", sweep_opts.overrides, "config override key.path=value");

    CommonOpts bode_opts;
    CLI::App* bode_cmd = app.add_subcommand("bode", "Tabulate closed-loop magnitude responses");
    bode_cmd->add_option("--config", bode_opts.config_path, "JSON config")->required();
    bode_cmd->add_option("--out", bode_opts.out_dir, "output directory");
    bode_cmd->add_option("--set", bode_opts.overrides, "config override key.path=value");

    std::vector<std::string> criteria;
    CLI::App* validate_cmd = app.add_subcommand("validate", "Run the release criteria");
    validate_cmd->add_option("--criterion", criteria, "run only the named criteria");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (run_cmd->parsed()) {
            return cmd_run(run_opts);
        }
        if (sweep_cmd->parsed()) {
            return cmd_sweep(sweep_opts);
        }
        if (bode_cmd->parsed()) {
            return cmd_bode(bode_opts);
        }
        return cmd_validate(criteria);
    } catch (const gridlock::DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return kDivergence;
    } catch (const gridlock::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    }
}
