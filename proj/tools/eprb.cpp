// eprb — EPRB experiment laboratory command line.
//
// Subcommands:
//   run       generate an event log from a run configuration
//   analyze   compute statistics from an event log (JSON to stdout)
//   oracle    exact enumeration and feasibility reports (JSON to stdout)
//
// Exit codes: 0 success, 1 configuration error, 2 data error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "eprb/analysis.hpp"
#include "eprb/config.hpp"
#include "eprb/core.hpp"
#include "eprb/log_io.hpp"
#include "eprb/oracles.hpp"
#include "eprb/reports.hpp"
#include "eprb/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitDataError = 2;

struct RunOptions {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    unsigned workers = 1;
    std::string output_dir = ".";
};

int cmd_run(const RunOptions& options) {
    std::string config_text;
    try {
        config_text = eprb::read_text_file(options.config_path);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitConfigError;
    }

    eprb::ResolvedRun resolved;
    try {
        auto entries = eprb::parse_key_values(config_text);
        for (const std::string& item : options.overrides) {
            const auto eq = item.find('=');
            if (eq == std::string::npos)
                throw eprb::ConfigError("override '" + item + "' must be key=value");
            entries[item.substr(0, eq)] = item.substr(eq + 1);
        }
        if (options.seed) entries["seed"] = std::to_string(*options.seed);
        resolved = eprb::resolve_run_config(std::move(entries));
    } catch (const std::exception& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return kExitConfigError;
    }
    resolved.run.workers = options.workers;

    try {
        const eprb::EventLog log = eprb::run_experiment(resolved.run);

        namespace fs = std::filesystem;
        const fs::path dir(options.output_dir);
        fs::create_directories(dir);
        const std::string csv_path = (dir / "log.csv").string();
        const std::string sidecar_path = (dir / "log.meta.json").string();
        const std::string manifest_path = (dir / "manifest.json").string();

        eprb::write_text_file(csv_path, eprb::serialize_log_csv(log));
        eprb::write_text_file(sidecar_path, eprb::serialize_sidecar(log));
        const eprb::RunManifest manifest = eprb::make_manifest(
            resolved, {{"log", csv_path}, {"sidecar", sidecar_path}});
        eprb::write_text_file(manifest_path, eprb::manifest_json(manifest).dump(2) + "\n");

        std::cout << "wrote " << csv_path << " (" << log.trial_count() << " trials), "
                  << sidecar_path << ", " << manifest_path << "\n";
        return kExitOk;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitDataError;
    }
}

struct AnalyzeOptions {
    std::string log_path;
    std::string sidecar_path;
    std::optional<double> window;
    bool eq3 = false;
};

int cmd_analyze(const AnalyzeOptions& options) {
    eprb::EventLog log;
    try {
        const std::string sidecar = options.sidecar_path.empty()
                                        ? eprb::sidecar_path_for(options.log_path)
                                        : options.sidecar_path;
        log = eprb::load_log(options.log_path, sidecar);
    } catch (const std::exception& err) {
        std::cerr << "data error: " << err.what() << "\n";
        return kExitDataError;
    }

    const auto violations = eprb::validate_log(log);
    if (!violations.empty()) {
        std::cerr << "data error: log fails validation (" << violations.size()
                  << " violation(s)); first: " << violations.front().rule << " at trial "
                  << violations.front().trial_index << ": " << violations.front().detail << "\n";
        return kExitDataError;
    }

    try {
        eprb::AnalyzeOptions report_options;
        report_options.coincidence_window = options.window;
        report_options.eq3 = options.eq3;
        std::cout << eprb::analysis_report(log, report_options).dump(2) << "\n";
        return kExitOk;
    } catch (const std::exception& err) {
        std::cerr << "data error: " << err.what() << "\n";
        return kExitDataError;
    }
}

int emit(const nlohmann::json& report) {
    std::cout << report.dump(2) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"EPRB experiment laboratory: simulate, analyze, verify"};
    app.require_subcommand(1);

    RunOptions run_options;
    // Global flags; subcommands fall through to them.
    app.add_option("--seed", run_options.seed, "override the configured seed");
    app.add_option("--workers", run_options.workers, "parallel trial generation workers")
        ->default_val(1u);
    app.add_option("--output-dir", run_options.output_dir, "output directory")
        ->default_val(".");

    CLI::App* run = app.add_subcommand("run", "generate an event log from a configuration file");
    run->fallthrough();
    run->add_option("--config", run_options.config_path, "run configuration file")->required();
    run->add_option("--override", run_options.overrides,
                    "override a configuration key (key=value, repeatable)");

    AnalyzeOptions analyze_options;
    CLI::App* analyze = app.add_subcommand("analyze", "compute statistics from an event log");
    analyze->fallthrough();
    analyze->add_option("log", analyze_options.log_path, "event log CSV path")->required();
    analyze->add_option("--sidecar", analyze_options.sidecar_path,
                        "metadata sidecar path (default: <log>.meta.json next to the CSV)");
    analyze->add_option("--window", analyze_options.window,
                        "coincidence window for delay-carrying logs");
    analyze->add_flag("--eq3", analyze_options.eq3,
                      "include the per-run time-indexed expression scan");

    CLI::App* oracle = app.add_subcommand("oracle", "exact enumeration and feasibility reports");
    oracle->fallthrough();
    oracle->require_subcommand(1);

    oracle->add_subcommand("bell-bound",
                           "enumerate the 8 assignments of the three-variable combination");
    oracle->add_subcommand("eq3-bound",
                           "enumerate the 64 assignments of the six-variable combination");

    CLI::App* count = oracle->add_subcommand("count", "count reachable pair-product sum tuples");
    std::vector<std::uint64_t> independent_counts;
    std::optional<std::uint64_t> counterfactual_trials;
    bool four_setting = false;
    count->add_option("--independent", independent_counts,
                      "pair counts N_ab N_ac N_bc for the independent model")
        ->expected(3);
    count->add_option("--counterfactual", counterfactual_trials,
                      "trial count M for the counterfactual model");
    count->add_flag("--four-setting", four_setting,
                    "use the four-setting protocol (counterfactual model)");

    CLI::App* feasibility =
        oracle->add_subcommand("feasibility", "joint-distribution existence for 3 correlations");
    std::vector<double> correlations;
    feasibility->add_option("correlations", correlations, "E_ab E_ac E_bc in [-1, 1]")
        ->expected(3);

    CLI::App* prob_space = oracle->add_subcommand(
        "prob-space", "product-space impossible mass of an event log");
    std::string prob_space_log, prob_space_sidecar;
    prob_space->add_option("log", prob_space_log, "event log CSV path")->required();
    prob_space->add_option("--sidecar", prob_space_sidecar, "metadata sidecar path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfigError;
    }

    if (run->parsed()) return cmd_run(run_options);
    if (analyze->parsed()) return cmd_analyze(analyze_options);

    try {
        if (oracle->get_subcommand("bell-bound")->parsed())
            return emit(eprb::to_json(eprb::enumerate_bell_bound()));
        if (oracle->get_subcommand("eq3-bound")->parsed())
            return emit(eprb::to_json(eprb::enumerate_eq3_bound()));
        if (count->parsed()) {
            if (!independent_counts.empty() && counterfactual_trials)
                throw eprb::ConfigError("choose either --independent or --counterfactual");
            if (!independent_counts.empty())
                return emit(eprb::to_json(eprb::count_reachable_independent(
                    independent_counts[0], independent_counts[1], independent_counts[2])));
            if (counterfactual_trials)
                return emit(eprb::to_json(
                    eprb::count_reachable_counterfactual(*counterfactual_trials, four_setting)));
            throw eprb::ConfigError("count requires --independent or --counterfactual");
        }
        if (feasibility->parsed())
            return emit(eprb::to_json(
                eprb::boole_feasibility(correlations[0], correlations[1], correlations[2])));
        if (prob_space->parsed()) {
            eprb::EventLog log;
            try {
                const std::string sidecar = prob_space_sidecar.empty()
                                                ? eprb::sidecar_path_for(prob_space_log)
                                                : prob_space_sidecar;
                log = eprb::load_log(prob_space_log, sidecar);
            } catch (const std::exception& err) {
                std::cerr << "data error: " << err.what() << "\n";
                return kExitDataError;
            }
            return emit(eprb::to_json(eprb::product_space_impossible_mass(log)));
        }
    } catch (const std::domain_error& err) {
        // Enumeration caps.
        std::cerr << "config error: " << err.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return kExitConfigError;
    }

    std::cerr << "error: no subcommand\n";
    return kExitConfigError;
}
