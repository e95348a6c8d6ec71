#include <cmath>
#include <string>

#include "doctest.h"

#include "eprb/config.hpp"
#include "eprb/reports.hpp"
#include "eprb/runner.hpp"

using namespace eprb;

namespace {

const char* kMinimalConfig =
    "model = static\n"
    "protocol = three_setting\n"
    "trials = 10\n"
    "angle_a_deg = 0\n"
    "angle_b_deg = 120\n"
    "angle_c_deg = 180\n";

}  // namespace

TEST_CASE("parse_key_values handles comments, blanks and duplicate keys") {
    const auto entries = parse_key_values("# comment\n\nkey = value # trailing\n  spaced  =  x \n");
    CHECK(entries.at("key") == "value");
    CHECK(entries.at("spaced") == "x");
    CHECK_THROWS_AS(parse_key_values("a = 1\na = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_key_values("not a key value line\n"), ConfigError);
}

TEST_CASE("resolve_run_config: minimal static config resolves with defaults") {
    const ResolvedRun resolved = parse_run_config(kMinimalConfig);
    CHECK(resolved.run.model == ModelKind::Static);
    CHECK(resolved.run.trials == 10);
    CHECK(resolved.run.seed == 0);
    CHECK(resolved.run.station.periodicity == 1);
    CHECK(resolved.run.settings.left.at(SettingLabel::b) ==
          doctest::Approx(2.0 * kPi / 3.0).epsilon(1e-12));
    CHECK(resolved.resolved.at("protocol") == "three_setting");
    CHECK(resolved.resolved.count("angle_b_rad") == 1);
}

TEST_CASE("resolve_run_config rejects unknown keys by name") {
    CHECK_THROWS_WITH_AS(parse_run_config(std::string(kMinimalConfig) + "trails = 7\n"),
                         doctest::Contains("trails"), ConfigError);
}

TEST_CASE("resolve_run_config names the first violated constraint") {
    CHECK_THROWS_WITH_AS(parse_run_config("model = static\nprotocol = three_setting\n"),
                         doctest::Contains("trials"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_run_config("model = warp\nprotocol = three_setting\ntrials = 1\n"),
        doctest::Contains("model"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_run_config(std::string(kMinimalConfig) + "drift_rate = 1\n"),
                         doctest::Contains("dynamic"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_run_config(std::string(kMinimalConfig) + "angle_d_deg = 10\n"),
                         doctest::Contains("four_setting"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_run_config(std::string(kMinimalConfig) + "pair_probabilities = 0.5,0.5\n"),
        doctest::Contains("3"), ConfigError);
}

TEST_CASE("timetag configs default to the photon convention") {
    const ResolvedRun resolved = parse_run_config(
        "model = timetag\nprotocol = three_setting\ntrials = 5\n"
        "angle_a_deg = 0\nangle_b_deg = 60\nangle_c_deg = 90\n");
    CHECK(resolved.run.station.periodicity == 2);
    CHECK(resolved.run.station.delay_exponent == 4.0);
    CHECK(resolved.run.station.delay_scale == 1.0);
    CHECK(resolved.resolved.at("periodicity") == "2");
}

TEST_CASE("degree angles convert exactly and land in the resolved view") {
    const ResolvedRun resolved = parse_run_config(
        "model = singlet\nprotocol = three_setting\ntrials = 1\nlambda = fixed\n"
        "lambda_value_deg = 90\nangle_a_deg = 0\nangle_b_deg = 90\nangle_c_deg = 270\n");
    CHECK(resolved.run.source.fixed_value == doctest::Approx(kPi / 2.0).epsilon(1e-15));
    CHECK(resolved.run.settings.left.at(SettingLabel::c) ==
          doctest::Approx(3.0 * kPi / 2.0).epsilon(1e-15));
}

TEST_CASE("manifest digest matches a recomputation over the stored config") {
    const ResolvedRun resolved = parse_run_config(kMinimalConfig);
    const RunManifest manifest = make_manifest(resolved, {{"log", "out/log.csv"}});
    CHECK(manifest.config_digest == recompute_manifest_digest(manifest));
    CHECK(manifest.tool_version == kToolVersion);

    // Any config change moves the digest.
    const ResolvedRun other = parse_run_config(std::string(kMinimalConfig) + "seed = 9\n");
    const RunManifest other_manifest = make_manifest(other, {});
    CHECK(other_manifest.config_digest != manifest.config_digest);
}

TEST_CASE("analysis report JSON carries the documented schema") {
    const ResolvedRun resolved = parse_run_config(kMinimalConfig);
    RunConfig cfg = resolved.run;
    cfg.seed = 3;
    const EventLog log = run_experiment(cfg);

    AnalyzeOptions options;
    options.eq3 = true;
    const nlohmann::json report = analysis_report(log, options);

    REQUIRE(report.contains("log"));
    CHECK(report["log"]["trials"] == 10);
    CHECK(report["log"]["protocol"] == "three_setting");
    REQUIRE(report.contains("correlations"));
    for (const char* pair : {"ab", "ac", "bc"}) {
        REQUIRE(report["correlations"].contains(pair));
        for (const char* field : {"value", "count", "std_error"})
            CHECK(report["correlations"][pair].contains(field));
    }
    REQUIRE(report.contains("bell"));
    if (!report["bell"].is_null()) {
        CHECK(report["bell"].contains("B"));
        CHECK(report["bell"].contains("bound_satisfied"));
    }
    REQUIRE(report.contains("marginals"));
    CHECK(report["marginals"].contains("left"));
    CHECK(report["marginals"].contains("right"));
    CHECK(report.contains("no_signaling_gap"));
    REQUIRE(report.contains("eq3"));
    CHECK(report["eq3"].contains("histogram"));
    CHECK(report["eq3"].contains("triple_count"));
    CHECK(!report.contains("coincidence"));
}

TEST_CASE("coincidence section appears when a window is requested") {
    const ResolvedRun resolved = parse_run_config(
        "model = timetag\nprotocol = three_setting\ntrials = 2000\nseed = 4\n"
        "angle_a_deg = 0\nangle_b_deg = 60\nangle_c_deg = 90\n");
    const EventLog log = run_experiment(resolved.run);

    AnalyzeOptions options;
    options.coincidence_window = 0.1;
    const nlohmann::json report = analysis_report(log, options);
    REQUIRE(report.contains("coincidence"));
    CHECK(report["coincidence"]["window"] == 0.1);
    CHECK(report["coincidence"]["retained_fraction"].get<double>() < 1.0);
    CHECK(report["coincidence"]["retained_fraction"].get<double>() > 0.0);
    CHECK(report["coincidence"].contains("bell"));
}

TEST_CASE("oracle report JSON carries the documented schema") {
    const nlohmann::json bound = to_json(enumerate_bell_bound());
    for (const char* field : {"max", "min", "attaining_assignments"}) CHECK(bound.contains(field));

    const nlohmann::json count = to_json(count_reachable_independent(2, 2, 2));
    for (const char* field : {"model", "exact_count", "formula_value", "enumerated"})
        CHECK(count.contains(field));
    CHECK(count["model"] == "independent_pairs");

    const nlohmann::json counterfactual = to_json(count_reachable_counterfactual(2, false));
    for (const char* field : {"model", "exact_count", "independent_count_matched",
                              "strict_subset", "sum_bounds_satisfied"})
        CHECK(counterfactual.contains(field));
    CHECK(counterfactual["model"] == "counterfactual_triples");

    const nlohmann::json feasibility = to_json(boole_feasibility(0.2, 0.1, 0.0));
    for (const char* field : {"correlations", "feasible", "conditions", "witness"})
        CHECK(feasibility.contains(field));
}
