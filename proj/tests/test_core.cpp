#include <string>
#include <vector>

#include "doctest.h"

#include "eprb/core.hpp"
#include "eprb/log_io.hpp"
#include "eprb/runner.hpp"

using namespace eprb;

namespace {

// Minimal hand-built three-setting log; callers mutate it to break
// specific invariants.
EventLog small_log() {
    EventLog log;
    log.protocol = ProtocolMode::three_setting;
    log.model_id = "static";
    log.seed = 1;
    for (SettingLabel label : {SettingLabel::a, SettingLabel::b, SettingLabel::c}) {
        log.settings.left[label] = 0.0;
        log.settings.right[label] = 0.0;
    }
    auto add = [&log](std::uint64_t n, SettingLabel left, SettingLabel right, int ol, int orr) {
        Trial trial;
        trial.n = n;
        trial.left = {left, n, ol, std::nullopt};
        trial.right = {right, n, orr, std::nullopt};
        log.trials.push_back(trial);
    };
    add(1, SettingLabel::a, SettingLabel::b, +1, +1);
    add(2, SettingLabel::a, SettingLabel::c, +1, -1);
    add(3, SettingLabel::b, SettingLabel::c, -1, -1);
    for (const auto& pair : protocol_pairs(log.protocol)) log.pair_counts[pair] = 0;
    for (const auto& trial : log.trials)
        log.pair_counts[SettingPair{trial.left.setting_label, trial.right.setting_label}] += 1;
    return log;
}

bool has_rule(const std::vector<Violation>& report, const char* rule) {
    for (const auto& violation : report)
        if (violation.rule == rule) return true;
    return false;
}

}  // namespace

TEST_CASE("normalize_angle maps into [0, 2*pi)") {
    CHECK(normalize_angle(0.0) == 0.0);
    CHECK(normalize_angle(kTwoPi) == 0.0);
    CHECK(normalize_angle(-kPi) == doctest::Approx(kPi));
    CHECK(normalize_angle(3.0 * kPi) == doctest::Approx(kPi));
    CHECK(normalize_angle(-1e-9) < kTwoPi);
    CHECK(normalize_angle(-1e-9) >= 0.0);
    CHECK_THROWS_AS(normalize_angle(std::numeric_limits<double>::infinity()),
                    std::invalid_argument);
}

TEST_CASE("setting pairs are unordered with canonical order") {
    CHECK(SettingPair{SettingLabel::b, SettingLabel::a} ==
          SettingPair{SettingLabel::a, SettingLabel::b});
    CHECK(to_string(SettingPair{SettingLabel::c, SettingLabel::a}) == "ac");
}

TEST_CASE("validate_log accepts an empty log") {
    CHECK(validate_log(EventLog{}).empty());  // vacuous, even with no pair-count entries
}

TEST_CASE("validate_log flags trials outside the protocol pair set") {
    EventLog log = small_log();
    log.protocol = ProtocolMode::four_setting;  // (a,b) allowed; (a,c) and (b,c) are not
    const auto report = validate_log(log);
    CHECK(has_rule(report, rules::protocol_pair_set));
}

TEST_CASE("validate_log accepts a well-formed log") {
    CHECK(validate_log(small_log()).empty());
}

TEST_CASE("shared tick with different settings violates the single-setting rule") {
    EventLog log = small_log();
    log.trials[1].left.time_tick = 1;  // same tick as trial 1, different setting (a vs a: no)
    log.trials[1].left.setting_label = SettingLabel::b;
    // Keep pair counts consistent with the mutated trials.
    log.pair_counts.clear();
    for (const auto& pair : protocol_pairs(log.protocol)) log.pair_counts[pair] = 0;
    for (const auto& trial : log.trials)
        log.pair_counts[SettingPair{trial.left.setting_label, trial.right.setting_label}] += 1;

    const auto report = validate_log(log);
    CHECK(has_rule(report, rules::single_setting_per_tick));
    int single_setting = 0;
    for (const auto& violation : report)
        if (violation.rule == rules::single_setting_per_tick) {
            ++single_setting;
            CHECK(violation.trial_index == 2);
        }
    CHECK(single_setting == 1);
}

TEST_CASE("validate_log flags out-of-domain outcomes and indices") {
    EventLog log = small_log();
    log.trials[0].left.outcome = 0;
    log.trials[2].n = 5;
    const auto report = validate_log(log);
    CHECK(has_rule(report, rules::outcome_domain));
    CHECK(has_rule(report, rules::trial_index_sequence));
}

TEST_CASE("validate_log flags pair-count mismatches") {
    EventLog log = small_log();
    log.pair_counts[SettingPair{SettingLabel::a, SettingLabel::b}] = 2;
    const auto report = validate_log(log);
    CHECK(has_rule(report, rules::pair_count_total));
    CHECK(has_rule(report, rules::pair_count_consistency));
}

TEST_CASE("validate_log is a pure function") {
    EventLog log = small_log();
    log.trials[0].left.outcome = 3;
    CHECK(validate_log(log) == validate_log(log));
}

TEST_CASE("CSV serialization round-trips field-by-field") {
    EventLog log = small_log();
    log.trials[0].left.delay = 0.12345678901234567;
    log.trials[0].right.delay = 0.0;
    log.trials[1].left.delay = 1e-300;
    log.trials[1].right.delay = 17.25;
    log.trials[2].left.delay = 3.0;
    log.trials[2].right.delay = 0.3333333333333333;
    log.settings.left[SettingLabel::b] = 2.0943951023931953;  // 120 degrees

    const EventLog parsed = parse_log(serialize_log_csv(log), serialize_sidecar(log));
    CHECK(parsed == log);
}

TEST_CASE("parse_log reports malformed rows with their row number") {
    const EventLog log = small_log();
    const std::string sidecar = serialize_sidecar(log);
    std::string csv = serialize_log_csv(log);

    SUBCASE("truncated row") {
        csv = std::string(kCsvHeader) + "\n1,1,a,+1,,1,b\n";
        CHECK_THROWS_WITH_AS(parse_log(csv, sidecar), doctest::Contains("row 2"),
                             LogFormatError);
    }
    SUBCASE("bad outcome") {
        csv = std::string(kCsvHeader) + "\n1,1,a,+2,,1,b,+1,\n";
        CHECK_THROWS_WITH_AS(parse_log(csv, sidecar), doctest::Contains("row 2"),
                             LogFormatError);
    }
    SUBCASE("missing header") {
        CHECK_THROWS_AS(parse_log("1,1,a,+1,,1,b,+1,\n", sidecar), LogFormatError);
    }
}
