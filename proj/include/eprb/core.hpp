#pragma once

// Domain types shared by every module: analyzer settings, per-pair source
// states, trial records, event logs and correlation estimates, plus the
// event-log validator.
//
// Conventions fixed here:
//   - analyzer orientations are planar angles in radians, normalized to
//     [0, 2*pi);
//   - station clocks are integer tick counters, one tick map per station;
//   - outcomes are exactly -1 or +1.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "eprb/rng.hpp"

namespace eprb {

enum class Side : std::uint8_t { left, right };

enum class SettingLabel : std::uint8_t { a, b, c, d };

inline char to_char(SettingLabel label) {
    switch (label) {
        case SettingLabel::a: return 'a';
        case SettingLabel::b: return 'b';
        case SettingLabel::c: return 'c';
        case SettingLabel::d: return 'd';
    }
    throw std::invalid_argument("unknown setting label");
}

inline std::string to_string(SettingLabel label) { return std::string(1, to_char(label)); }

inline std::string to_string(Side side) { return side == Side::left ? "left" : "right"; }

inline SettingLabel parse_setting_label(const std::string& text) {
    if (text.size() == 1) {
        switch (text[0]) {
            case 'a': return SettingLabel::a;
            case 'b': return SettingLabel::b;
            case 'c': return SettingLabel::c;
            case 'd': return SettingLabel::d;
        }
    }
    throw std::invalid_argument("invalid setting label '" + text + "' (expected a, b, c or d)");
}

// Map a finite angle into [0, 2*pi).
inline double normalize_angle(double radians) {
    if (!std::isfinite(radians)) throw std::invalid_argument("angle must be finite");
    double r = std::fmod(radians, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;  // fmod can round up to 2*pi for tiny negatives
    return r;
}

// One analyzer orientation at one station.
struct Setting {
    SettingLabel label{SettingLabel::a};
    double angle{0.0};  // radians, [0, 2*pi)
    Side side{Side::left};
};

// Hidden per-trial state emitted by the source: the elementary random draw.
struct PairState {
    double lambda{0.0};       // radians, [0, 2*pi)
    std::vector<double> aux;  // optional extra source properties
    std::uint64_t emission_tick{0};

    bool operator==(const PairState&) const = default;
};

// What one station recorded for one trial.
struct StationRecord {
    SettingLabel setting_label{SettingLabel::a};
    std::uint64_t time_tick{0};
    int outcome{+1};  // exactly -1 or +1
    std::optional<double> delay;

    bool operator==(const StationRecord&) const = default;
};

// One numbered pair event.
struct Trial {
    std::uint64_t n{0};  // 1-based trial index
    StationRecord left;
    StationRecord right;

    bool operator==(const Trial&) const = default;
};

// Unordered setting pair, stored in canonical (label-sorted) order.
struct SettingPair {
    SettingLabel first{SettingLabel::a};
    SettingLabel second{SettingLabel::b};

    SettingPair() = default;
    SettingPair(SettingLabel x, SettingLabel y) {
        if (static_cast<int>(x) <= static_cast<int>(y)) {
            first = x;
            second = y;
        } else {
            first = y;
            second = x;
        }
    }

    auto operator<=>(const SettingPair&) const = default;
};

inline std::string to_string(const SettingPair& pair) {
    return std::string(1, to_char(pair.first)) + to_char(pair.second);
}

enum class ProtocolMode : std::uint8_t { three_setting, four_setting };

inline std::string to_string(ProtocolMode mode) {
    return mode == ProtocolMode::three_setting ? "three_setting" : "four_setting";
}

inline ProtocolMode parse_protocol_mode(const std::string& text) {
    if (text == "three_setting") return ProtocolMode::three_setting;
    if (text == "four_setting") return ProtocolMode::four_setting;
    throw std::invalid_argument("invalid protocol '" + text +
                                "' (expected three_setting or four_setting)");
}

// label -> angle map, one per station.
struct SettingsTable {
    std::map<SettingLabel, double> left;
    std::map<SettingLabel, double> right;

    const std::map<SettingLabel, double>& side(Side s) const {
        return s == Side::left ? left : right;
    }

    bool operator==(const SettingsTable&) const = default;
};

// Ordered trial sequence plus run metadata. The unit every analysis and
// oracle operation consumes.
struct EventLog {
    std::vector<Trial> trials;
    SettingsTable settings;
    std::string model_id;
    std::uint64_t seed{0};
    ProtocolMode protocol{ProtocolMode::three_setting};
    std::map<SettingPair, std::uint64_t> pair_counts;

    std::uint64_t trial_count() const { return trials.size(); }

    bool operator==(const EventLog&) const = default;
};

// An estimated pair correlation. count == 0 marks the empty-pair condition;
// consumers must not read value as a measured zero in that case.
struct CorrelationEstimate {
    double value{0.0};
    std::uint64_t count{0};
    double std_error{0.0};

    bool has_samples() const { return count > 0; }
};

// The setting pairs a protocol is allowed to produce.
inline std::vector<SettingPair> protocol_pairs(ProtocolMode mode) {
    using L = SettingLabel;
    if (mode == ProtocolMode::three_setting)
        return {SettingPair{L::a, L::b}, SettingPair{L::a, L::c}, SettingPair{L::b, L::c}};
    return {SettingPair{L::a, L::b}, SettingPair{L::a, L::d}, SettingPair{L::c, L::b},
            SettingPair{L::c, L::d}};
}

// --- log validation ---------------------------------------------------

struct Violation {
    std::string rule;           // stable rule identifier
    std::uint64_t trial_index;  // offending trial, 0 when log-wide
    std::string detail;

    bool operator==(const Violation&) const = default;
};

namespace rules {
inline constexpr const char* trial_index_sequence = "trial_index_sequence";
inline constexpr const char* tick_monotonic = "tick_monotonic";
inline constexpr const char* single_setting_per_tick = "single_setting_per_tick";
inline constexpr const char* outcome_domain = "outcome_domain";
inline constexpr const char* delay_domain = "delay_domain";
inline constexpr const char* angle_domain = "angle_domain";
inline constexpr const char* settings_coverage = "settings_coverage";
inline constexpr const char* pair_count_total = "pair_count_total";
inline constexpr const char* pair_count_consistency = "pair_count_consistency";
inline constexpr const char* protocol_pair_set = "protocol_pair_set";
}  // namespace rules

// Checks every EventLog invariant; returns one entry per violated invariant
// occurrence. Violations are data, not failures: an empty report means the
// log is valid. Pure: identical inputs yield identical reports.
inline std::vector<Violation> validate_log(const EventLog& log) {
    std::vector<Violation> out;
    const std::uint64_t m = log.trials.size();

    for (Side side : {Side::left, Side::right}) {
        for (const auto& [label, angle] : log.settings.side(side)) {
            if (!std::isfinite(angle) || angle < 0.0 || angle >= kTwoPi)
                out.push_back({rules::angle_domain, 0,
                               to_string(side) + " setting " + to_string(label) +
                                   " angle outside [0, 2*pi)"});
        }
    }

    const auto allowed = protocol_pairs(log.protocol);
    const auto is_allowed = [&allowed](const SettingPair& pair) {
        for (const auto& p : allowed)
            if (p == pair) return true;
        return false;
    };

    std::map<std::uint64_t, SettingLabel> tick_setting_left, tick_setting_right;
    std::map<SettingPair, std::uint64_t> tally;
    for (const auto& pair : allowed) tally[pair] = 0;

    std::uint64_t prev_left_tick = 0, prev_right_tick = 0;
    for (std::uint64_t i = 0; i < m; ++i) {
        const Trial& trial = log.trials[i];
        const std::uint64_t expected_n = i + 1;
        if (trial.n != expected_n)
            out.push_back({rules::trial_index_sequence, trial.n,
                           "expected trial index " + std::to_string(expected_n)});

        for (Side side : {Side::left, Side::right}) {
            const StationRecord& rec = side == Side::left ? trial.left : trial.right;
            if (rec.outcome != -1 && rec.outcome != +1)
                out.push_back({rules::outcome_domain, trial.n,
                               to_string(side) + " outcome " + std::to_string(rec.outcome)});
            if (rec.delay && (!std::isfinite(*rec.delay) || *rec.delay < 0.0))
                out.push_back({rules::delay_domain, trial.n,
                               to_string(side) + " delay must be finite and >= 0"});
            if (!log.settings.side(side).count(rec.setting_label))
                out.push_back({rules::settings_coverage, trial.n,
                               to_string(side) + " setting " + to_string(rec.setting_label) +
                                   " missing from settings table"});

            std::uint64_t& prev = side == Side::left ? prev_left_tick : prev_right_tick;
            if (i > 0 && rec.time_tick <= prev)
                out.push_back({rules::tick_monotonic, trial.n,
                               to_string(side) + " tick " + std::to_string(rec.time_tick) +
                                   " not increasing"});
            prev = rec.time_tick;

            auto& tick_setting = side == Side::left ? tick_setting_left : tick_setting_right;
            auto [it, inserted] = tick_setting.emplace(rec.time_tick, rec.setting_label);
            if (!inserted && it->second != rec.setting_label)
                out.push_back({rules::single_setting_per_tick, trial.n,
                               to_string(side) + " tick " + std::to_string(rec.time_tick) +
                                   " already carries setting " + to_string(it->second) +
                                   "; only one setting can occur at one given time"});
        }

        const SettingPair pair{trial.left.setting_label, trial.right.setting_label};
        if (!is_allowed(pair))
            out.push_back({rules::protocol_pair_set, trial.n,
                           "pair " + to_string(pair) + " not part of the " +
                               to_string(log.protocol) + " protocol"});
        tally[pair] += 1;
    }

    // Absent pair-count entries are implicit zeros.
    std::uint64_t count_sum = 0;
    for (const auto& [pair, count] : log.pair_counts) {
        count_sum += count;
        if (!is_allowed(pair))
            out.push_back({rules::protocol_pair_set, 0,
                           "pair " + to_string(pair) + " not part of the " +
                               to_string(log.protocol) + " protocol"});
        if (!tally.count(pair) && count != 0)
            out.push_back({rules::pair_count_consistency, 0,
                           "pair " + to_string(pair) + " recorded " + std::to_string(count) +
                               ", trials contain 0"});
    }
    if (count_sum != m)
        out.push_back({rules::pair_count_total, 0,
                       "pair counts sum to " + std::to_string(count_sum) + ", expected " +
                           std::to_string(m)});

    for (const auto& [pair, count] : tally) {
        auto it = log.pair_counts.find(pair);
        const std::uint64_t recorded = it == log.pair_counts.end() ? 0 : it->second;
        if (recorded != count)
            out.push_back({rules::pair_count_consistency, 0,
                           "pair " + to_string(pair) + " recorded " + std::to_string(recorded) +
                               ", trials contain " + std::to_string(count)});
    }

    return out;
}

}  // namespace eprb
