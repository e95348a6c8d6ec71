#pragma once

// Experiment orchestration: random setting-pair schedule, clock discipline,
// model invocation and log assembly.
//
// Both station clocks are synchronized integer counters: trial n is
// measured at tick n on the left and tick n + right_tick_offset on the
// right (offset 0 by default). Every random draw comes from a per-trial
// counter stream, so a run partitioned over k workers is bit-identical to
// a sequential run.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "eprb/core.hpp"
#include "eprb/models.hpp"
#include "eprb/rng.hpp"

namespace eprb {

struct Protocol {
    ProtocolMode mode{ProtocolMode::three_setting};
    // Ordered (left label, right label) pairs.
    std::vector<std::pair<SettingLabel, SettingLabel>> setting_pairs;
    std::vector<double> pair_probabilities;

    static Protocol three_setting(std::vector<double> probabilities = {}) {
        using L = SettingLabel;
        Protocol p;
        p.mode = ProtocolMode::three_setting;
        p.setting_pairs = {{L::a, L::b}, {L::a, L::c}, {L::b, L::c}};
        p.pair_probabilities =
            probabilities.empty() ? std::vector<double>(3, 1.0 / 3.0) : std::move(probabilities);
        return p;
    }

    static Protocol four_setting(std::vector<double> probabilities = {}) {
        using L = SettingLabel;
        Protocol p;
        p.mode = ProtocolMode::four_setting;
        p.setting_pairs = {{L::a, L::b}, {L::a, L::d}, {L::c, L::b}, {L::c, L::d}};
        p.pair_probabilities =
            probabilities.empty() ? std::vector<double>(4, 0.25) : std::move(probabilities);
        return p;
    }
};

enum class ModelKind : std::uint8_t { Static, Dynamic, Timetag, SingletReference };

inline std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::Static: return "static";
        case ModelKind::Dynamic: return "dynamic";
        case ModelKind::Timetag: return "timetag";
        case ModelKind::SingletReference: return "singlet_reference";
    }
    throw std::invalid_argument("unknown model kind");
}

struct RunConfig {
    Protocol protocol = Protocol::three_setting();
    std::uint64_t trials{0};  // M >= 1
    SourceConfig source;
    StationConfig station;
    ModelKind model{ModelKind::Static};
    std::uint64_t seed{0};
    SettingsTable settings;
    std::uint64_t right_tick_offset{0};
    unsigned workers{1};
};

// Throws std::invalid_argument naming the first violated constraint.
inline void validate_run_config(const RunConfig& cfg) {
    if (cfg.trials < 1) throw std::invalid_argument("trials must be >= 1");
    const auto& proto = cfg.protocol;
    if (proto.setting_pairs.empty() ||
        proto.setting_pairs.size() != proto.pair_probabilities.size())
        throw std::invalid_argument("protocol pair/probability lists must match and be non-empty");
    const auto expected_pairs =
        proto.mode == ProtocolMode::three_setting ? Protocol::three_setting().setting_pairs
                                                  : Protocol::four_setting().setting_pairs;
    if (proto.setting_pairs != expected_pairs)
        throw std::invalid_argument("protocol setting pairs must be exactly the " +
                                    to_string(proto.mode) + " pairs");
    double sum = 0.0;
    for (double p : proto.pair_probabilities) {
        if (!(p > 0.0)) throw std::invalid_argument("pair probabilities must be strictly positive");
        sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("pair probabilities must sum to 1 within 1e-12");
    for (const auto& [left_label, right_label] : proto.setting_pairs) {
        if (!cfg.settings.left.count(left_label))
            throw std::invalid_argument("settings table lacks left label " +
                                        to_string(left_label));
        if (!cfg.settings.right.count(right_label))
            throw std::invalid_argument("settings table lacks right label " +
                                        to_string(right_label));
    }
    if (cfg.station.periodicity != 1 && cfg.station.periodicity != 2)
        throw std::invalid_argument("periodicity must be 1 or 2");
    if (cfg.model == ModelKind::Timetag) {
        if (!(cfg.station.delay_scale > 0.0))
            throw std::invalid_argument("delay_scale must be > 0");
        if (!(cfg.station.delay_exponent > 0.0))
            throw std::invalid_argument("delay_exponent must be > 0");
    }
    if (cfg.workers < 1) throw std::invalid_argument("workers must be >= 1");
}

// Deterministic pick of the trial's setting pair from the schedule stream.
inline std::size_t pick_pair_index(const Protocol& protocol, std::uint64_t seed,
                                   std::uint64_t trial_index) {
    RngStream stream(seed, StreamDomain::schedule, trial_index);
    const double u = stream.next_unit();
    double cumulative = 0.0;
    for (std::size_t i = 0; i + 1 < protocol.setting_pairs.size(); ++i) {
        cumulative += protocol.pair_probabilities[i];
        if (u < cumulative) return i;
    }
    return protocol.setting_pairs.size() - 1;
}

// Length-M sequence of setting-pair labels, deterministic in
// (protocol, M, seed). Marginal frequencies converge to the protocol's
// pair probabilities.
inline std::vector<std::pair<SettingLabel, SettingLabel>> schedule_settings(
    const Protocol& protocol, std::uint64_t trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    std::vector<std::pair<SettingLabel, SettingLabel>> out;
    out.reserve(trials);
    for (std::uint64_t n = 1; n <= trials; ++n)
        out.push_back(protocol.setting_pairs[pick_pair_index(protocol, seed, n)]);
    return out;
}

namespace detail {

inline void generate_trials(const RunConfig& cfg, std::uint64_t first, std::uint64_t last,
                            std::vector<Trial>& trials) {
    for (std::uint64_t n = first; n <= last; ++n) {
        const auto [left_label, right_label] =
            cfg.protocol.setting_pairs[pick_pair_index(cfg.protocol, cfg.seed, n)];
        const Setting left_setting{left_label, cfg.settings.left.at(left_label), Side::left};
        const Setting right_setting{right_label, cfg.settings.right.at(right_label), Side::right};

        Trial trial;
        trial.n = n;
        trial.left.setting_label = left_label;
        trial.right.setting_label = right_label;
        trial.left.time_tick = n;
        trial.right.time_tick = n + cfg.right_tick_offset;

        const PairState state = draw_pair_state(cfg.source, n, cfg.seed);
        switch (cfg.model) {
            case ModelKind::Static:
                trial.left.outcome = static_station(left_setting, state, cfg.station.periodicity);
                trial.right.outcome =
                    static_station(right_setting, state, cfg.station.periodicity);
                break;
            case ModelKind::Dynamic:
                trial.left.outcome =
                    dynamic_station(left_setting, state, trial.left.time_tick, cfg.station);
                trial.right.outcome =
                    dynamic_station(right_setting, state, trial.right.time_tick, cfg.station);
                break;
            case ModelKind::Timetag: {
                RngStream left_stream(cfg.seed, StreamDomain::station_left, n);
                RngStream right_stream(cfg.seed, StreamDomain::station_right, n);
                const TimetagResult l = timetag_station(left_setting, state, cfg.station,
                                                        left_stream);
                const TimetagResult r = timetag_station(right_setting, state, cfg.station,
                                                        right_stream);
                trial.left.outcome = l.outcome;
                trial.left.delay = l.delay;
                trial.right.outcome = r.outcome;
                trial.right.delay = r.delay;
                break;
            }
            case ModelKind::SingletReference: {
                RngStream stream(cfg.seed, StreamDomain::reference, n);
                const auto [lo, ro] = singlet_reference_sample(left_setting, right_setting,
                                                               cfg.station.periodicity, stream);
                trial.left.outcome = lo;
                trial.right.outcome = ro;
                break;
            }
        }
        trials[n - 1] = trial;
    }
}

}  // namespace detail

// Runs M trials and assembles the event log. The produced log always
// passes validate_log with an empty report.
inline EventLog run_experiment(const RunConfig& cfg) {
    validate_run_config(cfg);

    EventLog log;
    log.trials.resize(cfg.trials);
    log.settings = cfg.settings;
    log.model_id = to_string(cfg.model);
    log.seed = cfg.seed;
    log.protocol = cfg.protocol.mode;

    const unsigned workers =
        static_cast<unsigned>(std::min<std::uint64_t>(cfg.workers, cfg.trials));
    if (workers <= 1) {
        detail::generate_trials(cfg, 1, cfg.trials, log.trials);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        const std::uint64_t chunk = (cfg.trials + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::uint64_t first = 1 + w * chunk;
            const std::uint64_t last = std::min<std::uint64_t>(cfg.trials, first + chunk - 1);
            if (first > last) break;
            pool.emplace_back(
                [&cfg, first, last, &log] { detail::generate_trials(cfg, first, last, log.trials); });
        }
        for (auto& t : pool) t.join();
    }

    for (const auto& pair : protocol_pairs(cfg.protocol.mode)) log.pair_counts[pair] = 0;
    for (const Trial& trial : log.trials)
        log.pair_counts[SettingPair{trial.left.setting_label, trial.right.setting_label}] += 1;

    return log;
}

}  // namespace eprb
