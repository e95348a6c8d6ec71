#pragma once

// JSON views of analysis and oracle results, shared by the CLI and the
// test suite's schema checks.

#include <cmath>
#include <optional>
#include <string>

#include "json.hpp"

#include "eprb/analysis.hpp"
#include "eprb/core.hpp"
#include "eprb/oracles.hpp"

namespace eprb {

inline nlohmann::json to_json(const CorrelationEstimate& estimate) {
    return nlohmann::json{{"value", estimate.value},
                          {"count", estimate.count},
                          {"std_error", estimate.std_error}};
}

inline nlohmann::json to_json(const BellReport& report) {
    return nlohmann::json{{"E_ab", to_json(report.e_ab)},
                          {"E_ac", to_json(report.e_ac)},
                          {"E_bc", to_json(report.e_bc)},
                          {"B", report.statistic},
                          {"bound_satisfied", report.bound_satisfied}};
}

inline nlohmann::json to_json(const ChshReport& report) {
    return nlohmann::json{{"E_ab", to_json(report.e_ab)},
                          {"E_ad", to_json(report.e_ad)},
                          {"E_cb", to_json(report.e_cb)},
                          {"E_cd", to_json(report.e_cd)},
                          {"S", report.statistic},
                          {"bound_satisfied", report.bound_satisfied}};
}

inline nlohmann::json to_json(const Eq3Summary& summary) {
    nlohmann::json histogram;
    for (const auto& [value, count] : summary.histogram)
        histogram[std::to_string(value)] = count;
    nlohmann::json out{{"triple_count", summary.triple_count}, {"histogram", histogram}};
    out["max"] = summary.max_value ? nlohmann::json(*summary.max_value) : nlohmann::json();
    return out;
}

inline nlohmann::json to_json(const MarginalTable& table) {
    nlohmann::json out{{"left", nlohmann::json::object()},
                       {"right", nlohmann::json::object()}};
    for (const auto& [key, cell] : table) {
        const auto& [side, label] = key;
        out[to_string(side)][to_string(label)] = {{"plus_frequency", cell.plus_frequency()},
                                                  {"count", cell.total}};
    }
    return out;
}

struct AnalyzeOptions {
    std::optional<double> coincidence_window;
    bool eq3 = false;
};

// The full analyze report: correlations per protocol pair, the Bell or
// CHSH statistic, marginals and the no-signaling gap; optionally the
// per-run expression scan and the coincidence-filtered statistics.
inline nlohmann::json analysis_report(const EventLog& log, const AnalyzeOptions& options) {
    nlohmann::json report;
    report["log"] = {{"model_id", log.model_id},
                     {"seed", log.seed},
                     {"protocol", to_string(log.protocol)},
                     {"trials", log.trial_count()}};

    nlohmann::json correlations = nlohmann::json::object();
    for (const auto& pair : protocol_pairs(log.protocol))
        correlations[to_string(pair)] = to_json(correlation(log, pair));
    report["correlations"] = correlations;

    if (log.protocol == ProtocolMode::three_setting) {
        const auto bell = bell_statistic(log);
        report["bell"] = bell ? to_json(*bell) : nlohmann::json();
    } else {
        const auto chsh = chsh_statistic(log);
        report["chsh"] = chsh ? to_json(*chsh) : nlohmann::json();
    }

    report["marginals"] = to_json(marginals(log));
    report["no_signaling_gap"] = no_signaling_gap(log);

    if (options.eq3 && log.protocol == ProtocolMode::three_setting)
        report["eq3"] = to_json(eq3_scan(log));

    if (options.coincidence_window) {
        const FilterResult filtered =
            coincidence_filter(log, CoincidenceConfig{*options.coincidence_window});
        nlohmann::json section{{"window", *options.coincidence_window},
                               {"retained_fraction", filtered.retained_fraction},
                               {"retained_trials", filtered.log.trial_count()}};
        nlohmann::json filtered_correlations = nlohmann::json::object();
        for (const auto& pair : protocol_pairs(filtered.log.protocol))
            filtered_correlations[to_string(pair)] = to_json(correlation(filtered.log, pair));
        section["correlations"] = filtered_correlations;
        if (log.protocol == ProtocolMode::three_setting) {
            const auto bell = bell_statistic(filtered.log);
            section["bell"] = bell ? to_json(*bell) : nlohmann::json();
        } else {
            const auto chsh = chsh_statistic(filtered.log);
            section["chsh"] = chsh ? to_json(*chsh) : nlohmann::json();
        }
        report["coincidence"] = section;
    }
    return report;
}

inline nlohmann::json to_json(const BoundReport& report) {
    return nlohmann::json{{"max", report.max_value},
                          {"min", report.min_value},
                          {"attaining_assignments", report.attaining_assignments}};
}

inline nlohmann::json to_json(const IndependentCountReport& report) {
    return nlohmann::json{{"model", "independent_pairs"},
                          {"pair_counts", report.pair_counts},
                          {"exact_count", report.exact_count},
                          {"formula_value", report.formula_value},
                          {"enumerated", report.enumerated}};
}

inline nlohmann::json to_json(const CounterfactualCountReport& report) {
    return nlohmann::json{{"model", "counterfactual_triples"},
                          {"trials", report.trials},
                          {"four_setting", report.four_setting},
                          {"exact_count", report.exact_count},
                          {"independent_count_matched", report.independent_count_matched},
                          {"strict_subset", report.strict_subset},
                          {"sum_bounds_satisfied", report.sum_bounds_satisfied}};
}

inline nlohmann::json to_json(const FeasibilityReport& report) {
    nlohmann::json out{{"correlations",
                        {{"E_ab", report.correlations[0]},
                         {"E_ac", report.correlations[1]},
                         {"E_bc", report.correlations[2]}}},
                       {"feasible", report.feasible},
                       {"conditions", report.conditions}};
    out["witness"] = report.witness ? nlohmann::json(*report.witness) : nlohmann::json();
    return out;
}

inline nlohmann::json to_json(const ImpossibleMassReport& report) {
    return nlohmann::json{{"left_mass", report.left_mass}, {"right_mass", report.right_mass}};
}

}  // namespace eprb
