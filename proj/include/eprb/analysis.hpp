#pragma once

// Log-derived statistics: pair correlations, the three-setting Bell
// statistic B = E(a,b) + E(a,c) - E(b,c), the four-setting CHSH statistic
// S = E(a,b) - E(a,d) + E(c,b) + E(c,d), per-run time-indexed expression
// values, pair-product sums, coincidence filtering, outcome marginals and
// the no-signaling gap.
//
// All product sums accumulate in exact integer arithmetic; estimates are
// formed by a single final division. Every operation is a pure function of
// the log, independent of trial order where the statistic is order-free.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "eprb/core.hpp"

namespace eprb {

// Sum of left*right outcome products over trials with the given pair.
// Always an integer with the parity of the pair count.
inline std::int64_t pair_product_sum(const EventLog& log, SettingPair pair) {
    std::int64_t sum = 0;
    for (const Trial& trial : log.trials)
        if (SettingPair{trial.left.setting_label, trial.right.setting_label} == pair)
            sum += static_cast<std::int64_t>(trial.left.outcome) * trial.right.outcome;
    return sum;
}

// Estimated correlation for one setting pair. count == 0 signals the
// empty-pair condition distinctly from a measured zero.
inline CorrelationEstimate correlation(const EventLog& log, SettingPair pair) {
    std::int64_t sum = 0;
    std::uint64_t count = 0;
    for (const Trial& trial : log.trials) {
        if (SettingPair{trial.left.setting_label, trial.right.setting_label} == pair) {
            sum += static_cast<std::int64_t>(trial.left.outcome) * trial.right.outcome;
            ++count;
        }
    }
    CorrelationEstimate est;
    est.count = count;
    if (count > 0) {
        est.value = static_cast<double>(sum) / static_cast<double>(count);
        est.std_error = std::sqrt(std::max(0.0, 1.0 - est.value * est.value) /
                                  static_cast<double>(count));
    }
    return est;
}

struct BellReport {
    CorrelationEstimate e_ab, e_ac, e_bc;
    double statistic{0.0};        // B = E(a,b) + E(a,c) - E(b,c)
    bool bound_satisfied{false};  // B <= 1
};

// Three-setting Bell statistic. Empty when any required pair has no
// trials; B is undefined without all three estimates.
inline std::optional<BellReport> bell_statistic(const EventLog& log) {
    if (log.protocol != ProtocolMode::three_setting)
        throw std::invalid_argument("bell_statistic requires a three_setting log");
    using L = SettingLabel;
    BellReport report;
    report.e_ab = correlation(log, SettingPair{L::a, L::b});
    report.e_ac = correlation(log, SettingPair{L::a, L::c});
    report.e_bc = correlation(log, SettingPair{L::b, L::c});
    if (!report.e_ab.has_samples() || !report.e_ac.has_samples() || !report.e_bc.has_samples())
        return std::nullopt;
    report.statistic = report.e_ab.value + report.e_ac.value - report.e_bc.value;
    report.bound_satisfied = report.statistic <= 1.0;
    return report;
}

struct ChshReport {
    CorrelationEstimate e_ab, e_ad, e_cb, e_cd;
    double statistic{0.0};        // S = E(a,b) - E(a,d) + E(c,b) + E(c,d)
    bool bound_satisfied{false};  // S <= 2
};

// Four-setting CHSH statistic with the minus fixed on E(a,d); any other
// single-minus placement is equivalent under relabeling.
inline std::optional<ChshReport> chsh_statistic(const EventLog& log) {
    if (log.protocol != ProtocolMode::four_setting)
        throw std::invalid_argument("chsh_statistic requires a four_setting log");
    using L = SettingLabel;
    ChshReport report;
    report.e_ab = correlation(log, SettingPair{L::a, L::b});
    report.e_ad = correlation(log, SettingPair{L::a, L::d});
    report.e_cb = correlation(log, SettingPair{L::c, L::b});
    report.e_cd = correlation(log, SettingPair{L::c, L::d});
    if (!report.e_ab.has_samples() || !report.e_ad.has_samples() || !report.e_cb.has_samples() ||
        !report.e_cd.has_samples())
        return std::nullopt;
    report.statistic =
        report.e_ab.value - report.e_ad.value + report.e_cb.value + report.e_cd.value;
    report.bound_satisfied = report.statistic <= 2.0;
    return report;
}

namespace detail {

inline const Trial& trial_by_index(const EventLog& log, std::uint64_t index) {
    for (const Trial& trial : log.trials)
        if (trial.n == index) return trial;
    throw std::invalid_argument("trial " + std::to_string(index) + " not present in log");
}

inline int trial_product(const Trial& trial) {
    return trial.left.outcome * trial.right.outcome;
}

inline void require_pair(const Trial& trial, SettingPair expected) {
    const SettingPair actual{trial.left.setting_label, trial.right.setting_label};
    if (actual != expected)
        throw std::invalid_argument("trial " + std::to_string(trial.n) + " has setting pair " +
                                    to_string(actual) + ", expected " + to_string(expected));
}

}  // namespace detail

// Per-run, time-indexed Bell combination
//     product(n) + product(k) - product(m)
// over three distinct trials with pairs (a,b), (a,c), (b,c). The value is
// always in {-3, -1, 1, 3}; its only upper bound is 3.
inline int eq3_expression(const EventLog& log, std::uint64_t n, std::uint64_t k,
                          std::uint64_t m) {
    using L = SettingLabel;
    if (n == k || n == m || k == m)
        throw std::invalid_argument("trial indices must be all different");
    const Trial& tn = detail::trial_by_index(log, n);
    const Trial& tk = detail::trial_by_index(log, k);
    const Trial& tm = detail::trial_by_index(log, m);
    detail::require_pair(tn, SettingPair{L::a, L::b});
    detail::require_pair(tk, SettingPair{L::a, L::c});
    detail::require_pair(tm, SettingPair{L::b, L::c});
    return detail::trial_product(tn) + detail::trial_product(tk) - detail::trial_product(tm);
}

struct Eq3Summary {
    std::uint64_t triple_count{0};
    std::optional<int> max_value;        // empty when no triple can be formed
    std::map<int, std::uint64_t> histogram{{-3, 0}, {-1, 0}, {1, 0}, {3, 0}};
};

// Scans disjoint trial triples formed greedily in trial order (first unused
// trial of each pair type) and histograms the per-triple expression values.
inline Eq3Summary eq3_scan(const EventLog& log) {
    if (log.protocol != ProtocolMode::three_setting)
        throw std::invalid_argument("eq3_scan requires a three_setting log");
    using L = SettingLabel;
    const SettingPair ab{L::a, L::b}, ac{L::a, L::c}, bc{L::b, L::c};
    std::vector<int> products_ab, products_ac, products_bc;
    for (const Trial& trial : log.trials) {
        const SettingPair pair{trial.left.setting_label, trial.right.setting_label};
        if (pair == ab) products_ab.push_back(detail::trial_product(trial));
        else if (pair == ac) products_ac.push_back(detail::trial_product(trial));
        else if (pair == bc) products_bc.push_back(detail::trial_product(trial));
    }
    Eq3Summary summary;
    const std::size_t triples =
        std::min({products_ab.size(), products_ac.size(), products_bc.size()});
    summary.triple_count = triples;
    for (std::size_t i = 0; i < triples; ++i) {
        const int value = products_ab[i] + products_ac[i] - products_bc[i];
        summary.histogram[value] += 1;
        if (!summary.max_value || value > *summary.max_value) summary.max_value = value;
    }
    return summary;
}

struct CoincidenceConfig {
    double window{std::numeric_limits<double>::infinity()};  // >= 0 or infinite
};

struct FilterResult {
    EventLog log;
    double retained_fraction{1.0};
};

// Keeps trials whose detection-delay difference is within the window,
// reindexes them consecutively and retallies pair counts. An infinite
// window is the identity on trials.
inline FilterResult coincidence_filter(const EventLog& log, const CoincidenceConfig& cfg) {
    if (std::isnan(cfg.window) || cfg.window < 0.0)
        throw std::invalid_argument("coincidence window must be >= 0");
    FilterResult result;
    result.log.settings = log.settings;
    result.log.model_id = log.model_id;
    result.log.seed = log.seed;
    result.log.protocol = log.protocol;
    for (const auto& pair : protocol_pairs(log.protocol)) result.log.pair_counts[pair] = 0;

    for (const Trial& trial : log.trials) {
        if (!trial.left.delay || !trial.right.delay)
            throw std::invalid_argument("trial " + std::to_string(trial.n) +
                                        " has no delay on " +
                                        (trial.left.delay ? "the right side" : "the left side"));
        if (std::fabs(*trial.left.delay - *trial.right.delay) <= cfg.window) {
            Trial kept = trial;
            kept.n = result.log.trials.size() + 1;
            result.log.trials.push_back(kept);
            result.log.pair_counts[SettingPair{kept.left.setting_label,
                                               kept.right.setting_label}] += 1;
        }
    }
    result.retained_fraction =
        log.trials.empty() ? 1.0
                           : static_cast<double>(result.log.trials.size()) /
                                 static_cast<double>(log.trials.size());
    return result;
}

struct MarginalCell {
    std::uint64_t plus_count{0};
    std::uint64_t total{0};

    double plus_frequency() const {
        return total == 0 ? 0.0 : static_cast<double>(plus_count) / static_cast<double>(total);
    }
};

using MarginalTable = std::map<std::pair<Side, SettingLabel>, MarginalCell>;

// Per-station, per-setting outcome frequencies.
inline MarginalTable marginals(const EventLog& log) {
    MarginalTable table;
    for (const Trial& trial : log.trials) {
        for (Side side : {Side::left, Side::right}) {
            const StationRecord& rec = side == Side::left ? trial.left : trial.right;
            MarginalCell& cell = table[{side, rec.setting_label}];
            cell.total += 1;
            if (rec.outcome == +1) cell.plus_count += 1;
        }
    }
    return table;
}

// Largest deviation of a station's outcome marginal across remote settings:
//     max over (station, own setting) pairs of
//     |P(+1 | own, remote_1) - P(+1 | own, remote_2)|.
// Zero up to sampling error for every local model; cells with fewer than
// two observed remote settings contribute zero by convention.
inline double no_signaling_gap(const EventLog& log) {
    std::map<std::pair<Side, SettingLabel>, std::map<SettingLabel, MarginalCell>> cells;
    for (const Trial& trial : log.trials) {
        cells[{Side::left, trial.left.setting_label}][trial.right.setting_label].total += 1;
        if (trial.left.outcome == +1)
            cells[{Side::left, trial.left.setting_label}][trial.right.setting_label].plus_count +=
                1;
        cells[{Side::right, trial.right.setting_label}][trial.left.setting_label].total += 1;
        if (trial.right.outcome == +1)
            cells[{Side::right, trial.right.setting_label}][trial.left.setting_label].plus_count +=
                1;
    }
    double gap = 0.0;
    for (const auto& [station_setting, by_remote] : cells) {
        for (auto it = by_remote.begin(); it != by_remote.end(); ++it) {
            for (auto jt = std::next(it); jt != by_remote.end(); ++jt) {
                const double diff =
                    std::fabs(it->second.plus_frequency() - jt->second.plus_frequency());
                gap = std::max(gap, diff);
            }
        }
    }
    return gap;
}

}  // namespace eprb
