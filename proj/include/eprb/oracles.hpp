#pragma once

// Exact, exhaustive verifications of the combinatorial side of the lab:
//
//   - pointwise bounds of the three-variable Bell combination (8 cases)
//     and of its six-variable time-indexed counterpart (64 cases);
//   - counting of reachable pair-product sum tuples, for trials with
//     independent per-pair products versus trials carrying one shared
//     counterfactual assignment of all setting variables;
//   - existence of a joint +-1 distribution with given pairwise
//     correlations (Boole conditions), solved exactly over the 8 atom
//     weights with an explicit witness;
//   - the product-probability-space mass assigned to (setting, tick)
//     combinations that never occur in a log.
//
// Enumerations are capped so every oracle runs in well under a second;
// above the caps only closed-form values are reported or the call is
// rejected.

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "eprb/core.hpp"

namespace eprb {

struct BoundReport {
    int max_value{0};
    int min_value{0};
    // Assignments attaining max_value, one vector of +-1 values per
    // assignment, in the enumeration's variable order.
    std::vector<std::vector<int>> attaining_assignments;
};

// Enumerates all 8 assignments of (A_a, A_b, A_c) in {-1,+1}^3 and
// evaluates A_a*A_b + A_a*A_c - A_b*A_c. Max is 1, min is -3.
inline BoundReport enumerate_bell_bound() {
    BoundReport report;
    report.max_value = -4;
    report.min_value = 4;
    std::vector<std::pair<std::vector<int>, int>> values;
    for (int bits = 0; bits < 8; ++bits) {
        const int aa = (bits & 1) ? 1 : -1;
        const int ab = (bits & 2) ? 1 : -1;
        const int ac = (bits & 4) ? 1 : -1;
        const int value = aa * ab + aa * ac - ab * ac;
        values.push_back({{aa, ab, ac}, value});
        report.max_value = std::max(report.max_value, value);
        report.min_value = std::min(report.min_value, value);
    }
    for (auto& [assignment, value] : values)
        if (value == report.max_value) report.attaining_assignments.push_back(assignment);
    return report;
}

// Enumerates all 64 assignments of the six independent time-indexed
// variables (A_a@tn, A_b@tn', A_a@tk, A_c@tk', A_b@tm, A_c@tm') and
// evaluates x1*x2 + x3*x4 - x5*x6. Max is 3, min is -3.
inline BoundReport enumerate_eq3_bound() {
    BoundReport report;
    report.max_value = -4;
    report.min_value = 4;
    std::vector<std::pair<std::vector<int>, int>> values;
    for (int bits = 0; bits < 64; ++bits) {
        std::vector<int> x(6);
        for (int i = 0; i < 6; ++i) x[i] = (bits >> i) & 1 ? 1 : -1;
        const int value = x[0] * x[1] + x[2] * x[3] - x[4] * x[5];
        values.push_back({x, value});
        report.max_value = std::max(report.max_value, value);
        report.min_value = std::min(report.min_value, value);
    }
    for (auto& [assignment, value] : values)
        if (value == report.max_value) report.attaining_assignments.push_back(assignment);
    return report;
}

inline constexpr std::uint64_t kIndependentEnumerationCap = 8;   // per pair count
inline constexpr std::uint64_t kCounterfactualCap3 = 6;          // 2^(3M) assignments
inline constexpr std::uint64_t kCounterfactualCap4 = 4;          // 2^(4M) assignments

struct IndependentCountReport {
    std::array<std::uint64_t, 3> pair_counts{};  // N_ab, N_ac, N_bc
    std::uint64_t exact_count{0};
    std::uint64_t formula_value{0};  // (N_ab+1)(N_ac+1)(N_bc+1)
    bool enumerated{false};          // exhaustive path taken
};

// Number of distinct sum triples (S_ab, S_ac, S_bc) reachable when every
// trial's pair product is a free +-1. Within the cap the count is
// established by exhaustive enumeration over all 2^(N_ab+N_ac+N_bc)
// product assignments and always equals the product formula.
inline IndependentCountReport count_reachable_independent(std::uint64_t n_ab, std::uint64_t n_ac,
                                                          std::uint64_t n_bc) {
    IndependentCountReport report;
    report.pair_counts = {n_ab, n_ac, n_bc};
    const unsigned __int128 wide = static_cast<unsigned __int128>(n_ab + 1) * (n_ac + 1) *
                                   static_cast<unsigned __int128>(n_bc + 1);
    if (wide > std::numeric_limits<std::uint64_t>::max())
        throw std::domain_error("pair counts too large: the product formula overflows 64 bits");
    report.formula_value = static_cast<std::uint64_t>(wide);
    if (n_ab > kIndependentEnumerationCap || n_ac > kIndependentEnumerationCap ||
        n_bc > kIndependentEnumerationCap) {
        report.exact_count = report.formula_value;
        report.enumerated = false;
        return report;
    }

    const std::uint64_t total_bits = n_ab + n_ac + n_bc;
    const std::size_t dim_ab = n_ab + 1, dim_ac = n_ac + 1, dim_bc = n_bc + 1;
    std::vector<bool> seen(dim_ab * dim_ac * dim_bc, false);
    std::uint64_t distinct = 0;
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << total_bits); ++bits) {
        // A set bit is a +1 product: S = N - 2 * (# of -1 products).
        const std::uint64_t ones_ab = static_cast<std::uint64_t>(
            __builtin_popcountll(bits & ((std::uint64_t{1} << n_ab) - 1)));
        const std::uint64_t ones_ac = static_cast<std::uint64_t>(
            __builtin_popcountll((bits >> n_ab) & ((std::uint64_t{1} << n_ac) - 1)));
        const std::uint64_t ones_bc = static_cast<std::uint64_t>(
            __builtin_popcountll((bits >> (n_ab + n_ac)) & ((std::uint64_t{1} << n_bc) - 1)));
        const std::size_t index = (ones_ab * dim_ac + ones_ac) * dim_bc + ones_bc;
        if (!seen[index]) {
            seen[index] = true;
            ++distinct;
        }
    }
    report.exact_count = distinct;
    report.enumerated = true;
    return report;
}

struct CounterfactualCountReport {
    std::uint64_t trials{0};
    bool four_setting{false};
    std::uint64_t exact_count{0};
    // Independent-model count at matched pair counts: (M+1)^(#pairs).
    std::uint64_t independent_count_matched{0};
    bool strict_subset{false};          // reachable set strictly inside the independent one
    bool sum_bounds_satisfied{false};   // every tuple obeys the cyclic sum-level bounds
};

namespace detail {

// Cyclic three-setting sum bounds: for every sign pattern with an even
// number of minus signs, s . S >= -M (equivalently each single-minus Bell
// form and the all-minus form stay <= M).
inline bool three_setting_sum_bounds(std::int64_t s_ab, std::int64_t s_ac, std::int64_t s_bc,
                                     std::int64_t m) {
    const std::array<std::array<int, 3>, 4> even_minus = {
        {{+1, +1, +1}, {+1, -1, -1}, {-1, +1, -1}, {-1, -1, +1}}};
    for (const auto& s : even_minus)
        if (s[0] * s_ab + s[1] * s_ac + s[2] * s_bc < -m) return false;
    return true;
}

// Four-setting analogue: every odd-minus sign pattern keeps |s . S| <= 2M,
// the sum-level CHSH bounds.
inline bool four_setting_sum_bounds(const std::array<std::int64_t, 4>& sums, std::int64_t m) {
    for (int pattern = 0; pattern < 16; ++pattern) {
        int minus_count = __builtin_popcount(pattern);
        if (minus_count % 2 == 0) continue;
        std::int64_t value = 0;
        for (int i = 0; i < 4; ++i) value += ((pattern >> i) & 1 ? -1 : +1) * sums[i];
        if (value > 2 * m || value < -2 * m) return false;
    }
    return true;
}

}  // namespace detail

// Number of distinct sum tuples when each trial carries ONE assignment of
// all setting variables and every pair product of that trial contributes
// to its sum. Exhaustive over 2^(3M) (three-setting) or 2^(4M)
// (four-setting) assignments; throws above the cap.
inline CounterfactualCountReport count_reachable_counterfactual(std::uint64_t trials,
                                                                bool four_setting) {
    CounterfactualCountReport report;
    report.trials = trials;
    report.four_setting = four_setting;

    if (!four_setting) {
        if (trials > kCounterfactualCap3)
            throw std::domain_error("counterfactual enumeration capped at M <= " +
                                    std::to_string(kCounterfactualCap3) +
                                    " for the three-setting protocol");
        report.independent_count_matched = (trials + 1) * (trials + 1) * (trials + 1);

        // Per-trial products (p_ab, p_ac, p_bc) for the 8 assignments of
        // (A_a, A_b, A_c); only even-minus product patterns occur.
        std::array<std::array<int, 3>, 8> products{};
        for (int bits = 0; bits < 8; ++bits) {
            const int aa = (bits & 1) ? 1 : -1;
            const int ab = (bits & 2) ? 1 : -1;
            const int ac = (bits & 4) ? 1 : -1;
            products[bits] = {aa * ab, aa * ac, ab * ac};
        }

        std::map<std::array<std::int64_t, 3>, bool> seen;
        const std::uint64_t total = std::uint64_t{1} << (3 * trials);
        for (std::uint64_t code = 0; code < total; ++code) {
            std::array<std::int64_t, 3> sums{0, 0, 0};
            std::uint64_t rest = code;
            for (std::uint64_t t = 0; t < trials; ++t) {
                const auto& p = products[rest & 7];
                rest >>= 3;
                sums[0] += p[0];
                sums[1] += p[1];
                sums[2] += p[2];
            }
            seen[sums] = true;
        }

        report.exact_count = seen.size();
        report.sum_bounds_satisfied = true;
        for (const auto& [sums, _] : seen)
            report.sum_bounds_satisfied =
                report.sum_bounds_satisfied &&
                detail::three_setting_sum_bounds(sums[0], sums[1], sums[2],
                                                 static_cast<std::int64_t>(trials));
        // Membership in the independent set is structural (each sum is a
        // length-M +-1 sum); strictness is the count comparison.
        report.strict_subset =
            trials >= 1 && report.exact_count < report.independent_count_matched;
        return report;
    }

    if (trials > kCounterfactualCap4)
        throw std::domain_error("counterfactual enumeration capped at M <= " +
                                std::to_string(kCounterfactualCap4) +
                                " for the four-setting protocol");
    report.independent_count_matched =
        (trials + 1) * (trials + 1) * (trials + 1) * (trials + 1);

    // Products (p_ab, p_ad, p_cb, p_cd) for the 16 assignments of
    // (A_a, A_c, A_b, A_d).
    std::array<std::array<int, 4>, 16> products{};
    for (int bits = 0; bits < 16; ++bits) {
        const int aa = (bits & 1) ? 1 : -1;
        const int ac = (bits & 2) ? 1 : -1;
        const int ab = (bits & 4) ? 1 : -1;
        const int ad = (bits & 8) ? 1 : -1;
        products[bits] = {aa * ab, aa * ad, ac * ab, ac * ad};
    }

    std::map<std::array<std::int64_t, 4>, bool> seen;
    const std::uint64_t total = std::uint64_t{1} << (4 * trials);
    for (std::uint64_t code = 0; code < total; ++code) {
        std::array<std::int64_t, 4> sums{0, 0, 0, 0};
        std::uint64_t rest = code;
        for (std::uint64_t t = 0; t < trials; ++t) {
            const auto& p = products[rest & 15];
            rest >>= 4;
            for (int i = 0; i < 4; ++i) sums[i] += p[i];
        }
        seen[sums] = true;
    }

    report.exact_count = seen.size();
    report.sum_bounds_satisfied = true;
    for (const auto& [sums, _] : seen)
        report.sum_bounds_satisfied =
            report.sum_bounds_satisfied &&
            detail::four_setting_sum_bounds(sums, static_cast<std::int64_t>(trials));
    report.strict_subset =
        trials >= 1 && report.exact_count < report.independent_count_matched;
    return report;
}

struct FeasibilityReport {
    std::array<double, 3> correlations{};  // E_ab, E_ac, E_bc
    bool feasible{false};
    // 1 + s.E for the even-minus sign patterns, in the order
    // (+,+,+), (+,-,-), (-,+,-), (-,-,+). Feasible iff all >= 0.
    std::array<double, 4> conditions{};
    // Atom weights over (x, y, z) in {-1,+1}^3, index = 4*(x>0) + 2*(y>0)
    // + (z>0); present iff feasible.
    std::optional<std::array<double, 8>> witness;
};

// Decides whether a probability distribution over {-1,+1}^3 exists whose
// pairwise product expectations match the inputs. Solved exactly over the
// 8 atom weights: the linear system for weights with unbiased single
// variables has the unique symmetric solution
//     q(x,y,z) = (1 + xy E_ab + xz E_ac + yz E_bc) / 8,
// which is a valid distribution exactly when the four Boole conditions
// hold; those conditions are necessary for any distribution.
inline FeasibilityReport boole_feasibility(double e_ab, double e_ac, double e_bc) {
    for (double e : {e_ab, e_ac, e_bc})
        if (!(e >= -1.0 && e <= 1.0))
            throw std::invalid_argument("correlations must lie in [-1, 1]");

    FeasibilityReport report;
    report.correlations = {e_ab, e_ac, e_bc};
    report.conditions = {
        1.0 + e_ab + e_ac + e_bc,
        1.0 + e_ab - e_ac - e_bc,
        1.0 - e_ab + e_ac - e_bc,
        1.0 - e_ab - e_ac + e_bc,
    };
    report.feasible = true;
    for (double c : report.conditions) report.feasible = report.feasible && c >= 0.0;

    if (report.feasible) {
        std::array<double, 8> witness{};
        for (int x = -1; x <= 1; x += 2)
            for (int y = -1; y <= 1; y += 2)
                for (int z = -1; z <= 1; z += 2) {
                    const int index = 4 * (x > 0) + 2 * (y > 0) + (z > 0);
                    witness[index] =
                        (1.0 + x * y * e_ab + x * z * e_ac + y * z * e_bc) / 8.0;
                }
        report.witness = witness;
    }
    return report;
}

struct ImpossibleMassReport {
    double left_mass{0.0};
    double right_mass{0.0};
};

namespace detail {

inline double impossible_mass_for_station(const EventLog& log, Side side) {
    std::map<SettingLabel, std::uint64_t> counts;
    for (const Trial& trial : log.trials) {
        const StationRecord& rec = side == Side::left ? trial.left : trial.right;
        counts[rec.setting_label] += 1;
    }
    const std::uint64_t m = log.trials.size();
    // Ticks are unique, so each realized (setting, tick) cell carries
    // product mass P(setting)/M; realized mass sums to sum_j c_j^2 / M^2.
    std::uint64_t realized_numerator = 0;
    for (const auto& [label, count] : counts) realized_numerator += count * count;
    return static_cast<double>(m * m - realized_numerator) / static_cast<double>(m * m);
}

}  // namespace detail

// Mass the product of the per-station setting and tick marginals assigns
// to (setting, tick) combinations never realized in the log. Strictly
// positive as soon as a station used two distinct settings.
inline ImpossibleMassReport product_space_impossible_mass(const EventLog& log) {
    if (log.trials.empty())
        throw std::invalid_argument("product_space_impossible_mass requires at least one trial");
    return ImpossibleMassReport{detail::impossible_mass_for_station(log, Side::left),
                                detail::impossible_mass_for_station(log, Side::right)};
}

}  // namespace eprb
