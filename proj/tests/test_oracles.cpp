#include <array>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"

#include "eprb/oracles.hpp"
#include "eprb/runner.hpp"

using namespace eprb;

namespace {

int bell_value(const std::vector<int>& x) { return x[0] * x[1] + x[0] * x[2] - x[1] * x[2]; }
int eq3_value(const std::vector<int>& x) { return x[0] * x[1] + x[2] * x[3] - x[4] * x[5]; }

// Hand-built three-setting log with the given per-trial setting pairs.
EventLog log_with_pairs(const std::vector<std::pair<SettingLabel, SettingLabel>>& pairs) {
    EventLog log;
    log.protocol = ProtocolMode::three_setting;
    for (SettingLabel label : {SettingLabel::a, SettingLabel::b, SettingLabel::c}) {
        log.settings.left[label] = 0.0;
        log.settings.right[label] = 0.0;
    }
    std::uint64_t n = 0;
    for (const auto& [left, right] : pairs) {
        ++n;
        Trial trial;
        trial.n = n;
        trial.left = {left, n, +1, std::nullopt};
        trial.right = {right, n, +1, std::nullopt};
        log.trials.push_back(trial);
    }
    for (const auto& pair : protocol_pairs(log.protocol)) log.pair_counts[pair] = 0;
    for (const auto& trial : log.trials)
        log.pair_counts[SettingPair{trial.left.setting_label, trial.right.setting_label}] += 1;
    return log;
}

}  // namespace

TEST_CASE("enumerate_bell_bound: max 1, min -3, attaining assignments check out") {
    const BoundReport report = enumerate_bell_bound();
    CHECK(report.max_value == 1);
    CHECK(report.min_value == -3);
    CHECK(report.attaining_assignments.size() == 6);
    for (const auto& assignment : report.attaining_assignments)
        CHECK(bell_value(assignment) == report.max_value);
    CHECK(bell_value({+1, +1, +1}) == 1);
}

TEST_CASE("enumerate_eq3_bound: max 3, min -3 over the 64 assignments") {
    const BoundReport report = enumerate_eq3_bound();
    CHECK(report.max_value == 3);
    CHECK(report.min_value == -3);
    CHECK(report.attaining_assignments.size() == 8);
    for (const auto& assignment : report.attaining_assignments)
        CHECK(eq3_value(assignment) == report.max_value);
    CHECK(eq3_value({+1, +1, +1, +1, +1, +1}) == 1);
}

TEST_CASE("count_reachable_independent: named examples") {
    CHECK(count_reachable_independent(0, 0, 0).exact_count == 1);
    CHECK(count_reachable_independent(1, 1, 1).exact_count == 8);

    const IndependentCountReport r222 = count_reachable_independent(2, 2, 2);
    CHECK(r222.exact_count == 27);
    CHECK(r222.formula_value == 27);
    CHECK(r222.enumerated);
}

TEST_CASE("count_reachable_independent: exhaustive count equals the formula for all N <= 4") {
    for (std::uint64_t n_ab = 0; n_ab <= 4; ++n_ab)
        for (std::uint64_t n_ac = 0; n_ac <= 4; ++n_ac)
            for (std::uint64_t n_bc = 0; n_bc <= 4; ++n_bc) {
                const IndependentCountReport report =
                    count_reachable_independent(n_ab, n_ac, n_bc);
                REQUIRE(report.enumerated);
                CHECK(report.exact_count == (n_ab + 1) * (n_ac + 1) * (n_bc + 1));
                CHECK(report.exact_count == report.formula_value);
            }
}

TEST_CASE("count_reachable_independent falls back to the formula above the cap") {
    const IndependentCountReport report = count_reachable_independent(20, 3, 3);
    CHECK(!report.enumerated);
    CHECK(report.exact_count == 21 * 4 * 4);
}

TEST_CASE("count_reachable_counterfactual: three-setting examples") {
    CHECK(count_reachable_counterfactual(0, false).exact_count == 1);

    const CounterfactualCountReport m1 = count_reachable_counterfactual(1, false);
    CHECK(m1.exact_count == 4);  // per-trial products obey p_ab*p_ac*p_bc = +1
    CHECK(m1.independent_count_matched == 8);
    CHECK(m1.strict_subset);
    CHECK(m1.sum_bounds_satisfied);

    const CounterfactualCountReport m2 = count_reachable_counterfactual(2, false);
    CHECK(m2.exact_count == 10);
    CHECK(m2.independent_count_matched == 27);
    CHECK(m2.strict_subset);
    CHECK(m2.sum_bounds_satisfied);
}

TEST_CASE("count_reachable_counterfactual: strict subset and bounds up to the cap") {
    for (std::uint64_t m = 1; m <= 6; ++m) {
        const CounterfactualCountReport report = count_reachable_counterfactual(m, false);
        CHECK(report.strict_subset);
        CHECK(report.sum_bounds_satisfied);
        CHECK(report.exact_count < (m + 1) * (m + 1) * (m + 1));
    }
    for (std::uint64_t m = 1; m <= 4; ++m) {
        const CounterfactualCountReport report = count_reachable_counterfactual(m, true);
        CHECK(report.strict_subset);
        CHECK(report.sum_bounds_satisfied);
        CHECK(report.exact_count < (m + 1) * (m + 1) * (m + 1) * (m + 1));
    }
}

TEST_CASE("count_reachable_counterfactual rejects sizes above the cap") {
    CHECK_THROWS_WITH_AS(count_reachable_counterfactual(7, false), doctest::Contains("M <= 6"),
                         std::domain_error);
    CHECK_THROWS_WITH_AS(count_reachable_counterfactual(5, true), doctest::Contains("M <= 4"),
                         std::domain_error);
}

TEST_CASE("boole_feasibility: named examples") {
    CHECK(boole_feasibility(1.0, 1.0, 1.0).feasible);
    CHECK(!boole_feasibility(-1.0, -1.0, -1.0).feasible);
    CHECK(!boole_feasibility(0.5, 1.0, -0.5).feasible);  // the B = 2 singlet point
    CHECK_THROWS_AS(boole_feasibility(1.5, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("boole_feasibility witnesses are valid distributions with the right correlations") {
    for (double e_ab = -1.0; e_ab <= 1.0; e_ab += 0.25) {
        for (double e_ac = -1.0; e_ac <= 1.0; e_ac += 0.25) {
            for (double e_bc = -1.0; e_bc <= 1.0; e_bc += 0.25) {
                const FeasibilityReport report = boole_feasibility(e_ab, e_ac, e_bc);
                if (!report.feasible) {
                    CHECK(!report.witness.has_value());
                    continue;
                }
                REQUIRE(report.witness.has_value());
                const auto& q = *report.witness;
                double total = 0.0, s_ab = 0.0, s_ac = 0.0, s_bc = 0.0;
                for (int x = -1; x <= 1; x += 2)
                    for (int y = -1; y <= 1; y += 2)
                        for (int z = -1; z <= 1; z += 2) {
                            const double w = q[4 * (x > 0) + 2 * (y > 0) + (z > 0)];
                            REQUIRE(w >= 0.0);
                            total += w;
                            s_ab += w * x * y;
                            s_ac += w * x * z;
                            s_bc += w * y * z;
                        }
                CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
                CHECK(s_ab == doctest::Approx(e_ab).epsilon(1e-12));
                CHECK(s_ac == doctest::Approx(e_ac).epsilon(1e-12));
                CHECK(s_bc == doctest::Approx(e_bc).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("boole_feasibility agrees with a brute-force mixture search at step 1/64") {
    // Mixtures of the 8 deterministic assignments: atoms sharing a
    // pair-product signature pool their weight, leaving the four signature
    // vertices below. Every weight assignment at step 1/64 projects onto a
    // composition of 64 over these vertices with the same correlations.
    const std::array<std::array<int, 3>, 4> vertices = {
        {{+1, +1, +1}, {+1, -1, -1}, {-1, +1, -1}, {-1, -1, +1}}};
    int checked = 0;
    for (int m1 = 0; m1 <= 64; ++m1)
        for (int m2 = 0; m2 + m1 <= 64; ++m2)
            for (int m3 = 0; m3 + m2 + m1 <= 64; ++m3) {
                const int m4 = 64 - m1 - m2 - m3;
                const std::array<int, 4> weights = {m1, m2, m3, m4};
                double e_ab = 0.0, e_ac = 0.0, e_bc = 0.0;
                for (int j = 0; j < 4; ++j) {
                    e_ab += weights[j] * vertices[j][0];
                    e_ac += weights[j] * vertices[j][1];
                    e_bc += weights[j] * vertices[j][2];
                }
                e_ab /= 64.0;
                e_ac /= 64.0;
                e_bc /= 64.0;
                // Search-feasible points must be closed-form feasible.
                const FeasibilityReport report = boole_feasibility(e_ab, e_ac, e_bc);
                REQUIRE(report.feasible);
                ++checked;
            }
    CHECK(checked == 47905);  // compositions of 64 into 4 nonnegative parts
}

TEST_CASE("boole_feasibility: the Bell form implies infeasibility on the 0.1 grid") {
    for (int i = -10; i <= 10; ++i)
        for (int j = -10; j <= 10; ++j)
            for (int k = -10; k <= 10; ++k) {
                const double e_ab = i / 10.0, e_ac = j / 10.0, e_bc = k / 10.0;
                if (e_ab + e_ac - e_bc > 1.0 + 1e-12)
                    CHECK(!boole_feasibility(e_ab, e_ac, e_bc).feasible);
            }
}

TEST_CASE("product_space_impossible_mass: single setting gives zero mass") {
    const EventLog log = log_with_pairs(std::vector<std::pair<SettingLabel, SettingLabel>>(
        50, {SettingLabel::a, SettingLabel::b}));
    const ImpossibleMassReport report = product_space_impossible_mass(log);
    CHECK(report.left_mass == 0.0);
    CHECK(report.right_mass == 0.0);
}

TEST_CASE("product_space_impossible_mass: the (a, a, b) worked example is exactly 4/9") {
    EventLog log;
    log.protocol = ProtocolMode::three_setting;
    for (SettingLabel label : {SettingLabel::a, SettingLabel::b, SettingLabel::c}) {
        log.settings.left[label] = 0.0;
        log.settings.right[label] = 0.0;
    }
    auto add = [&log](std::uint64_t n, SettingLabel left, SettingLabel right) {
        Trial trial;
        trial.n = n;
        trial.left = {left, n, +1, std::nullopt};
        trial.right = {right, n, +1, std::nullopt};
        log.trials.push_back(trial);
    };
    add(1, SettingLabel::a, SettingLabel::b);
    add(2, SettingLabel::a, SettingLabel::c);
    add(3, SettingLabel::b, SettingLabel::c);
    for (const auto& pair : protocol_pairs(log.protocol)) log.pair_counts[pair] = 0;
    for (const auto& trial : log.trials)
        log.pair_counts[SettingPair{trial.left.setting_label, trial.right.setting_label}] += 1;

    const ImpossibleMassReport report = product_space_impossible_mass(log);
    CHECK(report.left_mass == 4.0 / 9.0);   // left settings (a, a, b)
    CHECK(report.right_mass == 4.0 / 9.0);  // right settings (b, c, c)
}

TEST_CASE("product_space_impossible_mass approaches 1/2 for uniform two-setting stations") {
    RunConfig cfg;
    cfg.protocol = Protocol::four_setting();  // left uses {a, c}, right uses {b, d}
    cfg.trials = 10000;
    cfg.model = ModelKind::Static;
    cfg.seed = 23;
    for (SettingLabel label :
         {SettingLabel::a, SettingLabel::b, SettingLabel::c, SettingLabel::d}) {
        cfg.settings.left[label] = 0.5;
        cfg.settings.right[label] = 0.5;
    }
    const ImpossibleMassReport report = product_space_impossible_mass(run_experiment(cfg));
    CHECK(std::fabs(report.left_mass - 0.5) < 0.02);
    CHECK(std::fabs(report.right_mass - 0.5) < 0.02);
}

TEST_CASE("product_space_impossible_mass is zero iff each station used one setting") {
    RngStream fuzz(88, StreamDomain::schedule, 4);
    const auto all_pairs = protocol_pairs(ProtocolMode::three_setting);
    for (int round = 0; round < 30; ++round) {
        std::vector<std::pair<SettingLabel, SettingLabel>> pairs;
        for (int t = 0; t < 40; ++t) {
            if (round % 2 == 1) {
                pairs.push_back({SettingLabel::a, SettingLabel::b});
            } else {
                const auto& pair = all_pairs[fuzz.next_u64() % all_pairs.size()];
                pairs.push_back({pair.first, pair.second});
            }
        }
        const EventLog log = log_with_pairs(pairs);

        std::set<SettingLabel> left_used, right_used;
        for (const Trial& trial : log.trials) {
            left_used.insert(trial.left.setting_label);
            right_used.insert(trial.right.setting_label);
        }
        const ImpossibleMassReport report = product_space_impossible_mass(log);
        CHECK((report.left_mass == 0.0) == (left_used.size() == 1));
        CHECK((report.right_mass == 0.0) == (right_used.size() == 1));
        CHECK(report.left_mass >= 0.0);
        CHECK(report.left_mass <= 1.0);
    }
    EventLog empty_log;
    CHECK_THROWS_AS(product_space_impossible_mass(empty_log), std::invalid_argument);
}
