#pragma once

// Source and station models.
//
// Local models (static, dynamic, timetag) compute a station's outcome from
// the station's own setting, the pair state and the station clock; nothing
// in their signatures can carry remote information. The singlet reference
// sampler is the one deliberate exception: it reads both settings and is
// used only as an oracle data generator for the quantum target.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>

#include "eprb/core.hpp"
#include "eprb/rng.hpp"

namespace eprb {

struct SourceConfig {
    enum class LambdaDistribution : std::uint8_t { uniform, fixed };

    LambdaDistribution lambda_distribution{LambdaDistribution::uniform};
    double fixed_value{0.0};  // used when fixed; normalized to [0, 2*pi)
    unsigned aux_dimension{0};
};

struct StationConfig {
    enum class Kind : std::uint8_t { Static, Dynamic, Timetag };

    Kind kind{Kind::Static};
    int periodicity{1};          // p in {1, 2}
    double drift_rate{0.0};      // radians per tick, dynamic only, right station
    double delay_scale{1.0};     // T0 > 0, timetag only
    double delay_exponent{4.0};  // d > 0, timetag only
};

// Deterministic function of (cfg, trial_index, seed). The lambda draw and
// the aux draws come from the trial's source stream, so trials can be
// generated in any order or in parallel.
inline PairState draw_pair_state(const SourceConfig& cfg, std::uint64_t trial_index,
                                 std::uint64_t seed) {
    if (trial_index < 1) throw std::invalid_argument("trial_index must be >= 1");
    RngStream stream(seed, StreamDomain::source, trial_index);
    PairState state;
    state.emission_tick = trial_index;
    if (cfg.lambda_distribution == SourceConfig::LambdaDistribution::fixed)
        state.lambda = normalize_angle(cfg.fixed_value);
    else
        state.lambda = stream.next_angle();
    state.aux.reserve(cfg.aux_dimension);
    for (unsigned i = 0; i < cfg.aux_dimension; ++i) state.aux.push_back(stream.next_unit());
    return state;
}

// sign with the tie broken upward: sign(0) = +1.
inline int sign_pm(double x) { return x >= 0.0 ? +1 : -1; }

// Counterfactually definite station: outcome depends only on the local
// setting and the pair state.
inline int static_station(const Setting& setting, const PairState& state, int periodicity) {
    return sign_pm(std::cos(periodicity * (setting.angle - state.lambda)));
}

// Time-dependent station. A drift g(t) = drift_rate * t rotates the right
// station's frame; the left station keeps g = 0, so marginals stay uniform
// while the pair correlations become time-dependent.
inline int dynamic_station(const Setting& setting, const PairState& state, std::uint64_t tick,
                           const StationConfig& cfg) {
    const double drift =
        setting.side == Side::right ? cfg.drift_rate * static_cast<double>(tick) : 0.0;
    return sign_pm(std::cos(cfg.periodicity * (setting.angle - state.lambda + drift)));
}

struct TimetagResult {
    int outcome;
    double delay;
};

// Detection-delay station. The two particles of a pair carry orthogonal
// internal angles (photon-pair convention), so the right station sees the
// partner angle lambda + pi/p. The delay law
//     tau = T0 * r * |sin(p * (theta - lambda_local))|^d,  r ~ U[0,1)
// is unchanged by the pi/p offset; only the outcome sign is.
inline TimetagResult timetag_station(const Setting& setting, const PairState& state,
                                     const StationConfig& cfg, RngStream& stream) {
    const double local_lambda = setting.side == Side::right
                                    ? normalize_angle(state.lambda + kPi / cfg.periodicity)
                                    : state.lambda;
    const double x = cfg.periodicity * (setting.angle - local_lambda);
    const double r = stream.next_unit();
    const double delay =
        cfg.delay_scale * r * std::pow(std::fabs(std::sin(x)), cfg.delay_exponent);
    return TimetagResult{sign_pm(std::cos(x)), delay};
}

// Non-local reference sampler for the singlet target
//     E(left, right) = -cos(p * (left.angle - right.angle))
// with uniform +-1 marginals, realized by joint sampling with
// P(equal outcomes) = (1 + E) / 2. This reads BOTH settings; it must never
// be composed with local-model claims.
inline std::pair<int, int> singlet_reference_sample(const Setting& left, const Setting& right,
                                                    int periodicity, RngStream& stream) {
    const double expectation = -std::cos(periodicity * (left.angle - right.angle));
    const int left_outcome = stream.next_sign();
    const double p_equal = 0.5 * (1.0 + expectation);
    const int right_outcome = stream.next_unit() < p_equal ? left_outcome : -left_outcome;
    return {left_outcome, right_outcome};
}

}  // namespace eprb
