#pragma once

// Run configuration file format and the run manifest.
//
// Plain key = value lines; '#' starts a comment; blank lines ignored.
// Unknown keys are errors. Angles are given in degrees (human convention)
// and stored in radians. Schema:
//
//   model            static | dynamic | timetag | singlet   (required)
//   protocol         three_setting | four_setting           (required)
//   trials           integer >= 1                           (required)
//   seed             64-bit unsigned                        (default 0)
//   lambda           uniform | fixed                        (default uniform)
//   lambda_value_deg degrees, required when lambda = fixed
//   aux_dimension    small integer                          (default 0)
//   periodicity      1 | 2            (default 2 for timetag, else 1)
//   drift_rate       radians per tick, dynamic only         (default 0)
//   delay_scale      T0 > 0, timetag only                   (default 1)
//   delay_exponent   d > 0, timetag only                    (default 4)
//   right_tick_offset integer                               (default 0)
//   angle_a_deg .. angle_d_deg   analyzer angles in degrees
//                    (a, b, c required; d required for four_setting)
//   pair_probabilities comma list, 3 or 4 entries           (default uniform)
//
// The resolved configuration has a canonical text form (sorted key=value
// lines, angles in radians) whose FNV-1a digest identifies the run in the
// manifest.

#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "eprb/core.hpp"
#include "eprb/log_io.hpp"
#include "eprb/runner.hpp"

namespace eprb {

inline constexpr const char* kToolVersion = "0.1.0";

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kDegToRad = kPi / 180.0;

namespace detail {

inline std::string trim(const std::string& text) {
    const auto begin = text.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = text.find_last_not_of(" \t\r");
    return text.substr(begin, end - begin + 1);
}

inline std::uint64_t config_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t consumed = 0;
        const unsigned long long parsed = std::stoull(value, &consumed);
        if (consumed != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        throw ConfigError(key + " must be a non-negative integer, got '" + value + "'");
    }
}

inline double config_double(const std::string& key, const std::string& value) {
    try {
        std::size_t consumed = 0;
        const double parsed = std::stod(value, &consumed);
        if (consumed != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        throw ConfigError(key + " must be a number, got '" + value + "'");
    }
}

}  // namespace detail

// key = value lines -> ordered map. Duplicate and malformed lines are
// configuration errors.
inline std::map<std::string, std::string> parse_key_values(const std::string& text) {
    std::map<std::string, std::string> entries;
    std::istringstream in(text);
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_number) +
                              ": expected 'key = value', got '" + line + "'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(line_number) + ": empty key");
        if (!entries.emplace(key, value).second)
            throw ConfigError("duplicate key '" + key + "'");
    }
    return entries;
}

// A fully resolved run: the executable RunConfig plus the canonical
// key/value view used for digests and the manifest.
struct ResolvedRun {
    RunConfig run;
    std::map<std::string, std::string> resolved;  // canonical entries

    std::string canonical_text() const {
        std::ostringstream out;
        for (const auto& [key, value] : resolved) out << key << " = " << value << '\n';
        return out.str();
    }
};

inline std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t hash = 0xCBF29CE484222325ull;
    for (unsigned char byte : text) {
        hash ^= byte;
        hash *= 0x100000001B3ull;
    }
    return hash;
}

inline std::string digest_hex(std::uint64_t digest) {
    char buffer[19];
    std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(digest));
    return std::string(buffer);
}

// Validates raw entries against the schema and resolves defaults. Throws
// ConfigError naming the first violated constraint.
inline ResolvedRun resolve_run_config(std::map<std::string, std::string> entries) {
    static const std::set<std::string> known = {
        "model",       "protocol",         "trials",         "seed",
        "lambda",      "lambda_value_deg", "aux_dimension",  "periodicity",
        "drift_rate",  "delay_scale",      "delay_exponent", "right_tick_offset",
        "angle_a_deg", "angle_b_deg",      "angle_c_deg",    "angle_d_deg",
        "pair_probabilities",
    };
    for (const auto& [key, value] : entries)
        if (!known.count(key)) throw ConfigError("unknown key '" + key + "'");

    auto get = [&entries](const std::string& key) -> const std::string* {
        auto it = entries.find(key);
        return it == entries.end() ? nullptr : &it->second;
    };
    auto require = [&get](const std::string& key) -> const std::string& {
        const std::string* value = get(key);
        if (!value) throw ConfigError("missing required key '" + key + "'");
        return *value;
    };

    ResolvedRun out;
    RunConfig& cfg = out.run;

    const std::string model = require("model");
    if (model == "static") cfg.model = ModelKind::Static;
    else if (model == "dynamic") cfg.model = ModelKind::Dynamic;
    else if (model == "timetag") cfg.model = ModelKind::Timetag;
    else if (model == "singlet") cfg.model = ModelKind::SingletReference;
    else throw ConfigError("model must be static, dynamic, timetag or singlet, got '" + model +
                           "'");

    const std::string protocol = require("protocol");
    ProtocolMode mode;
    try {
        mode = parse_protocol_mode(protocol);
    } catch (const std::invalid_argument& err) {
        throw ConfigError(err.what());
    }

    cfg.trials = detail::config_u64("trials", require("trials"));
    if (cfg.trials < 1) throw ConfigError("trials must be >= 1");
    cfg.seed = get("seed") ? detail::config_u64("seed", *get("seed")) : 0;

    const std::string lambda = get("lambda") ? *get("lambda") : "uniform";
    if (lambda == "uniform") {
        cfg.source.lambda_distribution = SourceConfig::LambdaDistribution::uniform;
        if (get("lambda_value_deg"))
            throw ConfigError("lambda_value_deg is only valid when lambda = fixed");
    } else if (lambda == "fixed") {
        cfg.source.lambda_distribution = SourceConfig::LambdaDistribution::fixed;
        cfg.source.fixed_value = normalize_angle(
            detail::config_double("lambda_value_deg", require("lambda_value_deg")) * kDegToRad);
    } else {
        throw ConfigError("lambda must be uniform or fixed, got '" + lambda + "'");
    }
    cfg.source.aux_dimension = static_cast<unsigned>(
        get("aux_dimension") ? detail::config_u64("aux_dimension", *get("aux_dimension")) : 0);

    const std::uint64_t default_periodicity = cfg.model == ModelKind::Timetag ? 2 : 1;
    const std::uint64_t periodicity =
        get("periodicity") ? detail::config_u64("periodicity", *get("periodicity"))
                           : default_periodicity;
    if (periodicity != 1 && periodicity != 2) throw ConfigError("periodicity must be 1 or 2");
    cfg.station.periodicity = static_cast<int>(periodicity);

    switch (cfg.model) {
        case ModelKind::Static: cfg.station.kind = StationConfig::Kind::Static; break;
        case ModelKind::Dynamic: cfg.station.kind = StationConfig::Kind::Dynamic; break;
        case ModelKind::Timetag: cfg.station.kind = StationConfig::Kind::Timetag; break;
        case ModelKind::SingletReference: cfg.station.kind = StationConfig::Kind::Static; break;
    }

    if (get("drift_rate")) {
        if (cfg.model != ModelKind::Dynamic)
            throw ConfigError("drift_rate is only valid for model = dynamic");
        cfg.station.drift_rate = detail::config_double("drift_rate", *get("drift_rate"));
    }
    if (get("delay_scale")) {
        if (cfg.model != ModelKind::Timetag)
            throw ConfigError("delay_scale is only valid for model = timetag");
        cfg.station.delay_scale = detail::config_double("delay_scale", *get("delay_scale"));
        if (!(cfg.station.delay_scale > 0.0)) throw ConfigError("delay_scale must be > 0");
    }
    if (get("delay_exponent")) {
        if (cfg.model != ModelKind::Timetag)
            throw ConfigError("delay_exponent is only valid for model = timetag");
        cfg.station.delay_exponent =
            detail::config_double("delay_exponent", *get("delay_exponent"));
        if (!(cfg.station.delay_exponent > 0.0)) throw ConfigError("delay_exponent must be > 0");
    }
    cfg.right_tick_offset = get("right_tick_offset")
                                ? detail::config_u64("right_tick_offset", *get("right_tick_offset"))
                                : 0;

    const std::vector<SettingLabel> needed_labels =
        mode == ProtocolMode::three_setting
            ? std::vector<SettingLabel>{SettingLabel::a, SettingLabel::b, SettingLabel::c}
            : std::vector<SettingLabel>{SettingLabel::a, SettingLabel::b, SettingLabel::c,
                                        SettingLabel::d};
    for (SettingLabel label : needed_labels) {
        const std::string key = std::string("angle_") + to_char(label) + "_deg";
        const double radians =
            normalize_angle(detail::config_double(key, require(key)) * kDegToRad);
        cfg.settings.left[label] = radians;
        cfg.settings.right[label] = radians;
    }
    if (mode == ProtocolMode::three_setting && get("angle_d_deg"))
        throw ConfigError("angle_d_deg is only valid for protocol = four_setting");

    std::vector<double> probabilities;
    if (get("pair_probabilities")) {
        std::istringstream in(*get("pair_probabilities"));
        std::string item;
        while (std::getline(in, item, ','))
            probabilities.push_back(detail::config_double("pair_probabilities",
                                                          detail::trim(item)));
        const std::size_t expected = mode == ProtocolMode::three_setting ? 3 : 4;
        if (probabilities.size() != expected)
            throw ConfigError("pair_probabilities must list " + std::to_string(expected) +
                              " values");
    }
    cfg.protocol = mode == ProtocolMode::three_setting ? Protocol::three_setting(probabilities)
                                                       : Protocol::four_setting(probabilities);

    try {
        validate_run_config(cfg);
    } catch (const std::invalid_argument& err) {
        throw ConfigError(err.what());
    }

    // Canonical resolved view: every schema key that applies, angles in
    // radians, defaults made explicit.
    auto& resolved = out.resolved;
    resolved["model"] = model;
    resolved["protocol"] = to_string(mode);
    resolved["trials"] = std::to_string(cfg.trials);
    resolved["seed"] = std::to_string(cfg.seed);
    resolved["lambda"] = lambda;
    if (lambda == "fixed")
        resolved["lambda_value_rad"] = detail::format_double(cfg.source.fixed_value);
    resolved["aux_dimension"] = std::to_string(cfg.source.aux_dimension);
    resolved["periodicity"] = std::to_string(cfg.station.periodicity);
    if (cfg.model == ModelKind::Dynamic)
        resolved["drift_rate"] = detail::format_double(cfg.station.drift_rate);
    if (cfg.model == ModelKind::Timetag) {
        resolved["delay_scale"] = detail::format_double(cfg.station.delay_scale);
        resolved["delay_exponent"] = detail::format_double(cfg.station.delay_exponent);
    }
    resolved["right_tick_offset"] = std::to_string(cfg.right_tick_offset);
    for (SettingLabel label : needed_labels)
        resolved[std::string("angle_") + to_char(label) + "_rad"] =
            detail::format_double(cfg.settings.left.at(label));
    {
        std::ostringstream probs;
        for (std::size_t i = 0; i < cfg.protocol.pair_probabilities.size(); ++i)
            probs << (i ? "," : "") << detail::format_double(cfg.protocol.pair_probabilities[i]);
        resolved["pair_probabilities"] = probs.str();
    }
    return out;
}

inline ResolvedRun parse_run_config(const std::string& text) {
    return resolve_run_config(parse_key_values(text));
}

// Reproducibility record for one run: digest of the resolved config, tool
// version, seed and output paths, plus the resolved config itself.
struct RunManifest {
    std::string config_digest;
    std::string tool_version{kToolVersion};
    std::uint64_t seed{0};
    std::map<std::string, std::string> outputs;  // role -> path
    std::map<std::string, std::string> resolved_config;
};

inline RunManifest make_manifest(const ResolvedRun& resolved,
                                 std::map<std::string, std::string> outputs) {
    RunManifest manifest;
    manifest.config_digest = digest_hex(fnv1a64(resolved.canonical_text()));
    manifest.seed = resolved.run.seed;
    manifest.outputs = std::move(outputs);
    manifest.resolved_config = resolved.resolved;
    return manifest;
}

inline nlohmann::json manifest_json(const RunManifest& manifest) {
    return nlohmann::json{{"config_digest", manifest.config_digest},
                          {"tool_version", manifest.tool_version},
                          {"seed", manifest.seed},
                          {"outputs", manifest.outputs},
                          {"resolved_config", manifest.resolved_config}};
}

// Recomputes the digest from the manifest's stored resolved config.
inline std::string recompute_manifest_digest(const RunManifest& manifest) {
    std::ostringstream out;
    for (const auto& [key, value] : manifest.resolved_config) out << key << " = " << value << '\n';
    return digest_hex(fnv1a64(out.str()));
}

}  // namespace eprb
