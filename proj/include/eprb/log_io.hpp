#pragma once

// Event-log file formats.
//
// CSV, one row per trial, header required:
//   n,t_left,setting_left,outcome_left,delay_left,t_right,setting_right,outcome_right,delay_right
// Outcomes serialize as -1/+1, absent delays as an empty field. Run
// metadata lives in a JSON sidecar: model_id, seed, settings table
// (label -> angle in radians) and protocol. Pair counts are recomputed
// from the trials on parse.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "eprb/core.hpp"

namespace eprb {

// Data errors carry the 1-based CSV row (counting the header as row 1).
class LogFormatError : public std::runtime_error {
  public:
    LogFormatError(std::size_t row, const std::string& message)
        : std::runtime_error("row " + std::to_string(row) + ": " + message), row_(row) {}

    std::size_t row() const { return row_; }

  private:
    std::size_t row_;
};

inline constexpr const char* kCsvHeader =
    "n,t_left,setting_left,outcome_left,delay_left,"
    "t_right,setting_right,outcome_right,delay_right";

namespace detail {

// 17 significant digits; doubles round-trip bit-exactly.
inline std::string format_double(double value) {
    char buffer[32];
    const int written = std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return std::string(buffer, static_cast<std::size_t>(written));
}

inline std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(field);
            field.clear();
        } else if (ch != '\r') {
            field.push_back(ch);
        }
    }
    fields.push_back(field);
    return fields;
}

inline std::uint64_t parse_u64(const std::string& text, std::size_t row, const char* what) {
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw LogFormatError(row, std::string("invalid ") + what + " '" + text + "'");
    return value;
}

inline double parse_double(const std::string& text, std::size_t row, const char* what) {
    try {
        std::size_t consumed = 0;
        const double value = std::stod(text, &consumed);
        if (consumed != text.size()) throw std::invalid_argument(text);
        return value;
    } catch (const std::exception&) {
        throw LogFormatError(row, std::string("invalid ") + what + " '" + text + "'");
    }
}

inline int parse_outcome(const std::string& text, std::size_t row, const char* what) {
    if (text == "+1") return +1;
    if (text == "-1") return -1;
    throw LogFormatError(row, std::string("invalid ") + what + " '" + text +
                                  "' (expected -1 or +1)");
}

}  // namespace detail

inline std::string serialize_log_csv(const EventLog& log) {
    std::ostringstream out;
    out << kCsvHeader << '\n';
    for (const Trial& trial : log.trials) {
        out << trial.n << ',' << trial.left.time_tick << ',' << to_char(trial.left.setting_label)
            << ',' << (trial.left.outcome > 0 ? "+1" : "-1") << ',';
        if (trial.left.delay) out << detail::format_double(*trial.left.delay);
        out << ',' << trial.right.time_tick << ',' << to_char(trial.right.setting_label) << ','
            << (trial.right.outcome > 0 ? "+1" : "-1") << ',';
        if (trial.right.delay) out << detail::format_double(*trial.right.delay);
        out << '\n';
    }
    return out.str();
}

inline nlohmann::json sidecar_json(const EventLog& log) {
    nlohmann::json settings;
    for (Side side : {Side::left, Side::right}) {
        nlohmann::json table = nlohmann::json::object();
        for (const auto& [label, angle] : log.settings.side(side))
            table[to_string(label)] = angle;
        settings[to_string(side)] = table;
    }
    return nlohmann::json{{"model_id", log.model_id},
                          {"seed", log.seed},
                          {"protocol", to_string(log.protocol)},
                          {"settings", settings}};
}

inline std::string serialize_sidecar(const EventLog& log) { return sidecar_json(log).dump(2) + "\n"; }

// Parses CSV + sidecar back into an EventLog. Pair counts are retallied
// with every protocol pair present (zero counts included). Malformed rows
// raise LogFormatError naming the row.
inline EventLog parse_log(const std::string& csv_text, const std::string& sidecar_text) {
    EventLog log;

    nlohmann::json sidecar;
    try {
        sidecar = nlohmann::json::parse(sidecar_text);
        log.model_id = sidecar.at("model_id").get<std::string>();
        log.seed = sidecar.at("seed").get<std::uint64_t>();
        log.protocol = parse_protocol_mode(sidecar.at("protocol").get<std::string>());
        for (Side side : {Side::left, Side::right}) {
            for (const auto& [key, value] : sidecar.at("settings").at(to_string(side)).items()) {
                auto& table = side == Side::left ? log.settings.left : log.settings.right;
                table[parse_setting_label(key)] = value.get<double>();
            }
        }
    } catch (const nlohmann::json::exception& err) {
        throw std::runtime_error(std::string("invalid sidecar: ") + err.what());
    }

    std::istringstream in(csv_text);
    std::string line;
    std::size_t row = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++row;
        if (!saw_header) {
            std::string normalized = line;
            if (!normalized.empty() && normalized.back() == '\r') normalized.pop_back();
            if (normalized != kCsvHeader)
                throw LogFormatError(row, "missing or malformed header");
            saw_header = true;
            continue;
        }
        if (line.empty() || line == "\r") continue;
        const auto fields = detail::split_csv_row(line);
        if (fields.size() != 9)
            throw LogFormatError(row, "expected 9 fields, found " +
                                          std::to_string(fields.size()));
        Trial trial;
        trial.n = detail::parse_u64(fields[0], row, "trial index");
        trial.left.time_tick = detail::parse_u64(fields[1], row, "left tick");
        try {
            trial.left.setting_label = parse_setting_label(fields[2]);
            trial.right.setting_label = parse_setting_label(fields[6]);
        } catch (const std::invalid_argument& err) {
            throw LogFormatError(row, err.what());
        }
        trial.left.outcome = detail::parse_outcome(fields[3], row, "left outcome");
        if (!fields[4].empty())
            trial.left.delay = detail::parse_double(fields[4], row, "left delay");
        trial.right.time_tick = detail::parse_u64(fields[5], row, "right tick");
        trial.right.outcome = detail::parse_outcome(fields[7], row, "right outcome");
        if (!fields[8].empty())
            trial.right.delay = detail::parse_double(fields[8], row, "right delay");
        log.trials.push_back(trial);
    }
    if (!saw_header) throw LogFormatError(1, "missing or malformed header");

    for (const auto& pair : protocol_pairs(log.protocol)) log.pair_counts[pair] = 0;
    for (const Trial& trial : log.trials)
        log.pair_counts[SettingPair{trial.left.setting_label, trial.right.setting_label}] += 1;
    return log;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// Sidecar path convention: log.csv -> log.meta.json.
inline std::string sidecar_path_for(const std::string& csv_path) {
    const std::string suffix = ".csv";
    if (csv_path.size() >= suffix.size() &&
        csv_path.compare(csv_path.size() - suffix.size(), suffix.size(), suffix) == 0)
        return csv_path.substr(0, csv_path.size() - suffix.size()) + ".meta.json";
    return csv_path + ".meta.json";
}

inline EventLog load_log(const std::string& csv_path, const std::string& sidecar_path) {
    return parse_log(read_text_file(csv_path), read_text_file(sidecar_path));
}

}  // namespace eprb
