#pragma once

// CSV recording format:
//   t,input_v,output_v
//   0,5,0.51
//   2e-05,5,0.53
// `t` in seconds, strictly increasing with a uniform step. Metadata lives in a JSON sidecar
// `<stem>.meta.json` holding `input_frequency_hz` and `replicate_id`.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mycosys/error.hpp"
#include "mycosys/timeseries.hpp"

namespace mycosys::io {

struct RecordingFormat {
    /// When set, the inferred rate must agree within `rate_tolerance` (relative).
    std::optional<double> rate_override;
    double rate_tolerance = 1e-3;
    /// Allowed relative deviation of any step from the median step.
    double step_tolerance = 1e-2;
};

struct RecordingMetadata {
    std::optional<double> input_frequency_hz;
    std::optional<std::string> replicate_id;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n')) {
        s.remove_suffix(1);
    }
    return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

inline double parse_number(std::string_view text, std::size_t row, const std::string& column) {
    if (!text.empty() && text.front() == '+') {
        text.remove_prefix(1);
    }
    double value = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (text.empty() || ec != std::errc{} || ptr != last) {
        throw ParseError(row, column, "cannot parse '" + std::string(text) + "' as a number");
    }
    if (!std::isfinite(value)) {
        throw ParseError(row, column, "non-finite value '" + std::string(text) + "'");
    }
    return value;
}

inline std::string format_number(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

inline double median_of(std::vector<double> v) {
    const auto mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        m = (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid))) / 2.0;
    }
    return m;
}

struct Table {
    std::vector<double> t;
    std::vector<std::vector<double>> columns;
};

inline Table read_table(std::istream& in, const std::vector<std::string>& expected_header) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(0, "", "missing header line");
    }
    std::string_view header = line;
    if (header.starts_with("\xEF\xBB\xBF")) {
        header.remove_prefix(3);
    }
    const auto fields = split(header);
    bool header_ok = fields.size() == expected_header.size();
    for (std::size_t i = 0; header_ok && i < fields.size(); ++i) {
        header_ok = fields[i] == expected_header[i];
    }
    if (!header_ok) {
        std::string want;
        for (const auto& h : expected_header) {
            want += (want.empty() ? "" : ",") + h;
        }
        throw ParseError(0, "", "malformed header '" + std::string(trim(header)) + "', expected '" + want + "'");
    }

    Table table;
    table.columns.resize(expected_header.size() - 1);
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) {
            continue;
        }
        ++row;
        const auto cells = split(line);
        if (cells.size() != expected_header.size()) {
            throw ParseError(row, "", "ragged row with " + std::to_string(cells.size()) + " fields, expected " +
                                          std::to_string(expected_header.size()));
        }
        table.t.push_back(parse_number(cells[0], row, expected_header[0]));
        for (std::size_t c = 1; c < cells.size(); ++c) {
            table.columns[c - 1].push_back(parse_number(cells[c], row, expected_header[c]));
        }
    }
    if (row == 0) {
        throw ParseError(0, "", "no data rows");
    }
    return table;
}

inline double infer_rate(const std::vector<double>& t, const RecordingFormat& format) {
    if (t.size() < 2) {
        if (format.rate_override) {
            return *format.rate_override;
        }
        throw ParseError(1, "t", "cannot infer a sample rate from a single row; supply a rate override");
    }
    std::vector<double> steps(t.size() - 1);
    for (std::size_t i = 1; i < t.size(); ++i) {
        steps[i - 1] = t[i] - t[i - 1];
        if (!(steps[i - 1] > 0.0)) {
            throw ParseError(i + 1, "t", "time column is not strictly increasing");
        }
    }
    const double step = median_of(steps);
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (std::abs(steps[i] - step) > format.step_tolerance * step) {
            throw ParseError(i + 2, "t", "non-uniform time step");
        }
    }
    const double rate = 1.0 / step;
    if (format.rate_override) {
        const double want = *format.rate_override;
        if (std::abs(rate - want) > format.rate_tolerance * want) {
            throw ParseError(0, "t", "inferred rate " + format_number(rate) + " Hz disagrees with override " +
                                         format_number(want) + " Hz");
        }
        return want;
    }
    return rate;
}

}  // namespace detail

/// Parse a two-channel recording. Metadata must be complete.
[[nodiscard]] inline RecordingPair load_recording(std::istream& in, const RecordingFormat& format,
                                                  const RecordingMetadata& meta, const std::string& label = {}) {
    auto table = detail::read_table(in, {"t", "input_v", "output_v"});
    const double rate = detail::infer_rate(table.t, format);
    if (!meta.input_frequency_hz) {
        throw Error(Errc::parse_error, "recording '" + label + "' has no input frequency metadata");
    }
    TimeSeries input(std::move(table.columns[0]), rate, label.empty() ? "input" : label + ":input");
    TimeSeries output(std::move(table.columns[1]), rate, label.empty() ? "output" : label + ":output");
    return RecordingPair(std::move(input), std::move(output), *meta.input_frequency_hz,
                         meta.replicate_id.value_or(label));
}

/// Stimulus-only CSV (`t,input_v`). A full recording file is also accepted; its input column is used.
[[nodiscard]] inline TimeSeries load_stimulus(std::istream& in, const RecordingFormat& format,
                                              const std::string& label = {}) {
    std::string first;
    const auto start = in.tellg();
    std::getline(in, first);
    in.clear();
    in.seekg(start);
    const bool full = detail::split(first).size() == 3;
    auto table = full ? detail::read_table(in, {"t", "input_v", "output_v"}) : detail::read_table(in, {"t", "input_v"});
    const double rate = detail::infer_rate(table.t, format);
    return TimeSeries(std::move(table.columns[0]), rate, label);
}

inline void write_recording(std::ostream& out, const RecordingPair& rec) {
    out << "t,input_v,output_v\n";
    const double rate = rec.sample_rate_hz();
    for (std::size_t k = 0; k < rec.size(); ++k) {
        out << detail::format_number(static_cast<double>(k) / rate) << ',' << detail::format_number(rec.input()[k])
            << ',' << detail::format_number(rec.output()[k]) << '\n';
    }
}

inline void write_stimulus(std::ostream& out, const TimeSeries& ts) {
    out << "t,input_v\n";
    for (std::size_t k = 0; k < ts.size(); ++k) {
        out << detail::format_number(static_cast<double>(k) / ts.sample_rate_hz()) << ','
            << detail::format_number(ts[k]) << '\n';
    }
}

[[nodiscard]] inline std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
    auto p = csv;
    p.replace_extension();
    p += ".meta.json";
    return p;
}

[[nodiscard]] inline RecordingMetadata parse_sidecar(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::parse_error, std::string("malformed metadata sidecar: ") + e.what());
    }
    RecordingMetadata meta;
    if (j.contains("input_frequency_hz")) {
        if (!j["input_frequency_hz"].is_number()) {
            throw Error(Errc::parse_error, "sidecar input_frequency_hz must be a number");
        }
        meta.input_frequency_hz = j["input_frequency_hz"].get<double>();
    }
    if (j.contains("replicate_id")) {
        meta.replicate_id = j["replicate_id"].is_string() ? j["replicate_id"].get<std::string>()
                                                           : j["replicate_id"].dump();
    }
    return meta;
}

inline void write_sidecar(std::ostream& out, const RecordingPair& rec) {
    nlohmann::json j;
    j["input_frequency_hz"] = rec.input_frequency_hz();
    j["replicate_id"] = rec.replicate_id();
    out << j.dump(2) << '\n';
}

/// Load `<path>` plus its sidecar when present. Fields set in `overrides` win over the sidecar.
[[nodiscard]] inline RecordingPair load_recording_file(const std::filesystem::path& path,
                                                       const RecordingFormat& format,
                                                       const RecordingMetadata& overrides = {}) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::parse_error, "cannot open " + path.string());
    }
    RecordingMetadata meta;
    if (const auto side = sidecar_path(path); std::filesystem::exists(side)) {
        std::ifstream sin(side);
        meta = parse_sidecar(sin);
    }
    if (overrides.input_frequency_hz) {
        meta.input_frequency_hz = overrides.input_frequency_hz;
    }
    if (overrides.replicate_id) {
        meta.replicate_id = overrides.replicate_id;
    }
    return load_recording(in, format, meta, path.stem().string());
}

inline void save_recording_file(const std::filesystem::path& path, const RecordingPair& rec) {
    std::ofstream out(path);
    if (!out) {
        throw Error(Errc::invalid_argument, "cannot write " + path.string());
    }
    write_recording(out, rec);
    std::ofstream side(sidecar_path(path));
    if (!side) {
        throw Error(Errc::invalid_argument, "cannot write " + sidecar_path(path).string());
    }
    write_sidecar(side, rec);
}

}  // namespace mycosys::io
