#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mycosys/error.hpp"
#include "mycosys/spectral.hpp"
#include "mycosys/stats.hpp"
#include "mycosys/timeseries.hpp"

namespace mycosys::pipeline {

struct AnalysisOptions {
    spectral::WelchConfig welch{};
    double alpha = stats::default_alpha;
    /// Upper bound on the Granger lag searched by cross-correlation.
    std::size_t granger_lag_cap = 30;
    std::size_t difference_order = 1;
    bool run_anderson_darling = true;
};

/// Everything computed for one recording.
struct RecordingAnalysis {
    std::string name;
    std::string replicate_id;
    double input_frequency_hz = 0.0;
    std::optional<double> dominant_frequency_hz;
    bool recoverable = false;
    double dominant_amplitude_v = 0.0;
    std::optional<stats::TestResult> adf;
    std::optional<stats::TestResult> granger;
    std::optional<stats::TestResult> anderson_darling;
    std::vector<std::string> notes;

    [[nodiscard]] stats::AnalysisRecord record(double alpha) const {
        return {input_frequency_hz, recoverable, dominant_amplitude_v, adf && adf->rejects(alpha),
                granger && granger->rejects(alpha)};
    }
};

/// Welch config clamped to the recording length.
[[nodiscard]] inline spectral::WelchConfig effective_welch(const spectral::WelchConfig& cfg, std::size_t n) {
    auto out = cfg;
    out.segment_length = std::min(cfg.segment_length, n);
    return out;
}

/// Recoverable frequency (Welch CSD of input vs output), dominant amplitude (DFT of output),
/// ADF stationarity of the output, and Granger causality input -> output on differenced series
/// with the lag picked by cross-correlation. Individual test failures are recorded as notes.
[[nodiscard]] inline RecordingAnalysis analyze_recording(const RecordingPair& rec, const AnalysisOptions& opt,
                                                         std::string name = {}) {
    RecordingAnalysis a;
    a.name = std::move(name);
    a.replicate_id = rec.replicate_id();
    a.input_frequency_hz = rec.input_frequency_hz();

    try {
        const auto csd = spectral::welch_csd(rec.input(), rec.output(), effective_welch(opt.welch, rec.size()));
        a.dominant_frequency_hz = spectral::dominant_frequency(csd, true);
        a.recoverable = spectral::recoverable_frequency(*a.dominant_frequency_hz, a.input_frequency_hz);
    } catch (const Error& e) {
        a.notes.push_back(std::string("csd: ") + e.what());
    }

    try {
        a.dominant_amplitude_v = spectral::dominant_amplitude(rec.output());
    } catch (const Error& e) {
        a.dominant_amplitude_v = 0.0;
        a.notes.push_back(std::string("amplitude: ") + e.what());
    }

    try {
        a.adf = stats::adf_test(rec.output());
    } catch (const Error& e) {
        a.notes.push_back(std::string("adf: ") + e.what());
    }

    try {
        const auto dx = difference(rec.input(), opt.difference_order);
        const auto dy = difference(rec.output(), opt.difference_order);
        const std::size_t cap = std::max<std::size_t>(1, std::min(opt.granger_lag_cap, (dx.size() - 1) / 4));
        const auto lag = cross_correlation_best_lag(dx, dy, cap);
        a.granger = stats::granger_causality(dx, dy, lag);
    } catch (const Error& e) {
        a.notes.push_back(std::string("granger: ") + e.what());
    }

    if (opt.run_anderson_darling) {
        try {
            a.anderson_darling = stats::anderson_darling(rec.output());
        } catch (const Error& e) {
            a.notes.push_back(std::string("anderson-darling: ") + e.what());
        }
    }
    return a;
}

}  // namespace mycosys::pipeline
