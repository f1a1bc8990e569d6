#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mycosys/error.hpp"

namespace mycosys {

/// Uniformly sampled voltage signal. Immutable once constructed.
class TimeSeries {
public:
    TimeSeries(std::vector<double> samples, double sample_rate_hz, std::string label = {})
        : samples_(std::move(samples)), sample_rate_hz_(sample_rate_hz), label_(std::move(label)) {
        if (!(sample_rate_hz_ > 0.0) || !std::isfinite(sample_rate_hz_)) {
            throw Error(Errc::invalid_argument, "sample rate must be positive and finite");
        }
        if (samples_.empty()) {
            throw Error(Errc::degenerate_input, "time series must hold at least one sample");
        }
        for (std::size_t i = 0; i < samples_.size(); ++i) {
            if (!std::isfinite(samples_[i])) {
                throw Error(Errc::invalid_argument, "non-finite sample at index " + std::to_string(i));
            }
        }
    }

    [[nodiscard]] std::span<const double> samples() const noexcept { return samples_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return samples_; }
    [[nodiscard]] double sample_rate_hz() const noexcept { return sample_rate_hz_; }
    [[nodiscard]] const std::string& label() const noexcept { return label_; }
    [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const noexcept { return samples_[i]; }
    [[nodiscard]] double duration_s() const noexcept { return static_cast<double>(size()) / sample_rate_hz_; }

    /// Contiguous sub-range [begin, begin + count).
    [[nodiscard]] TimeSeries slice(std::size_t begin, std::size_t count) const {
        if (begin + count > samples_.size() || count == 0) {
            throw Error(Errc::invalid_argument, "slice out of range");
        }
        return TimeSeries(std::vector<double>(samples_.begin() + static_cast<std::ptrdiff_t>(begin),
                                              samples_.begin() + static_cast<std::ptrdiff_t>(begin + count)),
                          sample_rate_hz_, label_);
    }

    [[nodiscard]] TimeSeries with_label(std::string label) const {
        TimeSeries copy = *this;
        copy.label_ = std::move(label);
        return copy;
    }

private:
    std::vector<double> samples_;
    double sample_rate_hz_;
    std::string label_;
};

/// Synchronised input/output capture of one stimulation run.
class RecordingPair {
public:
    RecordingPair(TimeSeries input, TimeSeries output, double input_frequency_hz, std::string replicate_id)
        : input_(std::move(input)),
          output_(std::move(output)),
          input_frequency_hz_(input_frequency_hz),
          replicate_id_(std::move(replicate_id)) {
        if (input_.sample_rate_hz() != output_.sample_rate_hz()) {
            throw Error(Errc::invalid_argument, "input and output sample rates differ");
        }
        if (input_.size() != output_.size()) {
            throw Error(Errc::invalid_argument, "input and output lengths differ (" + std::to_string(input_.size()) +
                                                    " vs " + std::to_string(output_.size()) + ")");
        }
        if (!(input_frequency_hz_ > 0.0) || !std::isfinite(input_frequency_hz_)) {
            throw Error(Errc::invalid_argument, "input frequency must be positive");
        }
    }

    [[nodiscard]] const TimeSeries& input() const noexcept { return input_; }
    [[nodiscard]] const TimeSeries& output() const noexcept { return output_; }
    [[nodiscard]] double input_frequency_hz() const noexcept { return input_frequency_hz_; }
    [[nodiscard]] const std::string& replicate_id() const noexcept { return replicate_id_; }
    [[nodiscard]] double sample_rate_hz() const noexcept { return input_.sample_rate_hz(); }
    [[nodiscard]] std::size_t size() const noexcept { return input_.size(); }

private:
    TimeSeries input_;
    TimeSeries output_;
    double input_frequency_hz_;
    std::string replicate_id_;
};

struct StimulusSpec {
    double frequency_hz = 100.0;
    double amplitude_v = 5.0;
    double duration_s = 60.0;
    double sample_rate_hz = 50'000.0;

    [[nodiscard]] std::size_t sample_count() const {
        const double exact = duration_s * sample_rate_hz;
        const double nearest = std::round(exact);
        // absorb binary representation error of products like 0.3 * 10
        if (std::abs(exact - nearest) <= 1e-9 * std::max(1.0, exact)) {
            return static_cast<std::size_t>(nearest);
        }
        return static_cast<std::size_t>(std::floor(exact));
    }

    void validate() const {
        auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
        if (!positive(frequency_hz) || !positive(amplitude_v) || !positive(duration_s) || !positive(sample_rate_hz)) {
            throw Error(Errc::invalid_spec, "stimulus frequency, amplitude, duration and rate must be positive");
        }
        if (frequency_hz >= sample_rate_hz / 2.0) {
            throw Error(Errc::invalid_spec, "stimulus frequency " + std::to_string(frequency_hz) +
                                                " Hz violates Nyquist for rate " + std::to_string(sample_rate_hz));
        }
        if (sample_count() == 0) {
            throw Error(Errc::invalid_spec, "stimulus duration yields zero samples");
        }
    }
};

/// Bipolar square wave, positive on the first half period. The phase is accumulated per sample,
/// so frequencies with a fractional number of samples per half period are represented exactly
/// on average.
[[nodiscard]] inline TimeSeries make_square_wave(const StimulusSpec& spec) {
    spec.validate();
    const std::size_t n = spec.sample_count();
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double cycles = static_cast<double>(k) * spec.frequency_hz / spec.sample_rate_hz;
        const double phase = cycles - std::floor(cycles);
        out[k] = phase < 0.5 ? spec.amplitude_v : -spec.amplitude_v;
    }
    return TimeSeries(std::move(out), spec.sample_rate_hz, "square_" + std::to_string(spec.frequency_hz));
}

/// order-th difference; the result is shorter by `order` samples.
[[nodiscard]] inline TimeSeries difference(const TimeSeries& ts, std::size_t order = 1) {
    if (order == 0) {
        return ts;
    }
    if (order >= ts.size()) {
        throw Error(Errc::degenerate_input, "difference order " + std::to_string(order) +
                                                " leaves no samples from length " + std::to_string(ts.size()));
    }
    std::vector<double> v = ts.values();
    for (std::size_t pass = 0; pass < order; ++pass) {
        for (std::size_t i = 0; i + 1 < v.size(); ++i) {
            v[i] = v[i + 1] - v[i];
        }
        v.pop_back();
    }
    return TimeSeries(std::move(v), ts.sample_rate_hz(), ts.label());
}

namespace detail {

struct Moments {
    double mean;
    double stddev;  // population
};

inline Moments moments(std::span<const double> v) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) {
        ss += (x - mean) * (x - mean);
    }
    return {mean, std::sqrt(ss / n)};
}

}  // namespace detail

/// Normalised cross-correlation of x against y advanced by `lag`:
/// sum_k (x_k - mean x)(y_{k+lag} - mean y) / ((n - lag) sd_x sd_y).
[[nodiscard]] inline double cross_correlation_at(const TimeSeries& x, const TimeSeries& y, std::size_t lag) {
    const std::size_t n = std::min(x.size(), y.size());
    if (lag >= n) {
        throw Error(Errc::invalid_argument, "lag exceeds series length");
    }
    const auto mx = detail::moments(x.samples().first(n));
    const auto my = detail::moments(y.samples().first(n));
    if (mx.stddev == 0.0 || my.stddev == 0.0) {
        throw Error(Errc::undefined_correlation, "cross-correlation undefined for a zero-variance series");
    }
    const auto xs = x.samples();
    const auto ys = y.samples();
    double acc = 0.0;
    for (std::size_t k = 0; k + lag < n; ++k) {
        acc += (xs[k] - mx.mean) * (ys[k + lag] - my.mean);
    }
    return acc / (static_cast<double>(n - lag) * mx.stddev * my.stddev);
}

/// Lag in [1, max_search_lag] maximising |cross-correlation|; ties go to the smallest lag.
[[nodiscard]] inline std::size_t cross_correlation_best_lag(const TimeSeries& x, const TimeSeries& y,
                                                            std::size_t max_search_lag) {
    if (x.sample_rate_hz() != y.sample_rate_hz()) {
        throw Error(Errc::invalid_argument, "cross-correlation requires a shared sample rate");
    }
    const std::size_t n = std::min(x.size(), y.size());
    if (max_search_lag == 0 || max_search_lag >= n) {
        throw Error(Errc::invalid_argument, "max_search_lag must lie in [1, length)");
    }
    const auto mx = detail::moments(x.samples().first(n));
    const auto my = detail::moments(y.samples().first(n));
    if (mx.stddev == 0.0 || my.stddev == 0.0) {
        throw Error(Errc::undefined_correlation, "cross-correlation undefined for a zero-variance series");
    }
    std::vector<double> xc(n);
    std::vector<double> yc(n);
    for (std::size_t k = 0; k < n; ++k) {
        xc[k] = x[k] - mx.mean;
        yc[k] = y[k] - my.mean;
    }
    std::size_t best = 1;
    double best_abs = -1.0;
    for (std::size_t lag = 1; lag <= max_search_lag; ++lag) {
        double acc = 0.0;
        for (std::size_t k = 0; k + lag < n; ++k) {
            acc += xc[k] * yc[k + lag];
        }
        const double r = std::abs(acc / (static_cast<double>(n - lag) * mx.stddev * my.stddev));
        if (r > best_abs) {
            best_abs = r;
            best = lag;
        }
    }
    return best;
}

/// Autocorrelation at lags 0..max_lag (biased estimator, acf[0] == 1).
[[nodiscard]] inline std::vector<double> autocorrelation(const TimeSeries& ts, std::size_t max_lag) {
    const std::size_t n = ts.size();
    if (max_lag >= n) {
        throw Error(Errc::invalid_argument, "max_lag must be below the series length");
    }
    const auto m = detail::moments(ts.samples());
    if (m.stddev == 0.0) {
        throw Error(Errc::undefined_correlation, "autocorrelation undefined for a zero-variance series");
    }
    const double denom = m.stddev * m.stddev * static_cast<double>(n);
    std::vector<double> acf(max_lag + 1);
    for (std::size_t lag = 0; lag <= max_lag; ++lag) {
        double acc = 0.0;
        for (std::size_t k = 0; k + lag < n; ++k) {
            acc += (ts[k] - m.mean) * (ts[k + lag] - m.mean);
        }
        acf[lag] = acc / denom;
    }
    return acf;
}

/// First lag whose autocorrelation falls inside the +-1.96/sqrt(n) band, capped at max_lag.
[[nodiscard]] inline std::size_t autocorrelation_cutoff_lag(const TimeSeries& ts, std::size_t max_lag) {
    const auto acf = autocorrelation(ts, max_lag);
    const double band = 1.96 / std::sqrt(static_cast<double>(ts.size()));
    for (std::size_t lag = 1; lag <= max_lag; ++lag) {
        if (std::abs(acf[lag]) < band) {
            return lag;
        }
    }
    return max_lag;
}

/// Contiguous prefix/suffix split; train length = floor(fraction * N).
[[nodiscard]] inline std::pair<TimeSeries, TimeSeries> split_train_test(const TimeSeries& ts, double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw Error(Errc::invalid_argument, "train fraction must lie in (0, 1)");
    }
    const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(ts.size())));
    if (n_train == 0 || n_train >= ts.size()) {
        throw Error(Errc::invalid_argument, "train fraction " + std::to_string(train_fraction) + " on length " +
                                                std::to_string(ts.size()) + " leaves an empty partition");
    }
    return {ts.slice(0, n_train), ts.slice(n_train, ts.size() - n_train)};
}

[[nodiscard]] inline std::pair<RecordingPair, RecordingPair> split_train_test(const RecordingPair& rec,
                                                                              double train_fraction) {
    auto [xi, xo] = split_train_test(rec.input(), train_fraction);
    auto [yi, yo] = split_train_test(rec.output(), train_fraction);
    return {RecordingPair(std::move(xi), std::move(yi), rec.input_frequency_hz(), rec.replicate_id()),
            RecordingPair(std::move(xo), std::move(yo), rec.input_frequency_hz(), rec.replicate_id())};
}

}  // namespace mycosys
