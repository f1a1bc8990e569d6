#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstddef>
#include <mutex>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <fftw3.h>

#include "mycosys/error.hpp"
#include "mycosys/timeseries.hpp"

namespace mycosys::spectral {

enum class SpectrumKind { AmplitudeSpectrum, CrossSpectralDensity };

[[nodiscard]] inline const char* to_string(SpectrumKind k) noexcept {
    return k == SpectrumKind::AmplitudeSpectrum ? "AmplitudeSpectrum" : "CSD";
}

struct SpectralEstimate {
    std::vector<double> frequencies_hz;
    std::vector<double> magnitudes;
    SpectrumKind kind = SpectrumKind::AmplitudeSpectrum;

    [[nodiscard]] std::size_t size() const noexcept { return magnitudes.size(); }
};

enum class Window { Hann, Rectangular };

struct WelchConfig {
    std::size_t segment_length = 10'000;
    double overlap_fraction = 0.5;
    Window window = Window::Hann;
    /// Subtract each segment's mean before windowing.
    bool detrend_constant = true;
};

namespace detail {

// FFTW's planner is not re-entrant; execution on an existing plan is.
inline std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace detail

/// Real-input forward FFT of a fixed length, returning bins 0..n/2.
class RealFft {
public:
    explicit RealFft(std::size_t n) : n_(n) {
        if (n == 0) {
            throw Error(Errc::invalid_argument, "FFT length must be positive");
        }
        in_ = fftw_alloc_real(n);
        out_ = fftw_alloc_complex(n / 2 + 1);
        std::lock_guard lock(detail::planner_mutex());
        plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
    }

    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    ~RealFft() {
        {
            std::lock_guard lock(detail::planner_mutex());
            fftw_destroy_plan(plan_);
        }
        fftw_free(in_);
        fftw_free(out_);
    }

    [[nodiscard]] std::size_t size() const noexcept { return n_; }

    /// Bins X_0..X_{n/2} of sum_k x_k exp(-2 pi i m k / n).
    std::span<const std::complex<double>> forward(std::span<const double> x) {
        if (x.size() != n_) {
            throw Error(Errc::invalid_argument, "FFT input length mismatch");
        }
        std::copy(x.begin(), x.end(), in_);
        fftw_execute(plan_);
        return {reinterpret_cast<const std::complex<double>*>(out_), n_ / 2 + 1};
    }

private:
    std::size_t n_;
    double* in_ = nullptr;
    fftw_complex* out_ = nullptr;
    fftw_plan plan_ = nullptr;
};

/// One-sided amplitude spectrum: |X_0|/N at DC, 2|X_m|/N inside, |X_{N/2}|/N at Nyquist (even N).
[[nodiscard]] inline SpectralEstimate dft_amplitude_spectrum(const TimeSeries& ts) {
    const std::size_t n = ts.size();
    if (n < 2) {
        throw Error(Errc::degenerate_input, "amplitude spectrum needs at least two samples");
    }
    RealFft fft(n);
    const auto bins = fft.forward(ts.samples());
    SpectralEstimate est;
    est.kind = SpectrumKind::AmplitudeSpectrum;
    est.frequencies_hz.resize(bins.size());
    est.magnitudes.resize(bins.size());
    const double nd = static_cast<double>(n);
    for (std::size_t m = 0; m < bins.size(); ++m) {
        const bool edge = m == 0 || (n % 2 == 0 && m == n / 2);
        est.frequencies_hz[m] = static_cast<double>(m) * ts.sample_rate_hz() / nd;
        est.magnitudes[m] = (edge ? 1.0 : 2.0) * std::abs(bins[m]) / nd;
    }
    return est;
}

[[nodiscard]] inline std::vector<double> make_window(Window w, std::size_t n) {
    std::vector<double> out(n, 1.0);
    if (w == Window::Hann) {
        // periodic form, as used for spectral estimation
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
        }
    }
    return out;
}

inline void validate(const WelchConfig& cfg, std::size_t series_length) {
    if (cfg.segment_length == 0) {
        throw Error(Errc::invalid_config, "Welch segment length must be positive");
    }
    if (!(cfg.overlap_fraction >= 0.0 && cfg.overlap_fraction < 1.0)) {
        throw Error(Errc::invalid_config, "Welch overlap fraction must lie in [0, 1)");
    }
    if (cfg.segment_length > series_length) {
        throw Error(Errc::invalid_config, "Welch segment length " + std::to_string(cfg.segment_length) +
                                              " exceeds series length " + std::to_string(series_length));
    }
}

/// Welch cross-spectral density |P_xy| (density scaling, one-sided).
[[nodiscard]] inline SpectralEstimate welch_csd(const TimeSeries& x, const TimeSeries& y, const WelchConfig& cfg) {
    if (x.size() != y.size() || x.sample_rate_hz() != y.sample_rate_hz()) {
        throw Error(Errc::invalid_argument, "CSD requires equal lengths and sample rates");
    }
    validate(cfg, x.size());
    const std::size_t seg = cfg.segment_length;
    const auto overlap = static_cast<std::size_t>(std::floor(cfg.overlap_fraction * static_cast<double>(seg)));
    const std::size_t step = seg - overlap;
    const std::size_t n_segments = (x.size() - seg) / step + 1;
    const auto window = make_window(cfg.window, seg);
    double window_power = 0.0;
    for (double w : window) {
        window_power += w * w;
    }
    const double fs = x.sample_rate_hz();
    const std::size_t n_bins = seg / 2 + 1;

    RealFft fft_x(seg);
    RealFft fft_y(seg);
    std::vector<std::complex<double>> acc(n_bins);
    std::vector<double> buf(seg);
    auto load = [&](std::span<const double> src) {
        double mean = 0.0;
        if (cfg.detrend_constant) {
            for (double v : src) {
                mean += v;
            }
            mean /= static_cast<double>(seg);
            // a flat segment must detrend to exact zeros, not rounding residue
            if (std::all_of(src.begin(), src.end(), [&](double v) { return v == src[0]; })) {
                mean = src[0];
            }
        }
        for (std::size_t i = 0; i < seg; ++i) {
            buf[i] = (src[i] - mean) * window[i];
        }
    };
    for (std::size_t s = 0; s < n_segments; ++s) {
        const std::size_t start = s * step;
        load(x.samples().subspan(start, seg));
        const auto bx = fft_x.forward(buf);
        load(y.samples().subspan(start, seg));
        const auto by = fft_y.forward(buf);
        for (std::size_t m = 0; m < n_bins; ++m) {
            acc[m] += std::conj(bx[m]) * by[m];
        }
    }

    SpectralEstimate est;
    est.kind = SpectrumKind::CrossSpectralDensity;
    est.frequencies_hz.resize(n_bins);
    est.magnitudes.resize(n_bins);
    const double scale = 1.0 / (fs * window_power * static_cast<double>(n_segments));
    for (std::size_t m = 0; m < n_bins; ++m) {
        const bool edge = m == 0 || (seg % 2 == 0 && m == seg / 2);
        est.frequencies_hz[m] = static_cast<double>(m) * fs / static_cast<double>(seg);
        est.magnitudes[m] = (edge ? 1.0 : 2.0) * std::abs(acc[m]) * scale;
    }
    return est;
}

[[nodiscard]] inline SpectralEstimate welch_psd(const TimeSeries& x, const WelchConfig& cfg) {
    return welch_csd(x, x, cfg);
}

/// Half-away-from-zero rounding to n significant figures.
[[nodiscard]] inline double round_sigfigs(double x, int n) {
    if (n < 1) {
        throw Error(Errc::invalid_argument, "significant figures must be >= 1");
    }
    if (x == 0.0 || !std::isfinite(x)) {
        return x;
    }
    const int exponent = static_cast<int>(std::floor(std::log10(std::abs(x))));
    const int shift = n - 1 - exponent;
    // Scale by an exact power of ten in whichever direction keeps the factor >= 1.
    if (shift >= 0) {
        const double f = std::pow(10.0, shift);
        return std::round(x * f) / f;
    }
    const double f = std::pow(10.0, -shift);
    return std::round(x / f) * f;
}

namespace detail {

inline std::size_t argmax_bin(const SpectralEstimate& est, bool exclude_dc) {
    if (est.magnitudes.empty()) {
        throw Error(Errc::no_dominant_frequency, "empty spectrum");
    }
    std::size_t best = est.magnitudes.size();
    double best_mag = 0.0;
    for (std::size_t m = 0; m < est.magnitudes.size(); ++m) {
        if (exclude_dc && est.frequencies_hz[m] == 0.0) {
            continue;
        }
        if (est.magnitudes[m] > best_mag) {  // strict: ties keep the lower frequency
            best_mag = est.magnitudes[m];
            best = m;
        }
    }
    if (best == est.magnitudes.size()) {
        throw Error(Errc::no_dominant_frequency, "spectrum has no non-zero bin");
    }
    return best;
}

}  // namespace detail

/// Frequency of the strongest bin, rounded to two significant figures.
[[nodiscard]] inline double dominant_frequency(const SpectralEstimate& est, bool exclude_dc = true) {
    return round_sigfigs(est.frequencies_hz[detail::argmax_bin(est, exclude_dc)], 2);
}

/// Largest non-DC amplitude of the one-sided DFT amplitude spectrum.
[[nodiscard]] inline double dominant_amplitude(const TimeSeries& ts) {
    const auto est = dft_amplitude_spectrum(ts);
    return est.magnitudes[detail::argmax_bin(est, true)];
}

inline constexpr int max_harmonic_order = 50;

/// True when the rounded dominant frequency is an integer harmonic (1..50) of the rounded input.
[[nodiscard]] inline bool recoverable_frequency(double dominant_hz, double input_hz) {
    if (!(dominant_hz > 0.0) || !(input_hz > 0.0)) {
        return false;
    }
    const double ratio = round_sigfigs(dominant_hz, 2) / round_sigfigs(input_hz, 2);
    const double order = std::round(ratio);
    if (order < 1.0 || order > max_harmonic_order) {
        return false;
    }
    return std::abs(ratio - order) <= 1e-9 * ratio;
}

inline void write_spectrum_csv(std::ostream& out, const SpectralEstimate& est) {
    out << "# kind=" << to_string(est.kind) << '\n' << "frequency_hz,magnitude\n";
    char buf[64];
    for (std::size_t m = 0; m < est.size(); ++m) {
        auto [p1, e1] = std::to_chars(buf, buf + sizeof(buf), est.frequencies_hz[m]);
        out.write(buf, p1 - buf);
        out << ',';
        auto [p2, e2] = std::to_chars(buf, buf + sizeof(buf), est.magnitudes[m]);
        out.write(buf, p2 - buf);
        out << '\n';
    }
}

}  // namespace mycosys::spectral
