#pragma once

#include <algorithm>
#include <charconv>
#include <numbers>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "mycosys/error.hpp"
#include "mycosys/linalg.hpp"
#include "mycosys/timeseries.hpp"

namespace mycosys::stats {

inline constexpr double default_alpha = 0.05;

struct TestResult {
    double statistic = 0.0;
    std::optional<double> p_value;  ///< absent for tests that report only a critical value
    bool reject_at_05 = false;
    std::optional<std::size_t> lag_order;
    std::optional<double> degrees_of_freedom;

    /// Decision at an arbitrary level; tests without a p-value only know the 5% decision.
    [[nodiscard]] bool rejects(double alpha = default_alpha) const {
        return p_value ? *p_value < alpha : reject_at_05;
    }
};

namespace detail {

inline double chi2_sf(double x, double df) {
    if (std::isinf(x)) {
        return 0.0;
    }
    if (x <= 0.0) {
        return 1.0;
    }
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(df), x));
}

inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

/// log(Phi(x)) and log(1 - Phi(x)) without cancellation in the tails.
inline double log_normal_cdf(double x) {
    return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
}
inline double log_normal_sf(double x) {
    return std::log(0.5 * std::erfc(x / std::numbers::sqrt2));
}

inline double polyval(std::span<const double> c, double x) {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) {
        acc = acc * x + *it;
    }
    return acc;
}

}  // namespace detail

// --------------------------------------------------------------------------------------------
// Anderson-Darling

inline constexpr double anderson_darling_critical_05 = 0.752;

/// Normality test with estimated mean and variance. The statistic carries the
/// small-sample modification A^2 (1 + 4/n - 25/n^2).
[[nodiscard]] inline TestResult anderson_darling(std::span<const double> sample) {
    const std::size_t n = sample.size();
    if (n < 8) {
        throw Error(Errc::invalid_argument, "Anderson-Darling needs at least 8 observations");
    }
    std::vector<double> x(sample.begin(), sample.end());
    std::sort(x.begin(), x.end());
    const double nd = static_cast<double>(n);
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / nd;
    double ss = 0.0;
    for (double v : x) {
        ss += (v - mean) * (v - mean);
    }
    const double sd = std::sqrt(ss / (nd - 1.0));
    if (sd == 0.0 || x.front() == x.back()) {
        throw Error(Errc::degenerate_input, "Anderson-Darling undefined for a zero-variance sample");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double zi = (x[i] - mean) / sd;
        const double zj = (x[n - 1 - i] - mean) / sd;
        s += (2.0 * static_cast<double>(i) + 1.0) * (detail::log_normal_cdf(zi) + detail::log_normal_sf(zj));
    }
    const double a2 = -nd - s / nd;
    const double modified = std::max(0.0, a2 * (1.0 + 4.0 / nd - 25.0 / (nd * nd)));
    TestResult r;
    r.statistic = modified;
    r.reject_at_05 = modified > anderson_darling_critical_05;
    return r;
}

[[nodiscard]] inline TestResult anderson_darling(const TimeSeries& ts) {
    return anderson_darling(ts.samples());
}

// --------------------------------------------------------------------------------------------
// Augmented Dickey-Fuller (constant, no trend)

/// MacKinnon (1994) approximate asymptotic p-value for the constant-only ADF t-ratio.
[[nodiscard]] inline double mackinnon_pvalue_constant(double tau) {
    constexpr double tau_max = 2.74;
    constexpr double tau_min = -18.83;
    constexpr double tau_star = -1.61;
    static constexpr double small_p[] = {2.1659, 1.4412, 0.038269};
    static constexpr double large_p[] = {1.7339, 0.93202, -0.12745, -0.010368};
    if (std::isnan(tau)) {
        return 1.0;
    }
    if (tau > tau_max) {
        return 1.0;
    }
    if (tau < tau_min) {
        return 0.0;
    }
    const double z = tau <= tau_star ? detail::polyval(small_p, tau) : detail::polyval(large_p, tau);
    return detail::normal_cdf(z);
}

[[nodiscard]] inline std::size_t adf_default_max_lag(std::size_t n) {
    return static_cast<std::size_t>(std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
}

namespace detail {

/// Columns [1, y_{t-1}, dy_{t-1}, ..., dy_{t-p}] and target dy_t for rows t = first..n-1.
inline void adf_design(std::span<const double> y, std::size_t p, std::size_t first, linalg::Matrix& a,
                       linalg::Vector& b) {
    const std::size_t n = y.size();
    const auto rows = static_cast<Eigen::Index>(n - first);
    a.resize(rows, static_cast<Eigen::Index>(2 + p));
    b.resize(rows);
    for (std::size_t t = first; t < n; ++t) {
        const auto r = static_cast<Eigen::Index>(t - first);
        b(r) = y[t] - y[t - 1];
        a(r, 0) = 1.0;
        a(r, 1) = y[t - 1];
        for (std::size_t i = 1; i <= p; ++i) {
            a(r, static_cast<Eigen::Index>(1 + i)) = y[t - i] - y[t - i - 1];
        }
    }
}

}  // namespace detail

/// Unit-root test; rejecting means the series is stationary. The lag order is chosen by AIC over
/// 0..max_lag on a common sample, then the chosen regression is refitted on all usable rows.
[[nodiscard]] inline TestResult adf_test(std::span<const double> y, std::optional<std::size_t> max_lag = {}) {
    const std::size_t n = y.size();
    std::size_t maxlag = 0;
    if (max_lag) {
        maxlag = *max_lag;
        if (n <= 3 * (maxlag + 2)) {
            throw Error(Errc::invalid_argument, "ADF needs more than 3*(max_lag+2) observations");
        }
    } else {
        if (n < 10) {
            throw Error(Errc::degenerate_input, "ADF needs at least 10 observations");
        }
        const std::size_t cap = (n - 1) / 3 - 2;
        maxlag = std::min(adf_default_max_lag(n), cap);
    }

    linalg::Matrix a;
    linalg::Vector b;
    std::size_t best_lag = 0;
    if (maxlag > 0) {
        // Nested models share one QR: RSS of the first k columns is |b|^2 - sum_{i<k} (Q^T b)_i^2.
        detail::adf_design(y, maxlag, maxlag + 1, a, b);
        Eigen::HouseholderQR<linalg::Matrix> qr(a);
        const linalg::Vector qtb = qr.householderQ().adjoint() * b;
        const double nobs = static_cast<double>(a.rows());
        double remaining = b.squaredNorm();
        double best_aic = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < static_cast<std::size_t>(a.cols()); ++k) {
            remaining -= qtb(static_cast<Eigen::Index>(k)) * qtb(static_cast<Eigen::Index>(k));
            if (k < 1) {
                continue;  // models always hold the constant and y_{t-1}
            }
            const double rss = std::max(remaining, std::numeric_limits<double>::min());
            const double aic = nobs * std::log(rss / nobs) + 2.0 * static_cast<double>(k + 1);
            if (aic < best_aic) {
                best_aic = aic;
                best_lag = k - 1;
            }
        }
    }

    detail::adf_design(y, best_lag, best_lag + 1, a, b);
    // Frisch-Waugh: partial the other regressors out of y_{t-1} and dy_t.
    linalg::Matrix others(a.rows(), a.cols() - 1);
    others.col(0) = a.col(0);
    if (a.cols() > 2) {
        others.rightCols(a.cols() - 2) = a.rightCols(a.cols() - 2);
    }
    const auto fit_z = linalg::least_squares(others, a.col(1));
    const auto fit_b = linalg::least_squares(others, b);
    const double zz = fit_z.residuals.squaredNorm();
    if (zz <= linalg::rank_threshold * linalg::rank_threshold * std::max(1.0, a.col(1).squaredNorm())) {
        throw Error(Errc::singular_regression, "ADF: lagged level is collinear with the other regressors");
    }
    const double phi = fit_z.residuals.dot(fit_b.residuals) / zz;
    const double rss = (fit_b.residuals - phi * fit_z.residuals).squaredNorm();
    const double dof = static_cast<double>(a.rows()) - static_cast<double>(fit_b.rank + 1);
    if (dof <= 0.0) {
        throw Error(Errc::singular_regression, "ADF: no residual degrees of freedom");
    }
    const double se = std::sqrt(rss / dof / zz);
    double tau = 0.0;
    if (se > 0.0) {
        tau = phi / se;
    } else {
        tau = phi < 0.0 ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    }

    TestResult r;
    r.statistic = tau;
    r.p_value = mackinnon_pvalue_constant(tau);
    r.reject_at_05 = *r.p_value < 0.05;
    r.lag_order = best_lag;
    return r;
}

[[nodiscard]] inline TestResult adf_test(const TimeSeries& ts, std::optional<std::size_t> max_lag = {}) {
    return adf_test(ts.samples(), max_lag);
}

// --------------------------------------------------------------------------------------------
// Granger causality (chi-square form)

/// Does x help predict y beyond y's own lags 1..L? Statistic n (RSS_r - RSS_u) / RSS_u against
/// chi-square with as many degrees of freedom as the x-lag block adds to the design rank.
[[nodiscard]] inline TestResult granger_causality(std::span<const double> x, std::span<const double> y,
                                                  std::size_t max_lag) {
    if (x.size() != y.size()) {
        throw Error(Errc::invalid_argument, "Granger test needs equal-length series");
    }
    const std::size_t n = y.size();
    if (max_lag == 0 || n <= 4 * max_lag) {
        throw Error(Errc::invalid_argument, "Granger test needs 0 < L and length > 4L");
    }
    const auto [xmin, xmax] = std::minmax_element(x.begin(), x.end());
    if (*xmin == *xmax) {
        throw Error(Errc::degenerate_input, "Granger test undefined for a zero-variance cause series");
    }
    const std::size_t rows = n - max_lag;
    const auto r = static_cast<Eigen::Index>(rows);
    const auto lag = static_cast<Eigen::Index>(max_lag);
    linalg::Matrix unrestricted(r, 1 + 2 * lag);
    linalg::Vector target(r);
    for (std::size_t t = max_lag; t < n; ++t) {
        const auto i = static_cast<Eigen::Index>(t - max_lag);
        target(i) = y[t];
        unrestricted(i, 0) = 1.0;
        for (std::size_t l = 1; l <= max_lag; ++l) {
            unrestricted(i, static_cast<Eigen::Index>(l)) = y[t - l];
            unrestricted(i, static_cast<Eigen::Index>(max_lag + l)) = x[t - l];
        }
    }
    const auto fit_r = linalg::least_squares(unrestricted.leftCols(1 + lag), target);
    const auto fit_u = linalg::least_squares(unrestricted, target);
    const auto df = fit_u.rank - fit_r.rank;
    if (df <= 0) {
        throw Error(Errc::singular_regression, "Granger test: lagged cause adds no rank to the design");
    }
    const double tss = (target.array() - target.mean()).square().sum();
    const double tiny = 1e-24 * std::max(tss, std::numeric_limits<double>::min());
    double stat = 0.0;
    if (fit_u.rss <= tiny) {
        stat = fit_r.rss - fit_u.rss > tiny ? std::numeric_limits<double>::infinity() : 0.0;
    } else {
        stat = static_cast<double>(rows) * std::max(0.0, fit_r.rss - fit_u.rss) / fit_u.rss;
    }
    TestResult res;
    res.statistic = stat;
    res.p_value = detail::chi2_sf(stat, static_cast<double>(df));
    res.reject_at_05 = *res.p_value < 0.05;
    res.lag_order = max_lag;
    res.degrees_of_freedom = static_cast<double>(df);
    return res;
}

[[nodiscard]] inline TestResult granger_causality(const TimeSeries& x, const TimeSeries& y, std::size_t max_lag) {
    return granger_causality(x.samples(), y.samples(), max_lag);
}

// --------------------------------------------------------------------------------------------
// Kruskal-Wallis

[[nodiscard]] inline TestResult kruskal_wallis(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) {
        throw Error(Errc::invalid_argument, "Kruskal-Wallis needs at least two groups");
    }
    std::size_t total = 0;
    for (const auto& g : groups) {
        if (g.empty()) {
            throw Error(Errc::invalid_argument, "Kruskal-Wallis groups must be non-empty");
        }
        total += g.size();
    }
    if (total < 5) {
        throw Error(Errc::invalid_argument, "Kruskal-Wallis needs at least five observations");
    }
    struct Obs {
        double value;
        std::size_t group;
    };
    std::vector<Obs> all;
    all.reserve(total);
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        for (double v : groups[gi]) {
            all.push_back({v, gi});
        }
    }
    std::sort(all.begin(), all.end(), [](const Obs& a, const Obs& b) { return a.value < b.value; });
    std::vector<double> rank_sum(groups.size(), 0.0);
    double tie_term = 0.0;
    for (std::size_t i = 0; i < total;) {
        std::size_t j = i;
        while (j < total && all[j].value == all[i].value) {
            ++j;
        }
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        for (std::size_t k = i; k < j; ++k) {
            rank_sum[all[k].group] += avg_rank;
        }
        i = j;
    }
    const double nd = static_cast<double>(total);
    TestResult r;
    r.degrees_of_freedom = static_cast<double>(groups.size() - 1);
    const double correction = 1.0 - tie_term / (nd * nd * nd - nd);
    if (correction <= 0.0) {
        r.statistic = 0.0;  // every observation identical
        r.p_value = 1.0;
        return r;
    }
    double h = 0.0;
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        h += rank_sum[gi] * rank_sum[gi] / static_cast<double>(groups[gi].size());
    }
    h = (12.0 / (nd * (nd + 1.0)) * h - 3.0 * (nd + 1.0)) / correction;
    r.statistic = std::max(0.0, h);
    r.p_value = detail::chi2_sf(r.statistic, *r.degrees_of_freedom);
    r.reject_at_05 = *r.p_value < 0.05;
    return r;
}

// --------------------------------------------------------------------------------------------
// Descriptive statistics

/// Linear interpolation between order statistics at position p (n - 1).
[[nodiscard]] inline double quantile(std::span<const double> values, double p) {
    if (values.empty()) {
        throw Error(Errc::invalid_argument, "quantile of an empty sample");
    }
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const double h = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct MedianIqr {
    double median;
    double iqr;
};

[[nodiscard]] inline MedianIqr median_iqr(std::span<const double> values) {
    return {quantile(values, 0.5), quantile(values, 0.75) - quantile(values, 0.25)};
}

// --------------------------------------------------------------------------------------------
// Per-frequency report

/// Outcome of analysing one recording, reduced to what the report aggregates.
struct AnalysisRecord {
    double input_frequency_hz = 0.0;
    bool recoverable = false;
    double dominant_amplitude_v = 0.0;
    bool adf_significant = false;
    bool granger_rejects = false;
};

struct FrequencyGroupReport {
    double input_frequency_hz = 0.0;
    double pct_recoverable = 0.0;
    double median_amplitude_v = 0.0;
    double iqr_amplitude_v = 0.0;
    double pct_adf_significant = 0.0;
    double pct_granger = 0.0;
    std::size_t n = 0;
};

struct FrequencyReport {
    std::vector<FrequencyGroupReport> groups;
    MedianIqr pct_recoverable{};
    MedianIqr median_amplitude_v{};
    MedianIqr pct_adf_significant{};
    MedianIqr pct_granger{};
    std::size_t n_total = 0;
    std::vector<std::string> warnings;
};

/// Group records by input frequency (ascending). Frequencies listed in `expected` that have no
/// records are dropped with a warning.
[[nodiscard]] inline FrequencyReport build_report(std::span<const AnalysisRecord> records,
                                                  std::span<const double> expected = {}) {
    std::map<double, std::vector<const AnalysisRecord*>> by_freq;
    for (double f : expected) {
        by_freq[f];
    }
    for (const auto& r : records) {
        by_freq[r.input_frequency_hz].push_back(&r);
    }
    FrequencyReport rep;
    for (const auto& [freq, group] : by_freq) {
        if (group.empty()) {
            rep.warnings.push_back("no recordings for input frequency " + std::to_string(freq) + " Hz; row excluded");
            continue;
        }
        FrequencyGroupReport g;
        g.input_frequency_hz = freq;
        g.n = group.size();
        std::size_t rf = 0;
        std::size_t adf = 0;
        std::size_t gc = 0;
        std::vector<double> amps;
        amps.reserve(group.size());
        for (const auto* r : group) {
            rf += r->recoverable ? 1 : 0;
            adf += r->adf_significant ? 1 : 0;
            gc += r->granger_rejects ? 1 : 0;
            amps.push_back(r->dominant_amplitude_v);
        }
        const double n = static_cast<double>(g.n);
        g.pct_recoverable = static_cast<double>(rf) / n * 100.0;
        g.pct_adf_significant = static_cast<double>(adf) / n * 100.0;
        g.pct_granger = static_cast<double>(gc) / n * 100.0;
        const auto mi = median_iqr(amps);
        g.median_amplitude_v = mi.median;
        g.iqr_amplitude_v = mi.iqr;
        rep.n_total += g.n;
        rep.groups.push_back(g);
    }
    if (!rep.groups.empty()) {
        auto column = [&](auto member) {
            std::vector<double> v;
            for (const auto& g : rep.groups) {
                v.push_back(g.*member);
            }
            return median_iqr(v);
        };
        rep.pct_recoverable = column(&FrequencyGroupReport::pct_recoverable);
        rep.median_amplitude_v = column(&FrequencyGroupReport::median_amplitude_v);
        rep.pct_adf_significant = column(&FrequencyGroupReport::pct_adf_significant);
        rep.pct_granger = column(&FrequencyGroupReport::pct_granger);
    }
    return rep;
}

/// CSV with one row per input frequency and a final `summary` row of column medians.
inline void write_report_csv(std::ostream& out, const FrequencyReport& rep) {
    auto num = [](double v) {
        char buf[64];
        const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, p);
    };
    out << "input_hz,pct_rf,median_amp_v,iqr_amp_v,pct_adf,pct_gc,n\n";
    for (const auto& g : rep.groups) {
        out << num(g.input_frequency_hz) << ',' << num(g.pct_recoverable) << ',' << num(g.median_amplitude_v) << ','
            << num(g.iqr_amplitude_v) << ',' << num(g.pct_adf_significant) << ',' << num(g.pct_granger) << ','
            << g.n << '\n';
    }
    out << "summary," << num(rep.pct_recoverable.median) << ',' << num(rep.median_amplitude_v.median) << ','
        << num(rep.median_amplitude_v.iqr) << ',' << num(rep.pct_adf_significant.median) << ','
        << num(rep.pct_granger.median) << ',' << rep.n_total << '\n';
}

}  // namespace mycosys::stats
