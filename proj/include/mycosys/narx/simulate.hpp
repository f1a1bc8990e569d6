#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "mycosys/error.hpp"
#include "mycosys/narx/model.hpp"
#include "mycosys/timeseries.hpp"

namespace mycosys::narx {

inline constexpr double free_run_divergence_limit = 1e9;

namespace detail {

inline void require_history(const NarxModel& model, std::size_t available, const char* what) {
    const std::size_t need = model.history();
    if (available <= need) {
        throw Error(Errc::insufficient_history, std::string(what) + " needs more than " + std::to_string(need) +
                                                    " samples of history (lag depth " + std::to_string(need) +
                                                    "), got " + std::to_string(available));
    }
}

}  // namespace detail

/// One-step-ahead prediction from measured past outputs and inputs. Samples before the model's
/// lag depth are copied from the measurement. Noise terms contribute nothing.
[[nodiscard]] inline std::vector<double> predict_one_step(const NarxModel& model, std::span<const double> x,
                                                          std::span<const double> y) {
    model.validate();
    if (x.size() != y.size()) {
        throw Error(Errc::invalid_argument, "input and output histories differ in length");
    }
    detail::require_history(model, y.size(), "one-step prediction");
    const std::size_t h = model.history();
    std::vector<double> out(y.begin(), y.end());
    const detail::SignalView view{y, x, {}};
    for (std::size_t k = h; k < y.size(); ++k) {
        double acc = 0.0;
        for (std::size_t t = 0; t < model.terms.size(); ++t) {
            if (!model.terms[t].involves(Variable::Noise)) {
                acc += model.coefficients[t] * detail::evaluate_term(model.terms[t], view, k, model.scaling);
            }
        }
        out[k] = acc;
    }
    return out;
}

[[nodiscard]] inline TimeSeries predict_one_step(const NarxModel& model, const TimeSeries& x, const TimeSeries& y) {
    return TimeSeries(predict_one_step(model, x.samples(), y.samples()), y.sample_rate_hz(), "one_step");
}

/// Recursive simulation: outputs past `y_init` are computed only from earlier predictions and
/// the input. Input samples before index 0 read as zero. Output length equals the input length.
[[nodiscard]] inline std::vector<double> free_run(const NarxModel& model, std::span<const double> x,
                                                  std::span<const double> y_init) {
    model.validate();
    const std::size_t m = y_init.size();
    if (m < model.output_history() || m == 0) {
        throw Error(Errc::insufficient_history, "free run needs at least " +
                                                    std::to_string(std::max<std::size_t>(1, model.output_history())) +
                                                    " initial outputs (output lag depth), got " + std::to_string(m));
    }
    if (x.size() < m) {
        throw Error(Errc::invalid_argument, "input shorter than the initial conditions");
    }
    std::vector<double> y(x.size(), 0.0);
    std::copy(y_init.begin(), y_init.end(), y.begin());

    // Pre-split terms: pure linear output/input lags take a fast path.
    struct Linear {
        Variable var;
        std::size_t lag;
        double coef;
    };
    std::vector<Linear> linear;
    std::vector<std::size_t> general;
    double constant = 0.0;
    for (std::size_t t = 0; t < model.terms.size(); ++t) {
        const auto& term = model.terms[t];
        if (term.involves(Variable::Noise)) {
            continue;
        }
        if (term.is_constant()) {
            constant += model.coefficients[t];
        } else if (term.factors.size() == 1 && term.factors[0].transform.kind == TransformKind::Identity &&
                   !model.scaling) {
            linear.push_back({term.factors[0].variable, term.factors[0].lag, model.coefficients[t]});
        } else {
            general.push_back(t);
        }
    }

    const detail::SignalView view{y, x, {}};
    for (std::size_t k = m; k < y.size(); ++k) {
        double acc = constant;
        for (const auto& l : linear) {
            if (l.lag <= k) {
                acc += l.coef * (l.var == Variable::Output ? y[k - l.lag] : x[k - l.lag]);
            }
        }
        for (auto t : general) {
            acc += model.coefficients[t] * detail::evaluate_term(model.terms[t], view, k, model.scaling);
        }
        if (!std::isfinite(acc) || std::abs(acc) > free_run_divergence_limit) {
            throw DivergenceError(Errc::divergence, k, "free-run simulation diverged (|y| > 1e9)");
        }
        y[k] = acc;
    }
    return y;
}

[[nodiscard]] inline TimeSeries free_run(const NarxModel& model, const TimeSeries& x, std::span<const double> y_init) {
    return TimeSeries(free_run(model, x.samples(), y_init), x.sample_rate_hz(), "free_run");
}

/// Root relative squared error: sqrt(sum (yhat - y)^2 / sum (y - mean y)^2).
[[nodiscard]] inline double rrse(std::span<const double> y_true, std::span<const double> y_pred) {
    if (y_true.size() != y_pred.size() || y_true.size() < 2) {
        throw Error(Errc::invalid_argument, "RRSE needs equal-length series of at least two samples");
    }
    const double mean = std::accumulate(y_true.begin(), y_true.end(), 0.0) / static_cast<double>(y_true.size());
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        num += (y_pred[i] - y_true[i]) * (y_pred[i] - y_true[i]);
        den += (y_true[i] - mean) * (y_true[i] - mean);
    }
    if (den == 0.0) {
        throw Error(Errc::undefined_denominator, "RRSE undefined for a constant reference series");
    }
    return std::sqrt(num / den);
}

/// Free-run the model over a recording, seeded with its first `history` measured outputs, and
/// score the samples after the seed.
[[nodiscard]] inline double free_run_rrse(const NarxModel& model, std::span<const double> x,
                                          std::span<const double> y) {
    const std::size_t seed = std::max<std::size_t>(1, model.history());
    if (y.size() < seed + 2) {
        throw Error(Errc::insufficient_history, "record too short to score beyond lag depth " + std::to_string(seed));
    }
    const auto sim = free_run(model, x, y.first(seed));
    return rrse(y.subspan(seed), std::span<const double>(sim).subspan(seed));
}

[[nodiscard]] inline double one_step_rrse(const NarxModel& model, std::span<const double> x,
                                          std::span<const double> y) {
    const std::size_t seed = std::max<std::size_t>(1, model.history());
    const auto pred = predict_one_step(model, x, y);
    return rrse(y.subspan(seed), std::span<const double>(pred).subspan(seed));
}

}  // namespace mycosys::narx
