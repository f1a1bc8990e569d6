#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "mycosys/error.hpp"
#include "mycosys/linalg.hpp"
#include "mycosys/narx/model.hpp"
#include "mycosys/timeseries.hpp"

namespace mycosys::narx {

struct FitConfig {
    std::size_t n_terms = 5;
    BasisSpec basis{};
    bool use_els = false;
    std::size_t els_iterations = 10;
    std::size_t max_output_lag = 1;
    /// Number of input lags: x(k-d) .. x(k-d-max_input_lag+1). Zero drops the input entirely.
    std::size_t max_input_lag = 1;
    std::size_t input_delay = 1;
    /// Lagged-residual depth for extended least squares; zero means max_output_lag.
    std::size_t noise_lag = 0;

    [[nodiscard]] std::size_t history() const noexcept {
        const std::size_t in = max_input_lag == 0 ? 0 : input_delay + max_input_lag - 1;
        return std::max(max_output_lag, in);
    }
};

inline constexpr std::size_t max_candidates = 1'000'000;
inline constexpr double max_design_cells = 1.5e8;

/// One input/output record contributing rows to a design matrix.
struct IoView {
    std::span<const double> input;
    std::span<const double> output;
};

struct CandidateSet {
    linalg::Matrix matrix;  ///< rows = stacked usable samples, cols = candidate terms
    linalg::Vector target;
    std::vector<RegressorTerm> terms;
    std::size_t history = 0;  ///< first usable row index within each record
    std::optional<Scaling> scaling;
};

namespace detail {

inline std::vector<Factor> lagged_variables(const FitConfig& cfg) {
    std::vector<Factor> vars;
    for (std::size_t l = 1; l <= cfg.max_output_lag; ++l) {
        vars.push_back({Variable::Output, l, {}});
    }
    for (std::size_t i = 0; i < cfg.max_input_lag; ++i) {
        vars.push_back({Variable::Input, cfg.input_delay + i, {}});
    }
    return vars;
}

inline double binomial(std::size_t n, std::size_t k) {
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i) {
        r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    }
    return r;
}

}  // namespace detail

/// Candidate regressor list, constant first. Polynomial degree l: every product of up to l lagged
/// variables (with repetition). Fourier degree J: cos/sin(2 pi j v) of each scaled lagged variable.
[[nodiscard]] inline std::vector<RegressorTerm> candidate_terms(const FitConfig& cfg) {
    if (cfg.basis.degree < 1) {
        throw Error(Errc::invalid_config, "basis degree must be >= 1");
    }
    if (cfg.max_input_lag > 0 && cfg.input_delay == 0) {
        throw Error(Errc::invalid_config, "input delay must be >= 1");
    }
    const auto vars = detail::lagged_variables(cfg);
    const auto degree = static_cast<std::size_t>(cfg.basis.degree);
    const double count = cfg.basis.kind == BasisKind::Polynomial
                             ? detail::binomial(vars.size() + degree, degree)
                             : 1.0 + 2.0 * static_cast<double>(vars.size() * degree);
    if (count > static_cast<double>(max_candidates)) {
        throw Error(Errc::config_too_large, "candidate count " + std::to_string(static_cast<long long>(count)) +
                                                " exceeds the limit of " + std::to_string(max_candidates));
    }

    std::vector<RegressorTerm> terms;
    terms.push_back(constant_term());
    if (cfg.basis.kind == BasisKind::Fourier) {
        for (const auto& v : vars) {
            for (int j = 1; j <= cfg.basis.degree; ++j) {
                terms.push_back({{Factor{v.variable, v.lag, {TransformKind::Cos, j}}}});
                terms.push_back({{Factor{v.variable, v.lag, {TransformKind::Sin, j}}}});
            }
        }
        return terms;
    }
    // combinations with repetition, grouped by degree
    std::vector<std::size_t> idx;
    std::function<void(std::size_t, std::size_t)> emit = [&](std::size_t start, std::size_t remaining) {
        if (remaining == 0) {
            RegressorTerm t;
            for (auto i : idx) {
                t.factors.push_back(vars[i]);
            }
            terms.push_back(std::move(t));
            return;
        }
        for (std::size_t i = start; i < vars.size(); ++i) {
            idx.push_back(i);
            emit(i, remaining - 1);
            idx.pop_back();
        }
    };
    for (std::size_t d = 1; d <= degree; ++d) {
        emit(0, d);
    }
    return terms;
}

[[nodiscard]] inline Scaling fit_scaling(std::span<const IoView> records) {
    Scaling s{{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()},
              {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()}};
    for (const auto& r : records) {
        for (double v : r.output) {
            s.output.min = std::min(s.output.min, v);
            s.output.max = std::max(s.output.max, v);
        }
        for (double v : r.input) {
            s.input.min = std::min(s.input.min, v);
            s.input.max = std::max(s.input.max, v);
        }
    }
    return s;
}

/// Evaluate `terms` at every usable row k >= history of each record, stacking records vertically.
[[nodiscard]] inline linalg::Matrix design_matrix(std::span<const IoView> records,
                                                  std::span<const RegressorTerm> terms, std::size_t history,
                                                  const std::optional<Scaling>& scaling,
                                                  std::span<const std::vector<double>> noise = {}) {
    std::size_t rows = 0;
    for (const auto& r : records) {
        if (r.output.size() <= history) {
            throw Error(Errc::insufficient_history, "record of length " + std::to_string(r.output.size()) +
                                                        " does not exceed lag depth " + std::to_string(history));
        }
        rows += r.output.size() - history;
    }
    if (static_cast<double>(rows) * static_cast<double>(terms.size()) > max_design_cells) {
        throw Error(Errc::config_too_large, "design matrix of " + std::to_string(rows) + " x " +
                                                std::to_string(terms.size()) + " exceeds the memory guard");
    }
    linalg::Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(terms.size()));
    Eigen::Index row = 0;
    for (std::size_t ri = 0; ri < records.size(); ++ri) {
        const auto& r = records[ri];
        const detail::SignalView view{r.output, r.input,
                                      ri < noise.size() ? std::span<const double>(noise[ri]) : std::span<const double>{}};
        for (std::size_t k = history; k < r.output.size(); ++k, ++row) {
            for (std::size_t c = 0; c < terms.size(); ++c) {
                m(row, static_cast<Eigen::Index>(c)) = detail::evaluate_term(terms[c], view, k, scaling);
            }
        }
    }
    return m;
}

[[nodiscard]] inline linalg::Vector stacked_target(std::span<const IoView> records, std::size_t history) {
    std::size_t rows = 0;
    for (const auto& r : records) {
        rows += r.output.size() - history;
    }
    linalg::Vector t(static_cast<Eigen::Index>(rows));
    Eigen::Index row = 0;
    for (const auto& r : records) {
        for (std::size_t k = history; k < r.output.size(); ++k) {
            t(row++) = r.output[k];
        }
    }
    return t;
}

[[nodiscard]] inline CandidateSet build_candidates(std::span<const IoView> records, const FitConfig& cfg,
                                                   std::optional<Scaling> scaling = {}) {
    for (const auto& r : records) {
        if (r.input.size() != r.output.size()) {
            throw Error(Errc::invalid_argument, "input and output must be aligned");
        }
    }
    CandidateSet set;
    set.terms = candidate_terms(cfg);
    set.history = cfg.history();
    if (cfg.basis.kind == BasisKind::Fourier) {
        set.scaling = scaling ? *scaling : fit_scaling(records);
    }
    set.matrix = design_matrix(records, set.terms, set.history, set.scaling);
    set.target = stacked_target(records, set.history);
    return set;
}

[[nodiscard]] inline CandidateSet build_candidates(const TimeSeries& x, const TimeSeries& y, const FitConfig& cfg) {
    const IoView view{x.samples(), y.samples()};
    return build_candidates(std::span<const IoView>(&view, 1), cfg);
}

}  // namespace mycosys::narx
