#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "mycosys/error.hpp"
#include "mycosys/linalg.hpp"
#include "mycosys/narx/candidates.hpp"
#include "mycosys/narx/model.hpp"

namespace mycosys::narx {

struct FrolsResult {
    std::vector<std::size_t> selected;  ///< candidate columns in selection order
    std::vector<double> err;            ///< error reduction ratio of each selected column
    std::vector<double> coefficients;   ///< least-squares fit on the original selected columns
    bool early_stopped = false;
};

/// Squared norm, relative to the original column, below which an orthogonalised candidate is
/// treated as lying in the span of the selection.
inline constexpr double frols_span_tolerance = 1e-20;

/// Forward regression with orthogonal least squares. Each step orthogonalises the remaining
/// candidates against the last pick (modified Gram-Schmidt) and selects the candidate with the
/// largest error reduction ratio <w, y>^2 / (<w, w> <y, y>).
[[nodiscard]] inline FrolsResult frols(const linalg::Matrix& candidates, const linalg::Vector& target,
                                       std::size_t n_terms) {
    const auto m = static_cast<std::size_t>(candidates.cols());
    if (n_terms == 0 || n_terms > m) {
        throw Error(Errc::invalid_config, "n_terms " + std::to_string(n_terms) + " outside [1, " +
                                              std::to_string(m) + "] candidates");
    }
    if (candidates.rows() != target.size()) {
        throw Error(Errc::invalid_argument, "candidate rows and target length differ");
    }
    const double mean = target.mean();
    if ((target.array() - mean).square().sum() <= 0.0) {
        throw Error(Errc::degenerate_input, "FROLS target has zero variance");
    }
    const double yy = target.squaredNorm();

    linalg::Matrix w = candidates;
    std::vector<double> original(m);
    std::vector<bool> active(m, true);
    for (std::size_t i = 0; i < m; ++i) {
        original[i] = w.col(static_cast<Eigen::Index>(i)).squaredNorm();
        active[i] = original[i] > 0.0;
    }

    FrolsResult res;
    while (res.selected.size() < n_terms) {
        std::size_t best = m;
        double best_err = -1.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (!active[i]) {
                continue;
            }
            const auto col = w.col(static_cast<Eigen::Index>(i));
            const double ww = col.squaredNorm();
            if (ww <= frols_span_tolerance * original[i]) {
                active[i] = false;
                continue;
            }
            const double g = col.dot(target);
            const double err = g * g / (ww * yy);
            if (err > best_err) {
                best_err = err;
                best = i;
            }
        }
        if (best == m) {
            res.early_stopped = true;
            break;
        }
        active[best] = false;
        res.selected.push_back(best);
        res.err.push_back(std::min(1.0, best_err));

        const linalg::Vector pivot = w.col(static_cast<Eigen::Index>(best));
        const double pp = pivot.squaredNorm();
        for (std::size_t i = 0; i < m; ++i) {
            if (active[i]) {
                auto col = w.col(static_cast<Eigen::Index>(i));
                col -= (pivot.dot(col) / pp) * pivot;
            }
        }
    }

    linalg::Matrix chosen(candidates.rows(), static_cast<Eigen::Index>(res.selected.size()));
    for (std::size_t j = 0; j < res.selected.size(); ++j) {
        chosen.col(static_cast<Eigen::Index>(j)) = candidates.col(static_cast<Eigen::Index>(res.selected[j]));
    }
    const auto ls = linalg::least_squares(chosen, target);
    res.coefficients.assign(ls.coefficients.data(), ls.coefficients.data() + ls.coefficients.size());
    return res;
}

/// Structure selection on a candidate set; returns the fitted (OLS) model.
[[nodiscard]] inline NarxModel frols_select(const CandidateSet& set, std::size_t n_terms, const FitConfig& cfg) {
    const auto res = frols(set.matrix, set.target, n_terms);
    NarxModel model;
    model.basis = cfg.basis;
    model.max_output_lag = cfg.max_output_lag;
    model.max_input_lag = cfg.max_input_lag;
    model.input_delay = cfg.input_delay;
    model.scaling = set.scaling;
    model.early_stopped = res.early_stopped;
    for (std::size_t j = 0; j < res.selected.size(); ++j) {
        model.terms.push_back(set.terms[res.selected[j]]);
        model.coefficients.push_back(res.coefficients[j]);
        model.err_values.push_back(res.err[j]);
    }
    return model;
}

// ---------------------------------------------------------------------------------------------
// Extended least squares

inline constexpr double els_divergence_limit = 1e6;
inline constexpr double els_tolerance = 1e-8;

struct ElsTrace {
    std::vector<double> max_change;  ///< largest coefficient change per iteration
    std::size_t iterations = 0;
};

/// Refit a structure-selected model with lagged-residual regressors e(k-1..noise_lag), iterating
/// residual updates. Noise terms are appended to the model with zero ERR.
[[nodiscard]] inline NarxModel estimate_els(const NarxModel& model, std::span<const IoView> records,
                                            std::size_t iterations, std::size_t noise_lag = 0,
                                            ElsTrace* trace = nullptr) {
    if (iterations == 0 || model.terms.empty()) {
        return model;
    }
    if (model.noise_history() > 0) {
        throw Error(Errc::invalid_argument, "model already carries noise terms");
    }
    const std::size_t n_e = noise_lag == 0 ? std::max<std::size_t>(1, model.max_output_lag) : noise_lag;
    const std::size_t history = std::max(model.history(), std::max(model.max_output_lag, n_e));

    const auto process = design_matrix(records, model.terms, history, model.scaling);
    const auto target = stacked_target(records, history);
    Eigen::Map<const linalg::Vector> theta0(model.coefficients.data(),
                                            static_cast<Eigen::Index>(model.coefficients.size()));
    linalg::Vector residual = target - process * theta0;
    const double scale = std::max(1.0, target.cwiseAbs().maxCoeff());
    if (residual.cwiseAbs().maxCoeff() <= 1e-12 * scale) {
        return model;  // already exact; lagged residuals would be all zero
    }

    std::vector<RegressorTerm> noise_terms;
    for (std::size_t l = 1; l <= n_e; ++l) {
        noise_terms.push_back(lag_term(Variable::Noise, l));
    }

    const auto p = process.cols();
    linalg::Vector theta = linalg::Vector::Zero(p + static_cast<Eigen::Index>(n_e));
    theta.head(p) = theta0;
    linalg::Matrix full(process.rows(), theta.size());
    full.leftCols(p) = process;

    std::vector<std::vector<double>> noise(records.size());
    for (std::size_t it = 0; it < iterations; ++it) {
        // scatter residuals back onto each record's time axis
        Eigen::Index row = 0;
        for (std::size_t ri = 0; ri < records.size(); ++ri) {
            noise[ri].assign(records[ri].output.size(), 0.0);
            for (std::size_t k = history; k < records[ri].output.size(); ++k) {
                noise[ri][k] = residual(row++);
            }
        }
        full.rightCols(static_cast<Eigen::Index>(n_e)) =
            design_matrix(records, noise_terms, history, std::nullopt, noise);
        const auto ls = linalg::least_squares(full, target);
        const double change = (ls.coefficients - theta).cwiseAbs().maxCoeff();
        theta = ls.coefficients;
        if (theta.cwiseAbs().maxCoeff() > els_divergence_limit || !theta.allFinite()) {
            throw Error(Errc::els_divergence, "extended least squares diverged at iteration " + std::to_string(it + 1));
        }
        residual = ls.residuals;
        if (trace) {
            trace->max_change.push_back(change);
            trace->iterations = it + 1;
        }
        if (change < els_tolerance) {
            break;
        }
    }

    NarxModel out = model;
    for (Eigen::Index i = 0; i < p; ++i) {
        out.coefficients[static_cast<std::size_t>(i)] = theta(i);
    }
    for (std::size_t l = 0; l < n_e; ++l) {
        out.terms.push_back(noise_terms[l]);
        out.coefficients.push_back(theta(p + static_cast<Eigen::Index>(l)));
        out.err_values.push_back(0.0);
    }
    if (!out.coefficient_uncertainty.empty()) {
        out.coefficient_uncertainty.resize(out.terms.size(), 0.0);
    }
    return out;
}

[[nodiscard]] inline NarxModel estimate_els(const NarxModel& model, const TimeSeries& x, const TimeSeries& y,
                                            std::size_t iterations, std::size_t noise_lag = 0,
                                            ElsTrace* trace = nullptr) {
    const IoView view{x.samples(), y.samples()};
    return estimate_els(model, std::span<const IoView>(&view, 1), iterations, noise_lag, trace);
}

/// Candidate construction, FROLS and (optionally) ELS in one call.
[[nodiscard]] inline NarxModel fit(std::span<const IoView> records, const FitConfig& cfg) {
    const auto set = build_candidates(records, cfg);
    auto model = frols_select(set, cfg.n_terms, cfg);
    if (cfg.use_els) {
        model = estimate_els(model, records, cfg.els_iterations, cfg.noise_lag);
    }
    return model;
}

[[nodiscard]] inline NarxModel fit(const TimeSeries& x, const TimeSeries& y, const FitConfig& cfg) {
    const IoView view{x.samples(), y.samples()};
    return fit(std::span<const IoView>(&view, 1), cfg);
}

}  // namespace mycosys::narx
