#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mycosys/error.hpp"
#include "mycosys/narx/candidates.hpp"
#include "mycosys/narx/frols.hpp"
#include "mycosys/narx/simulate.hpp"
#include "mycosys/parallel.hpp"
#include "mycosys/timeseries.hpp"

namespace mycosys::narx {

struct GridCell {
    BasisSpec basis{};
    std::size_t n_terms = 5;
    bool use_els = false;

    friend bool operator==(const GridCell&, const GridCell&) = default;
};

[[nodiscard]] inline std::string to_string(const GridCell& c) {
    return std::string(c.basis.kind == BasisKind::Polynomial ? "polynomial" : "fourier") + ":" +
           std::to_string(c.basis.degree) + ":" + std::to_string(c.n_terms) + (c.use_els ? ":els" : "");
}

/// Default search space: {polynomial, fourier} x degree {1,2,3} x terms {3,5,8,13,21} x ELS {off, on}.
[[nodiscard]] inline std::vector<GridCell> default_grid() {
    std::vector<GridCell> grid;
    for (auto kind : {BasisKind::Polynomial, BasisKind::Fourier}) {
        for (int degree : {1, 2, 3}) {
            for (std::size_t terms : {3, 5, 8, 13, 21}) {
                for (bool els : {false, true}) {
                    grid.push_back({{kind, degree}, terms, els});
                }
            }
        }
    }
    return grid;
}

enum class LagPolicy { CrossCorrelation, Autocorrelation, Fixed };

struct GridSearchOptions {
    double train_fraction = 0.8;
    LagPolicy lag_policy = LagPolicy::CrossCorrelation;
    std::size_t lag_cap = 30;
    std::size_t fixed_output_lag = 2;
    std::size_t fixed_input_lag = 2;
    bool include_input_lags = true;
    std::size_t input_delay = 1;
    std::size_t els_iterations = 10;
    std::size_t workers = 1;
    /// Scores closer than this are tied; ties prefer fewer terms, then lower degree.
    double tie_tolerance = 1e-9;
};

struct GridScore {
    GridCell cell;
    bool viable = false;
    std::string failure;
    double mean_test_rrse = std::numeric_limits<double>::quiet_NaN();
    double var_test_rrse = std::numeric_limits<double>::quiet_NaN();
    double mean_validation_rrse = std::numeric_limits<double>::quiet_NaN();
    double var_validation_rrse = std::numeric_limits<double>::quiet_NaN();
    std::size_t output_lag = 0;
    std::size_t input_lag = 0;
    std::size_t selected_input_terms = 0;
};

struct GridSearchResult {
    GridCell best;
    NarxModel model;
    std::vector<GridScore> table;
    std::vector<double> validation_rrse;  ///< per validation recording, for the selected config
};

namespace detail {

struct MeanVar {
    double mean;
    double var;
};

inline MeanVar mean_var(std::span<const double> v) {
    if (v.empty()) {
        return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    }
    double mean = 0.0;
    for (double x : v) {
        mean += x;
    }
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) {
        ss += (x - mean) * (x - mean);
    }
    return {mean, v.size() > 1 ? ss / static_cast<double>(v.size() - 1) : 0.0};
}

}  // namespace detail

/// Lag depth for one recording under the chosen policy.
[[nodiscard]] inline std::size_t select_lag(const RecordingPair& rec, const GridSearchOptions& opt) {
    const std::size_t cap = std::min(opt.lag_cap, rec.size() / 4);
    switch (opt.lag_policy) {
        case LagPolicy::CrossCorrelation:
            return cross_correlation_best_lag(rec.input(), rec.output(), std::max<std::size_t>(1, cap));
        case LagPolicy::Autocorrelation:
            return autocorrelation_cutoff_lag(rec.output(), std::max<std::size_t>(1, cap));
        case LagPolicy::Fixed:
            return opt.fixed_output_lag;
    }
    return 1;
}

[[nodiscard]] inline FitConfig make_config(const GridCell& cell, std::size_t lag, const GridSearchOptions& opt) {
    FitConfig cfg;
    cfg.basis = cell.basis;
    cfg.n_terms = cell.n_terms;
    cfg.use_els = cell.use_els;
    cfg.els_iterations = opt.els_iterations;
    cfg.input_delay = opt.input_delay;
    if (opt.lag_policy == LagPolicy::Fixed) {
        cfg.max_output_lag = opt.fixed_output_lag;
        cfg.max_input_lag = opt.include_input_lags ? opt.fixed_input_lag : 0;
    } else {
        cfg.max_output_lag = lag;
        cfg.max_input_lag = opt.include_input_lags ? lag : 0;
    }
    return cfg;
}

/// For each grid cell: fit every training recording on its first `train_fraction`, free-run the
/// held-out suffix and average the RRSE. The cell with the lowest mean test RRSE wins. Every
/// viable cell is then refitted on the stacked training prefixes and free-run on each validation
/// recording.
[[nodiscard]] inline GridSearchResult grid_search(std::span<const RecordingPair> train, std::span<const GridCell> grid,
                                                  std::span<const RecordingPair> validation,
                                                  const GridSearchOptions& opt = {}) {
    if (grid.empty() || train.empty()) {
        throw Error(Errc::invalid_argument, "grid search needs a non-empty grid and training set");
    }
    std::vector<std::size_t> lags(train.size());
    std::vector<RecordingPair> train_part;
    std::vector<RecordingPair> test_part;
    for (std::size_t r = 0; r < train.size(); ++r) {
        lags[r] = select_lag(train[r], opt);
        auto [tr, te] = split_train_test(train[r], opt.train_fraction);
        train_part.push_back(std::move(tr));
        test_part.push_back(std::move(te));
    }

    // (cell x recording) fits
    const std::size_t n_rec = train.size();
    std::vector<double> test_scores(grid.size() * n_rec, std::numeric_limits<double>::quiet_NaN());
    std::vector<std::string> failures(grid.size() * n_rec);
    parallel_for(grid.size() * n_rec, opt.workers, [&](std::size_t task) {
        const std::size_t c = task / n_rec;
        const std::size_t r = task % n_rec;
        try {
            const auto cfg = make_config(grid[c], lags[r], opt);
            const auto model = fit(train_part[r].input(), train_part[r].output(), cfg);
            test_scores[task] =
                free_run_rrse(model, test_part[r].input().samples(), test_part[r].output().samples());
        } catch (const Error& e) {
            failures[task] = e.what();
        }
    });

    std::vector<GridScore> table(grid.size());
    const std::size_t stacked_lag = *std::max_element(lags.begin(), lags.end());
    std::vector<IoView> views;
    for (const auto& p : train_part) {
        views.push_back({p.input().samples(), p.output().samples()});
    }
    std::vector<NarxModel> refits(grid.size());
    std::vector<std::vector<double>> val_scores(grid.size());

    for (std::size_t c = 0; c < grid.size(); ++c) {
        auto& s = table[c];
        s.cell = grid[c];
        const auto cfg = make_config(grid[c], stacked_lag, opt);
        s.output_lag = cfg.max_output_lag;
        s.input_lag = cfg.max_input_lag;
        std::vector<double> scores;
        for (std::size_t r = 0; r < n_rec; ++r) {
            const auto i = c * n_rec + r;
            if (!failures[i].empty() && s.failure.empty()) {
                s.failure = failures[i];
            }
            scores.push_back(test_scores[i]);
        }
        s.viable = s.failure.empty();
        if (s.viable) {
            const auto mv = detail::mean_var(scores);
            s.mean_test_rrse = mv.mean;
            s.var_test_rrse = mv.var;
        }
    }

    parallel_for(grid.size(), opt.workers, [&](std::size_t c) {
        auto& s = table[c];
        if (!s.viable) {
            return;
        }
        try {
            refits[c] = fit(views, make_config(grid[c], stacked_lag, opt));
            for (const auto& v : validation) {
                val_scores[c].push_back(free_run_rrse(refits[c], v.input().samples(), v.output().samples()));
            }
            for (const auto& t : refits[c].terms) {
                s.selected_input_terms += t.involves(Variable::Input) ? 1 : 0;
            }
            const auto mv = detail::mean_var(val_scores[c]);
            s.mean_validation_rrse = mv.mean;
            s.var_validation_rrse = mv.var;
        } catch (const Error& e) {
            s.viable = false;
            s.failure = std::string("refit: ") + e.what();
        }
    });

    std::size_t best = grid.size();
    for (std::size_t c = 0; c < grid.size(); ++c) {
        if (!table[c].viable) {
            continue;
        }
        if (best == grid.size()) {
            best = c;
            continue;
        }
        const auto& a = table[c];
        const auto& b = table[best];
        const double diff = a.mean_test_rrse - b.mean_test_rrse;
        if (diff < -opt.tie_tolerance) {
            best = c;
        } else if (std::abs(diff) <= opt.tie_tolerance) {
            if (a.cell.n_terms < b.cell.n_terms ||
                (a.cell.n_terms == b.cell.n_terms && a.cell.basis.degree < b.cell.basis.degree)) {
                best = c;
            }
        }
    }
    if (best == grid.size()) {
        throw Error(Errc::no_viable_model, "no grid configuration produced a viable model" +
                                               (table.empty() ? std::string{} : ": " + table.front().failure));
    }
    return {grid[best], refits[best], table, val_scores[best]};
}

inline void write_score_table(std::ostream& out, std::span<const GridScore> table) {
    auto num = [](double v) {
        if (std::isnan(v)) {
            return std::string("nan");
        }
        char buf[64];
        const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, p);
    };
    out << "basis,degree,n_terms,els,output_lag,input_lag,mean_test_rrse,var_test_rrse,mean_val_rrse,var_val_rrse,"
           "input_terms,status\n";
    for (const auto& s : table) {
        std::string status = s.viable ? "ok" : s.failure;
        std::replace(status.begin(), status.end(), ',', ';');
        std::replace(status.begin(), status.end(), '\n', ' ');
        out << (s.cell.basis.kind == BasisKind::Polynomial ? "polynomial" : "fourier") << ',' << s.cell.basis.degree
            << ',' << s.cell.n_terms << ',' << (s.cell.use_els ? "true" : "false") << ',' << s.output_lag << ','
            << s.input_lag << ',' << num(s.mean_test_rrse) << ',' << num(s.var_test_rrse) << ','
            << num(s.mean_validation_rrse) << ',' << num(s.var_validation_rrse) << ',' << s.selected_input_terms
            << ',' << status << '\n';
    }
}

}  // namespace mycosys::narx
