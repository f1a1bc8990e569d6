#include <catch_amalgamated.hpp>

#include <set>
#include <sstream>

#include "mycosys/narx/grid_search.hpp"
#include "oracles.hpp"

using namespace mycosys;
using namespace mycosys::narx;
using Catch::Matchers::WithinAbs;

namespace {

/// y(k) = 0.6 y(k-1) + 0.5 x(k-2) + e on a white input.
RecordingPair arx_recording(std::size_t n, std::uint64_t seed, double sigma) {
    const auto x = oracle::white_noise(n, seed);
    const auto e = oracle::white_noise(n, seed + 1000, sigma);
    std::vector<double> y(n, 0.0);
    for (std::size_t k = 2; k < n; ++k) {
        y[k] = 0.6 * y[k - 1] + 0.5 * x[k - 2] + e[k];
    }
    return RecordingPair(TimeSeries(x, 1000.0), TimeSeries(y, 1000.0), 10.0, "r" + std::to_string(seed));
}

std::vector<RecordingPair> corpus(std::size_t count, std::uint64_t seed, double sigma) {
    std::vector<RecordingPair> out;
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(arx_recording(1500, seed + 17 * i, sigma));
    }
    return out;
}

GridSearchOptions fixed_lags(std::size_t ny, std::size_t nx) {
    GridSearchOptions opt;
    opt.lag_policy = LagPolicy::Fixed;
    opt.fixed_output_lag = ny;
    opt.fixed_input_lag = nx;
    return opt;
}

std::vector<GridCell> linear_cells(std::initializer_list<std::size_t> sizes) {
    std::vector<GridCell> g;
    for (auto s : sizes) {
        g.push_back({{BasisKind::Polynomial, 1}, s, false});
    }
    return g;
}

std::set<std::string> term_names(const NarxModel& m) {
    std::set<std::string> s;
    for (const auto& t : m.terms) {
        s.insert(t.to_string());
    }
    return s;
}

}  // namespace

TEST_CASE("default grid covers both bases, three degrees, five sizes and ELS on/off") {
    const auto g = default_grid();
    CHECK(g.size() == 60);
    std::set<std::string> unique;
    for (const auto& c : g) {
        unique.insert(to_string(c));
    }
    CHECK(unique.size() == 60);
    CHECK(to_string(g.front()) == "polynomial:1:3");
    CHECK(to_string(g.back()) == "fourier:3:21:els");
}

TEST_CASE("grid search picks the true structure on noisy ARX data") {
    const auto train = corpus(4, 11, 0.05);
    const auto val = corpus(2, 900, 0.05);
    const auto grid = linear_cells({1, 2, 3, 4});
    const auto res = grid_search(train, grid, val, fixed_lags(3, 3));

    REQUIRE(res.table.size() == grid.size());
    // one term cannot explain the data; the true pair must be in the winner
    CHECK(res.best.n_terms >= 2);
    const auto names = term_names(res.model);
    CHECK(names.count("y(k-1)") == 1);
    CHECK(names.count("x(k-2)") == 1);
    for (std::size_t i = 0; i < res.model.terms.size(); ++i) {
        const auto n = res.model.terms[i].to_string();
        if (n == "y(k-1)") {
            CHECK_THAT(res.model.coefficients[i], WithinAbs(0.6, 0.02));
        } else if (n == "x(k-2)") {
            CHECK_THAT(res.model.coefficients[i], WithinAbs(0.5, 0.02));
        }
    }
    CHECK(res.validation_rrse.size() == val.size());
    CHECK(res.table[0].mean_test_rrse > res.table[1].mean_test_rrse);
    for (const auto& s : res.table) {
        CHECK(s.viable);
        CHECK(s.output_lag == 3);
        CHECK(s.input_lag == 3);
        CHECK(s.mean_test_rrse >= 0.0);
    }
}

TEST_CASE("exact ties prefer fewer terms") {
    // noiseless: two and three terms both reproduce the test split to rounding error
    const auto train = corpus(2, 5, 0.0);
    const auto grid = linear_cells({3, 2});
    const auto res = grid_search(train, grid, {}, fixed_lags(2, 2));
    CHECK(res.best.n_terms == 2);
    CHECK(res.table[0].mean_test_rrse < 1e-9);
    CHECK(res.table[1].mean_test_rrse < 1e-9);
    CHECK(std::isnan(res.table[1].mean_validation_rrse));
}

TEST_CASE("ties on size prefer the lower degree") {
    const auto train = corpus(2, 5, 0.0);
    std::vector<GridCell> grid{{{BasisKind::Polynomial, 2}, 2, false}, {{BasisKind::Polynomial, 1}, 2, false}};
    const auto res = grid_search(train, grid, {}, fixed_lags(2, 2));
    CHECK(res.best.basis.degree == 1);
}

TEST_CASE("a single-cell grid returns that cell") {
    const auto train = corpus(2, 3, 0.1);
    const std::vector<GridCell> grid{{{BasisKind::Polynomial, 2}, 4, false}};
    const auto res = grid_search(train, grid, {}, fixed_lags(2, 2));
    CHECK(res.best == grid[0]);
    CHECK(res.model.terms.size() == 4);
    CHECK(res.table.size() == 1);
}

TEST_CASE("no viable configuration raises no_viable_model") {
    // constant output: every held-out RRSE is undefined
    std::vector<RecordingPair> train{RecordingPair(TimeSeries(oracle::white_noise(400, 1), 1000.0),
                                                   TimeSeries(std::vector<double>(400, 1.5), 1000.0), 10.0, "c")};
    const auto grid = linear_cells({1, 2});
    try {
        (void)grid_search(train, grid, {}, fixed_lags(2, 2));
        FAIL("expected no_viable_model");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::no_viable_model);
    }
    CHECK_THROWS_AS(grid_search(train, std::vector<GridCell>{}, {}, {}), Error);
}

TEST_CASE("grid search is independent of the worker count") {
    const auto train = corpus(3, 21, 0.2);
    const auto val = corpus(1, 77, 0.2);
    std::vector<GridCell> grid = linear_cells({2, 3, 5});
    grid.push_back({{BasisKind::Polynomial, 2}, 3, true});
    grid.push_back({{BasisKind::Fourier, 1}, 3, false});
    auto opt = fixed_lags(2, 2);
    opt.workers = 1;
    const auto a = grid_search(train, grid, val, opt);
    opt.workers = 4;
    const auto b = grid_search(train, grid, val, opt);

    std::ostringstream sa;
    std::ostringstream sb;
    write_score_table(sa, a.table);
    write_score_table(sb, b.table);
    CHECK(sa.str() == sb.str());
    CHECK(a.best == b.best);
    CHECK(a.model.coefficients == b.model.coefficients);
}

TEST_CASE("score table has one row per cell and a fixed header") {
    const auto train = corpus(2, 8, 0.1);
    const auto grid = linear_cells({2, 3});
    const auto res = grid_search(train, grid, {}, fixed_lags(2, 2));
    std::ostringstream out;
    write_score_table(out, res.table);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line ==
          "basis,degree,n_terms,els,output_lag,input_lag,mean_test_rrse,var_test_rrse,mean_val_rrse,var_val_rrse,"
          "input_terms,status");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        CHECK(line.rfind("polynomial,1,", 0) == 0);
        CHECK(line.ends_with(",ok"));
        CHECK(std::count(line.begin(), line.end(), ',') == 11);
    }
    CHECK(rows == 2);
}

TEST_CASE("lag policies") {
    const auto rec = arx_recording(3000, 4, 0.05);
    GridSearchOptions opt;
    opt.lag_policy = LagPolicy::CrossCorrelation;
    CHECK(select_lag(rec, opt) == 2);
    opt.lag_policy = LagPolicy::Fixed;
    opt.fixed_output_lag = 7;
    CHECK(select_lag(rec, opt) == 7);
    opt.lag_policy = LagPolicy::Autocorrelation;
    const auto l = select_lag(rec, opt);
    CHECK(l >= 1);
    CHECK(l <= opt.lag_cap);

    opt.include_input_lags = false;
    opt.lag_policy = LagPolicy::CrossCorrelation;
    const auto cfg = make_config({{BasisKind::Polynomial, 1}, 2, false}, 4, opt);
    CHECK(cfg.max_input_lag == 0);
    CHECK(cfg.max_output_lag == 4);
}
