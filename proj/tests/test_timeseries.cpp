#include <catch_amalgamated.hpp>

#include <numeric>
#include <set>

#include "mycosys/timeseries.hpp"
#include "oracles.hpp"

using namespace mycosys;
using Catch::Matchers::WithinAbs;

namespace {

template <class Fn>
Errc error_code_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return Errc::invalid_argument;
}

TimeSeries series(std::vector<double> v, double fs = 1000.0) { return TimeSeries(std::move(v), fs, "t"); }

}  // namespace

TEST_CASE("TimeSeries enforces its invariants") {
    CHECK(error_code_of([] { (void)series({1.0}, 0.0); }) == Errc::invalid_argument);
    CHECK(error_code_of([] { (void)series({}, 10.0); }) == Errc::degenerate_input);
    CHECK(error_code_of([] { (void)series({1.0, std::nan("")}, 10.0); }) == Errc::invalid_argument);
    CHECK(error_code_of([] { (void)series({1.0, INFINITY}, 10.0); }) == Errc::invalid_argument);
    const auto ts = series({1, 2, 3, 4}, 2.0);
    CHECK(ts.duration_s() == 2.0);
    CHECK(ts.slice(1, 2).values() == std::vector<double>{2, 3});
    CHECK_THROWS_AS(ts.slice(3, 2), Error);
}

TEST_CASE("RecordingPair requires shared rate and length") {
    CHECK_THROWS_AS(RecordingPair(series({1, 2}, 10), series({1, 2}, 20), 1.0, "r"), Error);
    CHECK_THROWS_AS(RecordingPair(series({1, 2}), series({1, 2, 3}), 1.0, "r"), Error);
    CHECK_THROWS_AS(RecordingPair(series({1, 2}), series({1, 2}), 0.0, "r"), Error);
    const RecordingPair p(series({1, 2}), series({3, 4}), 100.0, "r01");
    CHECK(p.size() == 2);
    CHECK(p.replicate_id() == "r01");
}

TEST_CASE("square wave at 100 Hz, 60 s, 50 kHz") {
    const auto ts = make_square_wave({100.0, 5.0, 60.0, 50'000.0});
    REQUIRE(ts.size() == 3'000'000);
    for (std::size_t k = 0; k < 250; ++k) {
        REQUIRE(ts[k] == 5.0);
        REQUIRE(ts[k + 250] == -5.0);
    }
    // whole-period structure across the series
    for (std::size_t k = 0; k < ts.size(); k += 4999) {
        REQUIRE(ts[k] == ((k % 500) < 250 ? 5.0 : -5.0));
    }
}

TEST_CASE("square wave at quarter rate repeats +1,+1,-1,-1") {
    const auto ts = make_square_wave({12'500.0, 1.0, 0.001, 50'000.0});
    REQUIRE(ts.size() == 50);
    const double pattern[] = {1, 1, -1, -1};
    for (std::size_t k = 0; k < ts.size(); ++k) {
        CHECK(ts[k] == pattern[k % 4]);
    }
}

TEST_CASE("square wave with fractional half period is balanced") {
    const StimulusSpec spec{900.0, 5.0, 2.0, 50'000.0};
    const auto ts = make_square_wave(spec);
    REQUIRE(ts.size() == 100'000);
    std::set<double> distinct(ts.values().begin(), ts.values().end());
    CHECK(distinct == std::set<double>{-5.0, 5.0});
    long double sum = 0.0L;
    for (double v : ts.values()) {
        sum += v;
    }
    const double mean = static_cast<double>(sum / ts.size());
    const double period_samples = spec.sample_rate_hz / spec.frequency_hz;
    CHECK(std::abs(mean) <= spec.amplitude_v * period_samples / static_cast<double>(ts.size()));
}

TEST_CASE("square wave sample count and Nyquist") {
    CHECK(StimulusSpec{10.0, 1.0, 0.3, 10.0}.sample_count() == 3);
    CHECK(StimulusSpec{10.0, 1.0, 0.00005, 50'000.0}.sample_count() == 2);
    CHECK(StimulusSpec{10.0, 1.0, 0.000059, 50'000.0}.sample_count() == 2);
    CHECK(error_code_of([] { (void)make_square_wave({25'000.0, 1.0, 1.0, 50'000.0}); }) == Errc::invalid_spec);
    CHECK(error_code_of([] { (void)make_square_wave({100.0, -1.0, 1.0, 50'000.0}); }) == Errc::invalid_spec);
    CHECK(error_code_of([] { (void)make_square_wave({100.0, 1.0, 1e-6, 50'000.0}); }) == Errc::invalid_spec);
}

TEST_CASE("difference") {
    CHECK(difference(series({1, 3, 6, 10})).values() == std::vector<double>{2, 3, 4});
    CHECK(difference(series({1, 3, 6, 10}), 2).values() == std::vector<double>{1, 1});
    const auto z = difference(series({4, 4, 4, 4}));
    CHECK(std::all_of(z.values().begin(), z.values().end(), [](double v) { return v == 0.0; }));
    CHECK(difference(series({1, 2}, 7.0)).sample_rate_hz() == 7.0);
    CHECK(error_code_of([] { (void)difference(series({1, 2}), 2); }) == Errc::degenerate_input);

    // difference of a cumulative sum gives back the increments after the first
    const auto inc = oracle::white_noise(200, 3);
    std::vector<double> cs(inc.size());
    std::partial_sum(inc.begin(), inc.end(), cs.begin());
    const auto d = difference(series(cs));
    for (std::size_t i = 0; i < d.size(); ++i) {
        REQUIRE_THAT(d[i], WithinAbs(inc[i + 1], 1e-12));
    }
}

TEST_CASE("cross-correlation lag of a pure delay") {
    const auto x = oracle::white_noise(2000, 11);
    for (std::size_t lag : {1u, 7u, 19u}) {
        std::vector<double> y(x.size(), 0.0);
        for (std::size_t k = lag; k < x.size(); ++k) {
            y[k] = x[k - lag];
        }
        CHECK(cross_correlation_best_lag(series(x), series(y), 30) == lag);
    }
}

TEST_CASE("cross-correlation lag of a noisy scaled delay matches an exhaustive scan") {
    const auto x = oracle::white_noise(5000, 21);
    const auto e = oracle::white_noise(5000, 22, 0.1);
    std::vector<double> y(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        y[k] = (k >= 12 ? 0.8 * x[k - 12] : 0.0) + e[k];
    }
    const auto xs = series(x);
    const auto ys = series(y);
    std::size_t best = 0;
    double best_r = -1.0;
    for (std::size_t l = 1; l <= 40; ++l) {
        const double r = std::abs(cross_correlation_at(xs, ys, l));
        if (r > best_r) {
            best_r = r;
            best = l;
        }
    }
    CHECK(best == 12);
    CHECK(cross_correlation_best_lag(xs, ys, 40) == 12);
}

TEST_CASE("cross-correlation bounds and errors") {
    const auto x = series(oracle::white_noise(500, 5));
    const auto lag = cross_correlation_best_lag(x, x, 25);
    CHECK(lag >= 1);
    CHECK(lag <= 25);
    CHECK(error_code_of([&] { (void)cross_correlation_best_lag(x, series(std::vector<double>(500, 1.0)), 5); }) ==
          Errc::undefined_correlation);
    CHECK(error_code_of([&] { (void)cross_correlation_best_lag(x, x, 0); }) == Errc::invalid_argument);
    CHECK(error_code_of([&] { (void)cross_correlation_best_lag(x, x, 500); }) == Errc::invalid_argument);
    CHECK(error_code_of([&] { (void)cross_correlation_best_lag(x, series(x.values(), 2.0), 5); }) ==
          Errc::invalid_argument);
}

TEST_CASE("autocorrelation") {
    const auto x = series(oracle::white_noise(4000, 8));
    const auto acf = autocorrelation(x, 5);
    CHECK_THAT(acf[0], WithinAbs(1.0, 1e-12));
    // AR(1) with coefficient 0.9: acf decays slowly, cutoff is late
    auto ar = oracle::white_noise(4000, 9);
    for (std::size_t k = 1; k < ar.size(); ++k) {
        ar[k] += 0.9 * ar[k - 1];
    }
    CHECK(autocorrelation_cutoff_lag(series(ar), 50) > 10);
    CHECK(autocorrelation_cutoff_lag(x, 50) <= 5);
}

TEST_CASE("split_train_test") {
    std::vector<double> v(100'000);
    std::iota(v.begin(), v.end(), 0.0);
    const auto [tr, te] = split_train_test(series(v), 0.8);
    CHECK(tr.size() == 80'000);
    CHECK(te.size() == 20'000);
    std::vector<double> joined = tr.values();
    joined.insert(joined.end(), te.values().begin(), te.values().end());
    CHECK(joined == v);

    const auto [a, b] = split_train_test(series({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}), 0.5);
    CHECK(a.size() == 5);
    CHECK(b.size() == 5);
    // floor(0.99 * 5) = 4 leaves one test sample
    const auto [c, d] = split_train_test(series({1, 2, 3, 4, 5}), 0.99);
    CHECK(c.size() == 4);
    CHECK(d.size() == 1);
    CHECK(error_code_of([] { (void)split_train_test(series({1, 2, 3, 4, 5}), 0.1); }) == Errc::invalid_argument);
    CHECK(error_code_of([] { (void)split_train_test(series({1, 2, 3, 4, 5}), 1.0); }) == Errc::invalid_argument);

    const RecordingPair p(series({1, 2, 3, 4}), series({5, 6, 7, 8}), 10.0, "r");
    const auto [ptr, pte] = split_train_test(p, 0.5);
    CHECK(ptr.output().values() == std::vector<double>{5, 6});
    CHECK(pte.input().values() == std::vector<double>{3, 4});
}
