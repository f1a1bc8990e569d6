#include <catch_amalgamated.hpp>

#include "mycosys/channel.hpp"
#include "mycosys/pipeline.hpp"
#include "oracles.hpp"

using namespace mycosys;
using Catch::Matchers::WithinAbs;

namespace {

RecordingPair channel_recording(double f, double sigma, std::uint64_t seed, double dur = 0.5) {
    channel::ChannelSpec spec;
    spec.noise_sigma_v = sigma;
    spec.seed = seed;
    return channel::simulate_channel(spec, make_square_wave({f, 5.0, dur, 50'000.0}), f, "r01");
}

}  // namespace

TEST_CASE("clean channel recording analyses without notes") {
    const auto rec = channel_recording(500.0, 0.01, 3);
    const auto a = pipeline::analyze_recording(rec, {}, "f500_r01");
    CHECK(a.name == "f500_r01");
    CHECK(a.replicate_id == "r01");
    CHECK(a.input_frequency_hz == 500.0);
    CHECK(a.notes.empty());
    REQUIRE(a.dominant_frequency_hz);
    CHECK_THAT(*a.dominant_frequency_hz, WithinAbs(500.0, 1e-9));
    CHECK(a.recoverable);
    CHECK(a.dominant_amplitude_v > 0.0);
    REQUIRE(a.adf);
    REQUIRE(a.adf->p_value);
    CHECK(a.adf->lag_order);
    REQUIRE(a.granger);
    CHECK(a.granger->lag_order);
    CHECK(a.anderson_darling);

    const auto r = a.record(0.05);
    CHECK(r.recoverable);
    CHECK(r.input_frequency_hz == 500.0);
    CHECK(r.adf_significant == (*a.adf->p_value < 0.05));
}

TEST_CASE("input-driven output is Granger-caused by the input") {
    const auto rec = channel_recording(200.0, 0.001, 8, 1.0);
    const auto a = pipeline::analyze_recording(rec, {});
    REQUIRE(a.granger);
    CHECK(a.granger->rejects(0.05));
}

TEST_CASE("Anderson-Darling can be switched off") {
    const auto rec = channel_recording(300.0, 0.01, 4);
    pipeline::AnalysisOptions opt;
    opt.run_anderson_darling = false;
    const auto a = pipeline::analyze_recording(rec, opt);
    CHECK_FALSE(a.anderson_darling);
}

TEST_CASE("Welch segment is clamped to short recordings") {
    spectral::WelchConfig cfg;
    CHECK(pipeline::effective_welch(cfg, 4000).segment_length == 4000);
    CHECK(pipeline::effective_welch(cfg, 50'000).segment_length == cfg.segment_length);
}

TEST_CASE("failures become notes, not exceptions") {
    // constant output: CSD has no dominant bin and ADF/Granger cannot run
    const auto x = make_square_wave({100.0, 5.0, 0.1, 50'000.0});
    const RecordingPair rec(x, TimeSeries(std::vector<double>(x.size(), 0.3), 50'000.0), 100.0, "flat");
    const auto a = pipeline::analyze_recording(rec, {}, "flat");
    CHECK_FALSE(a.recoverable);
    CHECK_FALSE(a.notes.empty());
    bool csd_note = false;
    for (const auto& n : a.notes) {
        csd_note = csd_note || n.rfind("csd: ", 0) == 0;
    }
    CHECK(csd_note);
}
