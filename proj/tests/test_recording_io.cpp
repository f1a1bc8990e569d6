#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mycosys/recording_io.hpp"
#include "oracles.hpp"

using namespace mycosys;

namespace {

io::RecordingMetadata meta(double f = 100.0) {
    io::RecordingMetadata m;
    m.input_frequency_hz = f;
    m.replicate_id = "r01";
    return m;
}

std::size_t parse_error_row(const std::string& text) {
    std::istringstream in(text);
    try {
        (void)io::load_recording(in, {}, meta());
    } catch (const ParseError& e) {
        return e.row();
    }
    FAIL("expected a ParseError");
    return 0;
}

}  // namespace

TEST_CASE("three-row recording") {
    std::istringstream in("t,input_v,output_v\n0,5,0.1\n0.5,-5,0.2\n1.0,5,0.3\n");
    const auto rec = io::load_recording(in, {}, meta());
    CHECK(rec.size() == 3);
    CHECK(rec.sample_rate_hz() == 2.0);
    CHECK(rec.output().values() == std::vector<double>{0.1, 0.2, 0.3});
    CHECK(rec.input_frequency_hz() == 100.0);
    CHECK(rec.replicate_id() == "r01");
}

TEST_CASE("parse errors name the data row") {
    std::string text = "t,input_v,output_v\n";
    for (int r = 1; r <= 10; ++r) {
        text += std::to_string((r - 1) * 0.001) + ",1," + (r == 7 ? "NaN" : "0.5") + "\n";
    }
    CHECK(parse_error_row(text) == 7);
    CHECK(parse_error_row("t,input_v,output_v\n0,1,2\n0.1,1\n") == 2);
    CHECK(parse_error_row("t,input_v,output_v\n0,1,2\n0.1,1,abc\n") == 2);
    CHECK(parse_error_row("t,input,output_v\n0,1,2\n") == 0);
    CHECK(parse_error_row("t,input_v,output_v\n0,1,2\n0.1,1,2\n0.1,1,2\n") == 3);
    CHECK(parse_error_row("t,input_v,output_v\n0,1,2\n0.1,1,2\n0.2,1,2\n0.5,1,2\n") == 4);
    CHECK(parse_error_row("") == 0);
    CHECK(parse_error_row("t,input_v,output_v\n") == 0);

    std::istringstream in("t,input_v,output_v\n0,1,inf\n0.1,1,2\n");
    try {
        (void)io::load_recording(in, {}, meta());
        FAIL("expected failure");
    } catch (const ParseError& e) {
        CHECK(e.row() == 1);
        CHECK(e.column() == "output_v");
    }
}

TEST_CASE("rate override is checked within 0.1%") {
    const std::string text = "t,input_v,output_v\n0,1,2\n0.001,1,2\n0.002,1,2\n";
    io::RecordingFormat f;
    f.rate_override = 1000.5;
    std::istringstream ok(text);
    CHECK(io::load_recording(ok, f, meta()).sample_rate_hz() == 1000.5);
    f.rate_override = 1010.0;
    std::istringstream bad(text);
    CHECK_THROWS_AS(io::load_recording(bad, f, meta()), ParseError);
}

TEST_CASE("missing metadata is an error") {
    std::istringstream in("t,input_v,output_v\n0,1,2\n0.1,1,2\n");
    CHECK_THROWS_AS(io::load_recording(in, {}, {}), Error);
}

TEST_CASE("write then load round-trips samples exactly") {
    const auto x = oracle::white_noise(2000, 1, 3.0);
    const auto y = oracle::white_noise(2000, 2, 1e-3);
    const RecordingPair rec(TimeSeries(x, 50'000.0), TimeSeries(y, 50'000.0), 900.0, "r07");
    std::stringstream buf;
    io::write_recording(buf, rec);
    const auto back = io::load_recording(buf, {}, meta(900.0));
    CHECK(back.input().values() == x);
    CHECK(back.output().values() == y);
    CHECK_THAT(back.sample_rate_hz(), Catch::Matchers::WithinRel(50'000.0, 1e-9));
}

TEST_CASE("stimulus files") {
    const auto sq = make_square_wave({900.0, 5.0, 0.01, 50'000.0});
    std::stringstream buf;
    io::write_stimulus(buf, sq);
    const auto back = io::load_stimulus(buf, {});
    CHECK(back.values() == sq.values());
    std::istringstream full("t,input_v,output_v\n0,1,9\n0.1,2,9\n");
    CHECK(io::load_stimulus(full, {}).values() == std::vector<double>{1, 2});
}

TEST_CASE("sidecar metadata and overrides") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "mycosys_io_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto path = dir / "f900_r03.csv";
    const RecordingPair rec(TimeSeries({1, 2, 3}, 10.0), TimeSeries({4, 5, 6}, 10.0), 900.0, "r03");
    io::save_recording_file(path, rec);
    CHECK(io::sidecar_path(path) == dir / "f900_r03.meta.json");

    const auto back = io::load_recording_file(path, {});
    CHECK(back.input_frequency_hz() == 900.0);
    CHECK(back.replicate_id() == "r03");

    io::RecordingMetadata over;
    over.input_frequency_hz = 100.0;
    CHECK(io::load_recording_file(path, {}, over).input_frequency_hz() == 100.0);

    fs::remove(io::sidecar_path(path));
    CHECK_THROWS_AS(io::load_recording_file(path, {}), Error);
    const auto fallback = io::load_recording_file(path, {}, over);
    CHECK(fallback.replicate_id() == "f900_r03");

    std::istringstream bad("{not json");
    CHECK_THROWS_AS(io::parse_sidecar(bad), Error);
    fs::remove_all(dir);
}
