#include <catch_amalgamated.hpp>

#include <sstream>

#include "mycosys/narx/serialize.hpp"
#include "mycosys/narx/simulate.hpp"
#include "oracles.hpp"

using namespace mycosys;
using namespace mycosys::narx;

namespace {

NarxModel round_trip(const NarxModel& m) {
    std::stringstream ss;
    write_model(ss, m);
    return read_model(ss);
}

void require_same(const NarxModel& a, const NarxModel& b) {
    CHECK(a.basis == b.basis);
    CHECK(a.terms == b.terms);
    CHECK(a.coefficients == b.coefficients);
    CHECK(a.err_values == b.err_values);
    CHECK(a.max_output_lag == b.max_output_lag);
    CHECK(a.max_input_lag == b.max_input_lag);
    CHECK(a.input_delay == b.input_delay);
    CHECK(a.scaling == b.scaling);
    CHECK(a.coefficient_uncertainty == b.coefficient_uncertainty);
    CHECK(a.early_stopped == b.early_stopped);
}

Error parse_error_of(const std::string& doc) {
    std::istringstream in(doc);
    try {
        (void)read_model(in);
    } catch (const Error& e) {
        return e;
    }
    FAIL("document was accepted: " << doc);
    return Error(Errc::invalid_argument, "unreachable");
}

}  // namespace

TEST_CASE("polynomial model round-trips bit-exactly") {
    NarxModel m;
    m.basis = {BasisKind::Polynomial, 2};
    m.terms = {constant_term(), lag_term(Variable::Output, 1),
               RegressorTerm{{Factor{Variable::Output, 1, {}}, Factor{Variable::Input, 3, {}}}}};
    m.coefficients = {0.1, 1.0 / 3.0, -2.718281828459045e-7};
    m.err_values = {0.5, 0.25, 1e-12};
    m.max_output_lag = 4;
    m.max_input_lag = 3;
    m.input_delay = 2;
    const auto r = round_trip(m);
    require_same(m, r);
    CHECK(r.terms[2].to_string() == "y(k-1)*x(k-3)");
}

TEST_CASE("Fourier model keeps transforms and scaling") {
    NarxModel m;
    m.basis = {BasisKind::Fourier, 3};
    m.terms = {RegressorTerm{{Factor{Variable::Output, 2, {TransformKind::Cos, 3}}}},
               RegressorTerm{{Factor{Variable::Input, 1, {TransformKind::Sin, 1}}}}};
    m.coefficients = {0.7, -0.2};
    m.err_values = {0.9, 0.05};
    m.scaling = Scaling{{-1.25, 4.5}, {0.0, 5.0}};
    m.max_output_lag = 2;
    m.max_input_lag = 1;
    const auto r = round_trip(m);
    require_same(m, r);

    // the reloaded model predicts identically
    const auto x = oracle::white_noise(200, 3);
    const auto y = oracle::white_noise(200, 4);
    CHECK(predict_one_step(m, x, y) == predict_one_step(r, x, y));
}

TEST_CASE("noise terms, uncertainty and early stop survive") {
    NarxModel m;
    m.terms = {lag_term(Variable::Output, 1), lag_term(Variable::Noise, 1)};
    m.coefficients = {0.8, -0.8};
    m.err_values = {0.6, 0.0};
    m.coefficient_uncertainty = {0.01, 0.02};
    m.early_stopped = true;
    m.max_output_lag = 1;
    m.max_input_lag = 0;
    const auto r = round_trip(m);
    require_same(m, r);
    CHECK(r.noise_history() == 1);
    const auto j = to_json(m);
    CHECK(j["terms"][1][0]["variable"] == "e");
}

TEST_CASE("malformed documents are parse errors") {
    CHECK(parse_error_of("{not json").code() == Errc::parse_error);
    CHECK(parse_error_of("{}").code() == Errc::parse_error);
    const std::string base = R"({"basis":{"kind":"polynomial","degree":1},"terms":[[{"variable":"y","lag":1}]],)"
                             R"("coefficients":[0.5],"err":[0.1],"scaling":null,"max_lags":{"output":1,"input":0}})";
    {
        std::istringstream in(base);
        const auto m = read_model(in);
        CHECK(m.terms.size() == 1);
        CHECK(m.input_delay == 1);
    }
    auto with = [&](const std::string& from, const std::string& to) {
        auto d = base;
        d.replace(d.find(from), from.size(), to);
        return d;
    };
    CHECK(parse_error_of(with("polynomial", "wavelet")).code() == Errc::parse_error);
    CHECK(parse_error_of(with("\"y\"", "\"z\"")).code() == Errc::parse_error);
    CHECK(parse_error_of(with("\"lag\":1", "\"lag\":0")).code() == Errc::parse_error);
    CHECK(parse_error_of(with("\"lag\":1", "\"lag\":1,\"transform\":\"tan\"")).code() == Errc::parse_error);
    CHECK(parse_error_of(with("[0.5]", "\"half\"")).code() == Errc::parse_error);
    // length mismatch is caught by model validation
    CHECK(parse_error_of(with("[0.5]", "[0.5,0.1]")).code() == Errc::invalid_argument);
}
