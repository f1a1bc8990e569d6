#pragma once

// Model document:
// {
//   "basis": {"kind": "polynomial", "degree": 1},
//   "terms": [[], [{"variable": "y", "lag": 1, "transform": "identity"}], ...],
//   "coefficients": [...], "err": [...],
//   "scaling": null | {"output": {"min": .., "max": ..}, "input": {...}},
//   "max_lags": {"output": 27, "input": 0, "input_delay": 1},
//   "uncertainty": [...]            (optional)
// }
// Fourier factors carry "transform": "cos" | "sin" and "harmonic": j.

#include <istream>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "mycosys/error.hpp"
#include "mycosys/narx/model.hpp"

namespace mycosys::narx {

namespace detail {

inline const char* variable_name(Variable v) {
    switch (v) {
        case Variable::Output:
            return "y";
        case Variable::Input:
            return "x";
        case Variable::Noise:
            return "e";
    }
    return "y";
}

inline Variable parse_variable(const std::string& s) {
    if (s == "y") {
        return Variable::Output;
    }
    if (s == "x") {
        return Variable::Input;
    }
    if (s == "e") {
        return Variable::Noise;
    }
    throw Error(Errc::parse_error, "unknown regressor variable '" + s + "'");
}

}  // namespace detail

[[nodiscard]] inline nlohmann::json to_json(const NarxModel& model) {
    using nlohmann::json;
    json j;
    j["basis"] = {{"kind", model.basis.kind == BasisKind::Polynomial ? "polynomial" : "fourier"},
                  {"degree", model.basis.degree}};
    json terms = json::array();
    for (const auto& t : model.terms) {
        json factors = json::array();
        for (const auto& f : t.factors) {
            json fj = {{"variable", detail::variable_name(f.variable)}, {"lag", f.lag}};
            switch (f.transform.kind) {
                case TransformKind::Identity:
                    fj["transform"] = "identity";
                    break;
                case TransformKind::Cos:
                    fj["transform"] = "cos";
                    fj["harmonic"] = f.transform.harmonic;
                    break;
                case TransformKind::Sin:
                    fj["transform"] = "sin";
                    fj["harmonic"] = f.transform.harmonic;
                    break;
            }
            factors.push_back(fj);
        }
        terms.push_back(factors);
    }
    j["terms"] = terms;
    j["coefficients"] = model.coefficients;
    j["err"] = model.err_values;
    if (model.scaling) {
        j["scaling"] = {{"output", {{"min", model.scaling->output.min}, {"max", model.scaling->output.max}}},
                        {"input", {{"min", model.scaling->input.min}, {"max", model.scaling->input.max}}}};
    } else {
        j["scaling"] = nullptr;
    }
    j["max_lags"] = {
        {"output", model.max_output_lag}, {"input", model.max_input_lag}, {"input_delay", model.input_delay}};
    if (!model.coefficient_uncertainty.empty()) {
        j["uncertainty"] = model.coefficient_uncertainty;
    }
    if (model.early_stopped) {
        j["early_stopped"] = true;
    }
    return j;
}

[[nodiscard]] inline NarxModel model_from_json(const nlohmann::json& j) {
    try {
        NarxModel m;
        const auto& basis = j.at("basis");
        const auto kind = basis.at("kind").get<std::string>();
        if (kind == "polynomial") {
            m.basis.kind = BasisKind::Polynomial;
        } else if (kind == "fourier") {
            m.basis.kind = BasisKind::Fourier;
        } else {
            throw Error(Errc::parse_error, "unknown basis kind '" + kind + "'");
        }
        m.basis.degree = basis.at("degree").get<int>();
        for (const auto& tj : j.at("terms")) {
            RegressorTerm t;
            for (const auto& fj : tj) {
                Factor f;
                f.variable = detail::parse_variable(fj.at("variable").get<std::string>());
                f.lag = fj.at("lag").get<std::size_t>();
                const auto tr = fj.value("transform", std::string("identity"));
                if (tr == "cos" || tr == "sin") {
                    f.transform = {tr == "cos" ? TransformKind::Cos : TransformKind::Sin, fj.at("harmonic").get<int>()};
                } else if (tr != "identity") {
                    throw Error(Errc::parse_error, "unknown transform '" + tr + "'");
                }
                if (f.lag == 0) {
                    throw Error(Errc::parse_error, "regressor lags must be >= 1");
                }
                t.factors.push_back(f);
            }
            m.terms.push_back(std::move(t));
        }
        m.coefficients = j.at("coefficients").get<std::vector<double>>();
        m.err_values = j.at("err").get<std::vector<double>>();
        if (j.contains("scaling") && !j["scaling"].is_null()) {
            const auto& s = j["scaling"];
            m.scaling = Scaling{{s.at("output").at("min").get<double>(), s.at("output").at("max").get<double>()},
                                {s.at("input").at("min").get<double>(), s.at("input").at("max").get<double>()}};
        }
        const auto& lags = j.at("max_lags");
        m.max_output_lag = lags.at("output").get<std::size_t>();
        m.max_input_lag = lags.at("input").get<std::size_t>();
        m.input_delay = lags.value("input_delay", std::size_t{1});
        if (j.contains("uncertainty")) {
            m.coefficient_uncertainty = j["uncertainty"].get<std::vector<double>>();
        }
        m.early_stopped = j.value("early_stopped", false);
        m.validate();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::parse_error, std::string("malformed model document: ") + e.what());
    }
}

inline void write_model(std::ostream& out, const NarxModel& model) { out << to_json(model).dump(2) << '\n'; }

[[nodiscard]] inline NarxModel read_model(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::parse_error, std::string("malformed model document: ") + e.what());
    }
    return model_from_json(j);
}

}  // namespace mycosys::narx
