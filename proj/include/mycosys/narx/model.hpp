#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mycosys/error.hpp"

namespace mycosys::narx {

enum class BasisKind { Polynomial, Fourier };

/// Polynomial: `degree` is the nonlinearity degree. Fourier: number of harmonics per lagged variable.
struct BasisSpec {
    BasisKind kind = BasisKind::Polynomial;
    int degree = 1;

    friend bool operator==(const BasisSpec&, const BasisSpec&) = default;
};

enum class Variable { Output, Input, Noise };

enum class TransformKind { Identity, Cos, Sin };

struct Transform {
    TransformKind kind = TransformKind::Identity;
    int harmonic = 0;

    friend auto operator<=>(const Transform&, const Transform&) = default;
};

struct Factor {
    Variable variable = Variable::Output;
    std::size_t lag = 1;
    Transform transform{};

    friend auto operator<=>(const Factor&, const Factor&) = default;
};

/// Product of lagged (optionally transformed) variables; no factors means the constant term.
struct RegressorTerm {
    std::vector<Factor> factors;

    [[nodiscard]] bool is_constant() const noexcept { return factors.empty(); }

    [[nodiscard]] bool involves(Variable v) const noexcept {
        return std::any_of(factors.begin(), factors.end(), [v](const Factor& f) { return f.variable == v; });
    }

    [[nodiscard]] std::size_t max_lag(Variable v) const noexcept {
        std::size_t m = 0;
        for (const auto& f : factors) {
            if (f.variable == v) {
                m = std::max(m, f.lag);
            }
        }
        return m;
    }

    friend bool operator==(const RegressorTerm&, const RegressorTerm&) = default;

    [[nodiscard]] std::string to_string() const {
        if (factors.empty()) {
            return "1";
        }
        std::string s;
        for (const auto& f : factors) {
            if (!s.empty()) {
                s += "*";
            }
            const char* name = f.variable == Variable::Output ? "y" : f.variable == Variable::Input ? "x" : "e";
            std::string base = std::string(name) + "(k-" + std::to_string(f.lag) + ")";
            switch (f.transform.kind) {
                case TransformKind::Identity:
                    s += base;
                    break;
                case TransformKind::Cos:
                    s += "cos(" + std::to_string(f.transform.harmonic) + "*" + base + ")";
                    break;
                case TransformKind::Sin:
                    s += "sin(" + std::to_string(f.transform.harmonic) + "*" + base + ")";
                    break;
            }
        }
        return s;
    }
};

[[nodiscard]] inline RegressorTerm constant_term() { return {}; }

[[nodiscard]] inline RegressorTerm lag_term(Variable v, std::size_t lag) { return {{Factor{v, lag, {}}}}; }

/// Min-max map of a variable onto [0, 1]; applied before Fourier transforms.
struct MinMax {
    double min = 0.0;
    double max = 1.0;

    [[nodiscard]] double apply(double v) const noexcept {
        const double span = max - min;
        return span > 0.0 ? (v - min) / span : 0.0;
    }

    friend bool operator==(const MinMax&, const MinMax&) = default;
};

struct Scaling {
    MinMax output;
    MinMax input;

    friend bool operator==(const Scaling&, const Scaling&) = default;
};

struct NarxModel {
    BasisSpec basis;
    std::vector<RegressorTerm> terms;
    std::vector<double> coefficients;
    std::vector<double> err_values;
    std::size_t max_output_lag = 0;
    std::size_t max_input_lag = 0;
    std::size_t input_delay = 1;
    std::optional<Scaling> scaling;
    /// Optional +- intervals per coefficient; metadata only.
    std::vector<double> coefficient_uncertainty;
    /// FROLS ran out of linearly independent candidates before reaching the requested size.
    bool early_stopped = false;

    void validate() const {
        if (terms.size() != coefficients.size() || terms.size() != err_values.size()) {
            throw Error(Errc::invalid_argument, "model terms, coefficients and ERR values differ in length");
        }
        if (!coefficient_uncertainty.empty() && coefficient_uncertainty.size() != terms.size()) {
            throw Error(Errc::invalid_argument, "coefficient uncertainty length mismatch");
        }
        if (basis.degree < 1) {
            throw Error(Errc::invalid_argument, "basis degree must be >= 1");
        }
        for (double e : err_values) {
            if (!(e >= 0.0 && e <= 1.0 + 1e-12)) {
                throw Error(Errc::invalid_argument, "ERR values must lie in [0, 1]");
            }
        }
    }

    /// Deepest output / input lag referenced by any term.
    [[nodiscard]] std::size_t output_history() const noexcept {
        std::size_t m = 0;
        for (const auto& t : terms) {
            m = std::max(m, t.max_lag(Variable::Output));
        }
        return m;
    }
    [[nodiscard]] std::size_t input_history() const noexcept {
        std::size_t m = 0;
        for (const auto& t : terms) {
            m = std::max(m, t.max_lag(Variable::Input));
        }
        return m;
    }
    [[nodiscard]] std::size_t noise_history() const noexcept {
        std::size_t m = 0;
        for (const auto& t : terms) {
            m = std::max(m, t.max_lag(Variable::Noise));
        }
        return m;
    }
    [[nodiscard]] std::size_t history() const noexcept { return std::max(output_history(), input_history()); }

    [[nodiscard]] bool has_input_terms() const noexcept {
        return std::any_of(terms.begin(), terms.end(), [](const auto& t) { return t.involves(Variable::Input); });
    }

    [[nodiscard]] std::string to_string() const {
        std::string s = "y(k) =";
        for (std::size_t i = 0; i < terms.size(); ++i) {
            s += (i == 0 ? " " : " + ") + std::to_string(coefficients[i]) + "*" + terms[i].to_string();
        }
        return s;
    }
};

namespace detail {

/// Read access to the lagged signals a term may reference. Indices below zero read as 0.
struct SignalView {
    std::span<const double> output;
    std::span<const double> input;
    std::span<const double> noise;

    [[nodiscard]] double at(Variable v, std::size_t k, std::size_t lag) const noexcept {
        if (lag > k) {
            return 0.0;
        }
        const std::size_t i = k - lag;
        switch (v) {
            case Variable::Output:
                return i < output.size() ? output[i] : 0.0;
            case Variable::Input:
                return i < input.size() ? input[i] : 0.0;
            case Variable::Noise:
                return i < noise.size() ? noise[i] : 0.0;
        }
        return 0.0;
    }
};

inline double apply_transform(const Transform& t, double v) {
    switch (t.kind) {
        case TransformKind::Identity:
            return v;
        case TransformKind::Cos:
            return std::cos(2.0 * std::numbers::pi * t.harmonic * v);
        case TransformKind::Sin:
            return std::sin(2.0 * std::numbers::pi * t.harmonic * v);
    }
    return v;
}

inline double evaluate_term(const RegressorTerm& term, const SignalView& s, std::size_t k,
                            const std::optional<Scaling>& scaling) {
    double value = 1.0;
    for (const auto& f : term.factors) {
        double v = s.at(f.variable, k, f.lag);
        if (scaling && f.variable == Variable::Output) {
            v = scaling->output.apply(v);
        } else if (scaling && f.variable == Variable::Input) {
            v = scaling->input.apply(v);
        }
        value *= apply_transform(f.transform, v);
    }
    return value;
}

}  // namespace detail

}  // namespace mycosys::narx
