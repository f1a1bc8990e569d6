#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mycosys {

/// Failure categories raised by the toolkit.
enum class Errc {
    invalid_spec,
    invalid_argument,
    invalid_config,
    degenerate_input,
    undefined_correlation,
    parse_error,
    no_dominant_frequency,
    singular_regression,
    config_too_large,
    els_divergence,
    insufficient_history,
    divergence,
    undefined_denominator,
    no_viable_model,
    unstable_channel,
};

/// Coarse grouping used by the CLI to pick an exit code.
enum class ErrorClass { usage, data, numerical };

[[nodiscard]] constexpr ErrorClass classify(Errc code) noexcept {
    switch (code) {
        case Errc::invalid_spec:
        case Errc::invalid_argument:
        case Errc::invalid_config:
        case Errc::config_too_large:
            return ErrorClass::usage;
        case Errc::degenerate_input:
        case Errc::parse_error:
        case Errc::undefined_correlation:
        case Errc::no_dominant_frequency:
        case Errc::undefined_denominator:
        case Errc::insufficient_history:
            return ErrorClass::data;
        case Errc::singular_regression:
        case Errc::els_divergence:
        case Errc::divergence:
        case Errc::no_viable_model:
        case Errc::unstable_channel:
            return ErrorClass::numerical;
    }
    return ErrorClass::numerical;
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

    [[nodiscard]] Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

/// Parse failure that names the offending data row (1-based, header excluded) and column.
class ParseError : public Error {
public:
    ParseError(std::size_t row, std::string column, const std::string& what)
        : Error(Errc::parse_error, "row " + std::to_string(row) + (column.empty() ? "" : ", column '" + column + "'") +
                                       ": " + what),
          row_(row),
          column_(std::move(column)) {}

    [[nodiscard]] std::size_t row() const noexcept { return row_; }
    [[nodiscard]] const std::string& column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::string column_;
};

/// Divergence during recursive simulation; carries the step index where |y| blew up.
class DivergenceError : public Error {
public:
    DivergenceError(Errc code, std::size_t step, const std::string& what)
        : Error(code, what + " at step " + std::to_string(step)), step_(step) {}

    [[nodiscard]] std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

}  // namespace mycosys
