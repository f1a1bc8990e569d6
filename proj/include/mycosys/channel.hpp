#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <span>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "mycosys/error.hpp"
#include "mycosys/narx/model.hpp"
#include "mycosys/narx/simulate.hpp"
#include "mycosys/parallel.hpp"
#include "mycosys/timeseries.hpp"

namespace mycosys::channel {

using narx::NarxModel;

/// Five-term identified channel for the 900 Hz treatment:
///   y(k) = 0.33 y(k-1) + 0.21 y(k-2) - 0.15 y(k-27) + 0.20 y(k-9) + 0.21
/// with its +- intervals kept as metadata.
[[nodiscard]] inline NarxModel eq2_default() {
    using narx::Variable;
    NarxModel m;
    m.basis = {narx::BasisKind::Polynomial, 1};
    m.terms = {narx::lag_term(Variable::Output, 1), narx::lag_term(Variable::Output, 2),
               narx::lag_term(Variable::Output, 27), narx::lag_term(Variable::Output, 9), narx::constant_term()};
    m.coefficients = {0.33, 0.21, -0.15, 0.20, 0.21};
    m.coefficient_uncertainty = {0.99, 5.5e-4, 9.2e-4, 1.3e-3, 4.2e-3};
    m.err_values = {0.0, 0.0, 0.0, 0.0, 0.0};  // unknown
    m.max_output_lag = 27;
    m.max_input_lag = 0;
    m.input_delay = 1;
    return m;
}

/// Steady state of a linear output-only model: constant / (1 - sum of output-lag coefficients).
[[nodiscard]] inline double linear_fixed_point(const NarxModel& m) {
    double constant = 0.0;
    double ar_sum = 0.0;
    for (std::size_t i = 0; i < m.terms.size(); ++i) {
        const auto& t = m.terms[i];
        if (t.is_constant()) {
            constant += m.coefficients[i];
        } else if (t.factors.size() == 1 && t.factors[0].variable == narx::Variable::Output &&
                   t.factors[0].transform.kind == narx::TransformKind::Identity) {
            ar_sum += m.coefficients[i];
        }
    }
    return constant / (1.0 - ar_sum);
}

/// Spectral radius of the companion matrix formed from the linear output-lag terms.
[[nodiscard]] inline double companion_spectral_radius(const NarxModel& m) {
    const std::size_t p = m.output_history();
    if (p == 0) {
        return 0.0;
    }
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < m.terms.size(); ++i) {
        const auto& t = m.terms[i];
        if (t.factors.size() == 1 && t.factors[0].variable == narx::Variable::Output &&
            t.factors[0].transform.kind == narx::TransformKind::Identity) {
            c(0, static_cast<Eigen::Index>(t.factors[0].lag - 1)) += m.coefficients[i];
        }
    }
    for (std::size_t i = 1; i < p; ++i) {
        c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
    }
    const Eigen::EigenSolver<Eigen::MatrixXd> es(c, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

struct InputCoupling {
    std::size_t lag = 1;
    double gain = 0.05;
};

struct ChannelSpec {
    NarxModel model = eq2_default();
    std::vector<InputCoupling> input_coupling{InputCoupling{}};
    double noise_sigma_v = 0.0;
    std::uint64_t seed = 0;
    double initial_output_v = linear_fixed_point(eq2_default());

    /// Model with the coupling gains appended as input-lag terms.
    [[nodiscard]] NarxModel coupled_model() const {
        NarxModel m = model;
        for (const auto& c : input_coupling) {
            if (c.lag == 0) {
                throw Error(Errc::invalid_spec, "input coupling lag must be >= 1");
            }
            m.terms.push_back(narx::lag_term(narx::Variable::Input, c.lag));
            m.coefficients.push_back(c.gain);
            m.err_values.push_back(0.0);
            if (!m.coefficient_uncertainty.empty()) {
                m.coefficient_uncertainty.push_back(0.0);
            }
            m.max_input_lag = std::max(m.max_input_lag, c.lag);
        }
        return m;
    }

    /// Noise level, free-run stability over 10x the lag depth from the initial condition.
    void validate() const {
        if (!(noise_sigma_v >= 0.0) || !std::isfinite(noise_sigma_v)) {
            throw Error(Errc::invalid_spec, "noise sigma must be non-negative");
        }
        if (!std::isfinite(initial_output_v)) {
            throw Error(Errc::invalid_spec, "initial output must be finite");
        }
        const auto m = coupled_model();
        m.validate();
        const std::size_t depth = std::max<std::size_t>(1, m.history());
        const std::vector<double> zeros(10 * depth + depth, 0.0);
        const std::vector<double> init(depth, initial_output_v);
        try {
            (void)narx::free_run(m, zeros, init);
        } catch (const DivergenceError& e) {
            throw DivergenceError(Errc::unstable_channel, e.step(), "channel model unstable under free run");
        }
    }
};

/// Drive the coupled model with `input`, then add seeded Gaussian noise per output sample.
[[nodiscard]] inline RecordingPair simulate_channel(const ChannelSpec& spec, const TimeSeries& input,
                                                    double input_frequency_hz, std::string replicate_id = "sim") {
    spec.validate();
    const auto m = spec.coupled_model();
    const std::size_t depth = std::max<std::size_t>(1, m.history());
    if (input.size() <= depth) {
        throw Error(Errc::insufficient_history, "input of length " + std::to_string(input.size()) +
                                                    " does not exceed model lag depth " + std::to_string(depth));
    }
    const std::vector<double> init(depth, spec.initial_output_v);
    std::vector<double> y;
    try {
        y = narx::free_run(m, input.samples(), init);
    } catch (const DivergenceError& e) {
        throw DivergenceError(Errc::unstable_channel, e.step(), "simulated channel diverged");
    }
    if (spec.noise_sigma_v > 0.0) {
        std::mt19937_64 rng(spec.seed);
        std::normal_distribution<double> noise(0.0, spec.noise_sigma_v);
        for (double& v : y) {
            v += noise(rng);
        }
    }
    TimeSeries output(std::move(y), input.sample_rate_hz(), "output");
    return RecordingPair(input.with_label("input"), std::move(output), input_frequency_hz, std::move(replicate_id));
}

[[nodiscard]] inline RecordingPair simulate_channel(const ChannelSpec& spec, const TimeSeries& input) {
    return simulate_channel(spec, input, 1.0);
}

struct CorpusOptions {
    double duration_s = 1.0;
    double sample_rate_hz = 50'000.0;
    double amplitude_v = 5.0;
    std::size_t workers = 1;
};

/// frequencies x replicates corpus, frequency-major. Replicate i of the whole corpus uses seed
/// template.seed + i; replicate ids are "r01", "r02", ...
[[nodiscard]] inline std::vector<RecordingPair> make_corpus(std::span<const double> frequencies,
                                                            std::size_t replicates, const ChannelSpec& templ,
                                                            const CorpusOptions& opt = {}) {
    for (double f : frequencies) {
        StimulusSpec{f, opt.amplitude_v, opt.duration_s, opt.sample_rate_hz}.validate();
    }
    templ.validate();
    const std::size_t total = frequencies.size() * replicates;
    std::vector<std::optional<RecordingPair>> cells(total);
    parallel_for(total, opt.workers, [&](std::size_t i) {
        const double f = frequencies[i / replicates];
        const std::size_t rep = i % replicates;
        ChannelSpec spec = templ;
        spec.seed = templ.seed + i;
        const auto input = make_square_wave({f, opt.amplitude_v, opt.duration_s, opt.sample_rate_hz});
        char id[32];
        std::snprintf(id, sizeof(id), "r%02zu", rep + 1);
        cells[i].emplace(simulate_channel(spec, input, f, id));
    });
    std::vector<RecordingPair> out;
    out.reserve(total);
    for (auto& c : cells) {
        out.push_back(std::move(*c));
    }
    return out;
}

/// The stimulation schedule: 100..1000 Hz in 100 Hz steps, then 2..10 kHz in 1 kHz steps.
[[nodiscard]] inline std::vector<double> stimulation_schedule() {
    std::vector<double> f;
    for (int i = 1; i <= 10; ++i) {
        f.push_back(100.0 * i);
    }
    for (int i = 2; i <= 10; ++i) {
        f.push_back(1000.0 * i);
    }
    return f;
}

}  // namespace mycosys::channel
