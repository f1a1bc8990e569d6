// mycosys command-line front end: generate, analyze, identify, simulate, report.

#include <glob.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mycosys/mycosys.hpp"

namespace fs = std::filesystem;
using namespace mycosys;

namespace {

enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_data = 2, exit_numerical = 3 };

void log(const char* level, const std::string& msg) {
    std::string quoted;
    quoted.reserve(msg.size() + 2);
    for (char c : msg) {
        if (c == '"' || c == '\\') {
            quoted += '\\';
        }
        quoted += c == '\n' ? ' ' : c;
    }
    std::cerr << "level=" << level << " msg=\"" << quoted << "\"\n";
}

std::string num(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

struct Shared {
    std::string out = ".";
    std::uint64_t seed = 0;
    std::size_t workers = default_workers();
    double alpha = stats::default_alpha;
    std::size_t welch_seg = spectral::WelchConfig{}.segment_length;
    double welch_overlap = spectral::WelchConfig{}.overlap_fraction;
    std::optional<double> rate;
    bool to_stdout = false;

    [[nodiscard]] spectral::WelchConfig welch() const {
        spectral::WelchConfig w;
        w.segment_length = welch_seg;
        w.overlap_fraction = welch_overlap;
        return w;
    }
    [[nodiscard]] io::RecordingFormat format() const {
        io::RecordingFormat f;
        f.rate_override = rate;
        return f;
    }
    [[nodiscard]] fs::path out_dir() const {
        const fs::path p(out);
        std::error_code ec;
        fs::create_directories(p, ec);
        if (ec || !fs::is_directory(p)) {
            throw Error(Errc::invalid_argument, "output directory '" + out + "' is not writable");
        }
        return p;
    }
};

std::ofstream open_out(const fs::path& p) {
    std::ofstream f(p);
    if (!f) {
        throw Error(Errc::invalid_argument, "cannot write " + p.string());
    }
    return f;
}

double parse_double(const std::string& s, const std::string& what) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || p != end || !std::isfinite(v)) {
        throw Error(Errc::invalid_argument, "bad " + what + " '" + s + "'");
    }
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, sep);) {
        parts.push_back(item);
    }
    return parts;
}

/// "100:1000:100,2000" -> 100,200,...,1000,2000. Inclusive ranges; duplicates dropped keeping the
/// first occurrence.
std::vector<double> parse_frequencies(const std::string& spec) {
    std::vector<double> out;
    auto push = [&](double f) {
        const bool dup = std::any_of(out.begin(), out.end(), [&](double g) {
            return std::abs(f - g) <= 1e-9 * std::max(std::abs(f), std::abs(g));
        });
        if (!dup) {
            out.push_back(f);
        }
    };
    for (const auto& item : split(spec, ',')) {
        const auto p = split(item, ':');
        if (p.size() == 1) {
            push(parse_double(p[0], "frequency"));
        } else if (p.size() == 3) {
            const double a = parse_double(p[0], "frequency range start");
            const double b = parse_double(p[1], "frequency range end");
            const double s = parse_double(p[2], "frequency range step");
            if (!(s > 0.0) || b < a) {
                throw Error(Errc::invalid_argument, "bad frequency range '" + item + "'");
            }
            const auto n = static_cast<std::size_t>(std::floor((b - a) / s + 1e-9));
            for (std::size_t i = 0; i <= n; ++i) {
                push(a + static_cast<double>(i) * s);
            }
        } else {
            throw Error(Errc::invalid_argument, "bad frequency item '" + item + "'");
        }
    }
    if (out.empty()) {
        throw Error(Errc::invalid_argument, "no frequencies given");
    }
    return out;
}

std::vector<channel::InputCoupling> parse_couplings(const std::vector<std::string>& items) {
    std::vector<channel::InputCoupling> out;
    for (const auto& item : items) {
        const auto p = split(item, ':');
        if (p.size() != 2) {
            throw Error(Errc::invalid_argument, "coupling must be lag:gain, got '" + item + "'");
        }
        const double lag = parse_double(p[0], "coupling lag");
        if (lag < 1.0 || lag != std::floor(lag)) {
            throw Error(Errc::invalid_argument, "coupling lag must be a positive integer");
        }
        out.push_back({static_cast<std::size_t>(lag), parse_double(p[1], "coupling gain")});
    }
    return out;
}

narx::GridCell parse_cell(const std::string& s) {
    const auto p = split(s, ':');
    if (p.size() < 3 || p.size() > 4 || (p.size() == 4 && p[3] != "els")) {
        throw Error(Errc::invalid_argument, "grid cell must be kind:degree:terms[:els], got '" + s + "'");
    }
    narx::GridCell c;
    if (p[0] == "polynomial") {
        c.basis.kind = narx::BasisKind::Polynomial;
    } else if (p[0] == "fourier") {
        c.basis.kind = narx::BasisKind::Fourier;
    } else {
        throw Error(Errc::invalid_argument, "unknown basis '" + p[0] + "'");
    }
    const double d = parse_double(p[1], "degree");
    const double t = parse_double(p[2], "term count");
    if (d < 1 || d != std::floor(d) || t < 1 || t != std::floor(t)) {
        throw Error(Errc::invalid_argument, "degree and term count must be positive integers in '" + s + "'");
    }
    c.basis.degree = static_cast<int>(d);
    c.n_terms = static_cast<std::size_t>(t);
    c.use_els = p.size() == 4;
    return c;
}

/// Files named by plain paths, directories (their *.csv entries) or glob patterns, sorted and
/// deduplicated. Sidecars are never treated as recordings.
std::vector<fs::path> expand_inputs(const std::vector<std::string>& specs) {
    std::vector<fs::path> files;
    for (const auto& s : specs) {
        if (fs::is_directory(s)) {
            for (const auto& e : fs::directory_iterator(s)) {
                if (e.is_regular_file() && e.path().extension() == ".csv") {
                    files.push_back(e.path());
                }
            }
        } else if (s.find_first_of("*?[") != std::string::npos) {
            glob_t g{};
            if (::glob(s.c_str(), 0, nullptr, &g) == 0) {
                for (std::size_t i = 0; i < g.gl_pathc; ++i) {
                    files.emplace_back(g.gl_pathv[i]);
                }
            }
            ::globfree(&g);
        } else if (fs::exists(s)) {
            files.emplace_back(s);
        } else {
            throw Error(Errc::invalid_argument, "input '" + s + "' does not exist");
        }
    }
    std::erase_if(files, [](const fs::path& p) { return p.string().ends_with(".meta.json"); });
    std::sort(files.begin(), files.end());
    files.erase(std::unique(files.begin(), files.end()), files.end());
    if (files.empty()) {
        throw Error(Errc::invalid_argument, "input patterns matched no recordings");
    }
    return files;
}

std::string freq_tag(double f) { return num(f); }

// ---------------------------------------------------------------------------------------------

struct GenerateArgs {
    bool square = false;
    bool corpus = false;
    double freq = 0.0;
    std::string freqs;
    std::size_t reps = 28;
    double dur = 1.0;
    double amp = 5.0;
    double fs = 50'000.0;
    double noise_sigma = 0.0;
    std::vector<std::string> coupling;
};

int cmd_generate(const Shared& sh, const GenerateArgs& a) {
    const auto dir = sh.out_dir();
    if (a.square) {
        const StimulusSpec spec{a.freq, a.amp, a.dur, a.fs};
        const auto ts = make_square_wave(spec);
        const auto path = dir / ("square_f" + freq_tag(a.freq) + ".csv");
        auto out = open_out(path);
        io::write_stimulus(out, ts);
        if (sh.to_stdout) {
            io::write_stimulus(std::cout, ts);
        }
        log("info", "wrote " + path.string() + " (" + std::to_string(ts.size()) + " samples)");
        return exit_ok;
    }

    const auto freqs = parse_frequencies(a.freqs);
    channel::ChannelSpec templ;
    templ.noise_sigma_v = a.noise_sigma;
    templ.seed = sh.seed;
    if (!a.coupling.empty()) {
        templ.input_coupling = parse_couplings(a.coupling);
    }
    const channel::CorpusOptions opt{a.dur, a.fs, a.amp, sh.workers};
    for (double f : freqs) {
        StimulusSpec{f, a.amp, a.dur, a.fs}.validate();
    }
    std::size_t written = 0;
    // one frequency at a time keeps memory bounded; seeds match a whole-corpus run
    for (std::size_t fi = 0; fi < freqs.size(); ++fi) {
        auto spec = templ;
        spec.seed = templ.seed + fi * a.reps;
        const auto recs = channel::make_corpus(std::span<const double>(&freqs[fi], 1), a.reps, spec, opt);
        for (const auto& rec : recs) {
            io::save_recording_file(dir / ("f" + freq_tag(freqs[fi]) + "_" + rec.replicate_id() + ".csv"), rec);
            ++written;
        }
    }
    log("info", "wrote " + std::to_string(written) + " recordings to " + dir.string());
    return exit_ok;
}

// ---------------------------------------------------------------------------------------------

struct AnalyzeArgs {
    std::vector<std::string> inputs;
    std::optional<double> freq;
    bool no_spectra = false;
    std::size_t granger_cap = 30;
};

int cmd_analyze(const Shared& sh, const AnalyzeArgs& a) {
    const auto files = expand_inputs(a.inputs);
    const auto dir = sh.out_dir();
    pipeline::AnalysisOptions opt;
    opt.welch = sh.welch();
    opt.alpha = sh.alpha;
    opt.granger_lag_cap = a.granger_cap;

    struct Slot {
        std::optional<pipeline::RecordingAnalysis> analysis;
        std::optional<spectral::SpectralEstimate> csd;
        std::string skipped;
    };
    std::vector<Slot> slots(files.size());
    io::RecordingMetadata overrides;
    overrides.input_frequency_hz = a.freq;
    parallel_for(files.size(), sh.workers, [&](std::size_t i) {
        auto& s = slots[i];
        try {
            const auto rec = io::load_recording_file(files[i], sh.format(), overrides);
            s.analysis = pipeline::analyze_recording(rec, opt, files[i].stem().string());
            if (!a.no_spectra) {
                try {
                    s.csd = spectral::welch_csd(rec.input(), rec.output(),
                                                pipeline::effective_welch(opt.welch, rec.size()));
                } catch (const Error&) {
                    // already recorded as a note by the analysis
                }
            }
        } catch (const Error& e) {
            s.skipped = e.what();
        }
    });

    std::vector<stats::AnalysisRecord> records;
    std::size_t skipped = 0;
    auto detail = open_out(dir / "recordings.csv");
    detail << "name,replicate_id,input_hz,dominant_hz,recoverable,amplitude_v,adf_stat,adf_p,adf_lag,adf_significant,"
              "gc_stat,gc_p,gc_lag,gc_rejects,ad_stat,ad_rejects,notes\n";
    if (!a.no_spectra) {
        fs::create_directories(dir / "spectra");
    }
    for (std::size_t i = 0; i < files.size(); ++i) {
        const auto& s = slots[i];
        if (!s.analysis) {
            ++skipped;
            log("warn", "skipped " + files[i].string() + ": " + s.skipped);
            continue;
        }
        const auto& r = *s.analysis;
        records.push_back(r.record(sh.alpha));
        auto test_cols = [&](const std::optional<stats::TestResult>& t) {
            if (!t) {
                return std::string(",,,");
            }
            return num(t->statistic) + ',' + (t->p_value ? num(*t->p_value) : "") + ',' +
                   (t->lag_order ? std::to_string(*t->lag_order) : "") + ',' + (t->rejects(sh.alpha) ? "1" : "0");
        };
        std::string notes;
        for (const auto& n : r.notes) {
            notes += (notes.empty() ? "" : "; ") + n;
        }
        std::replace(notes.begin(), notes.end(), ',', ' ');
        detail << r.name << ',' << r.replicate_id << ',' << num(r.input_frequency_hz) << ','
               << (r.dominant_frequency_hz ? num(*r.dominant_frequency_hz) : "") << ',' << (r.recoverable ? 1 : 0)
               << ',' << num(r.dominant_amplitude_v) << ',' << test_cols(r.adf) << ',' << test_cols(r.granger) << ','
               << (r.anderson_darling ? num(r.anderson_darling->statistic) : "") << ','
               << (r.anderson_darling ? (r.anderson_darling->reject_at_05 ? "1" : "0") : "") << ',' << notes << '\n';
        for (const auto& n : r.notes) {
            log("warn", r.name + ": " + n);
        }
        if (s.csd) {
            auto out = open_out(dir / "spectra" / (r.name + ".csd.csv"));
            spectral::write_spectrum_csv(out, *s.csd);
        }
    }

    const auto rep = stats::build_report(records);
    for (const auto& w : rep.warnings) {
        log("warn", w);
    }
    {
        auto out = open_out(dir / "report.csv");
        stats::write_report_csv(out, rep);
    }
    if (sh.to_stdout) {
        stats::write_report_csv(std::cout, rep);
    }
    log("info", "analyzed " + std::to_string(records.size()) + " of " + std::to_string(files.size()) +
                    " recordings; report at " + (dir / "report.csv").string());
    if (records.empty() || 2 * skipped > files.size()) {
        log("error", std::to_string(skipped) + " of " + std::to_string(files.size()) + " recordings skipped");
        return exit_data;
    }
    return exit_ok;
}

// ---------------------------------------------------------------------------------------------

struct IdentifyArgs {
    std::vector<std::string> train;
    std::vector<std::string> validate;
    std::vector<std::string> grid;
    std::string lag_policy = "xcorr";
    std::size_t lag_cap = 30;
    std::string fixed_lags = "2:2";
    double train_fraction = 0.8;
    std::size_t els_iterations = 10;
    bool no_input_lags = false;
    std::optional<double> freq;
};

std::vector<RecordingPair> load_all(const Shared& sh, const std::vector<std::string>& specs,
                                    std::optional<double> freq) {
    const auto files = expand_inputs(specs);
    io::RecordingMetadata overrides;
    overrides.input_frequency_hz = freq;
    // stimulus-only use of identify is not meaningful; metadata falls back to 0 Hz when absent
    if (!overrides.input_frequency_hz) {
        for (const auto& f : files) {
            if (!fs::exists(io::sidecar_path(f))) {
                overrides.input_frequency_hz = 0.0;
                break;
            }
        }
    }
    std::vector<std::optional<RecordingPair>> slots(files.size());
    parallel_for(files.size(), sh.workers,
                 [&](std::size_t i) { slots[i].emplace(io::load_recording_file(files[i], sh.format(), overrides)); });
    std::vector<RecordingPair> out;
    for (auto& s : slots) {
        out.push_back(std::move(*s));
    }
    return out;
}

int cmd_identify(const Shared& sh, const IdentifyArgs& a) {
    const auto train = load_all(sh, a.train, a.freq);
    const auto validation = a.validate.empty() ? std::vector<RecordingPair>{} : load_all(sh, a.validate, a.freq);
    std::vector<narx::GridCell> grid;
    for (const auto& g : a.grid) {
        if (g == "default") {
            const auto d = narx::default_grid();
            grid.insert(grid.end(), d.begin(), d.end());
        } else {
            grid.push_back(parse_cell(g));
        }
    }
    if (grid.empty()) {
        grid = narx::default_grid();
    }
    narx::GridSearchOptions opt;
    opt.train_fraction = a.train_fraction;
    opt.lag_cap = a.lag_cap;
    opt.els_iterations = a.els_iterations;
    opt.include_input_lags = !a.no_input_lags;
    opt.workers = sh.workers;
    if (a.lag_policy == "xcorr") {
        opt.lag_policy = narx::LagPolicy::CrossCorrelation;
    } else if (a.lag_policy == "acf") {
        opt.lag_policy = narx::LagPolicy::Autocorrelation;
    } else if (a.lag_policy == "fixed") {
        opt.lag_policy = narx::LagPolicy::Fixed;
        const auto p = split(a.fixed_lags, ':');
        if (p.size() != 2) {
            throw Error(Errc::invalid_argument, "--fixed-lags must be output:input");
        }
        opt.fixed_output_lag = static_cast<std::size_t>(parse_double(p[0], "output lag"));
        opt.fixed_input_lag = static_cast<std::size_t>(parse_double(p[1], "input lag"));
    } else {
        throw Error(Errc::invalid_argument, "lag policy must be xcorr, acf or fixed");
    }
    if (!(a.train_fraction > 0.0 && a.train_fraction < 1.0)) {
        throw Error(Errc::invalid_argument, "train fraction must lie in (0,1)");
    }

    const auto dir = sh.out_dir();
    const auto result = narx::grid_search(train, grid, validation, opt);
    {
        auto out = open_out(dir / "scores.csv");
        narx::write_score_table(out, result.table);
    }
    {
        auto out = open_out(dir / "model.json");
        narx::write_model(out, result.model);
    }
    if (sh.to_stdout) {
        narx::write_model(std::cout, result.model);
    }
    for (const auto& s : result.table) {
        if (!s.viable) {
            log("warn", narx::to_string(s.cell) + " not viable: " + s.failure);
        }
    }
    log("info", "best " + narx::to_string(result.best) + ": " + result.model.to_string());
    return exit_ok;
}

// ---------------------------------------------------------------------------------------------

struct SimulateArgs {
    std::string model = "eq2";
    std::string input;
    double freq = 900.0;
    double dur = 1.0;
    double amp = 5.0;
    double fs = 50'000.0;
    double noise_sigma = 0.0;
    std::vector<std::string> coupling;
    bool no_coupling = false;
    std::optional<double> initial;
    std::string name = "simulated";
    std::string replicate_id = "sim";
};

int cmd_simulate(const Shared& sh, const SimulateArgs& a) {
    channel::ChannelSpec spec;
    if (a.model != "eq2") {
        std::ifstream in(a.model);
        if (!in) {
            throw Error(Errc::invalid_argument, "cannot open model " + a.model);
        }
        spec.model = narx::read_model(in);
        spec.input_coupling.clear();  // a fitted model carries its own input terms
    }
    if (a.no_coupling) {
        spec.input_coupling.clear();
    } else if (!a.coupling.empty()) {
        spec.input_coupling = parse_couplings(a.coupling);
    }
    spec.noise_sigma_v = a.noise_sigma;
    spec.seed = sh.seed;
    if (a.initial) {
        spec.initial_output_v = *a.initial;
    } else {
        const double fp = channel::linear_fixed_point(spec.model);
        spec.initial_output_v = std::isfinite(fp) ? fp : 0.0;
    }

    std::optional<TimeSeries> input;
    double freq = a.freq;
    if (!a.input.empty()) {
        std::ifstream in(a.input);
        if (!in) {
            throw Error(Errc::invalid_argument, "cannot open input " + a.input);
        }
        input = io::load_stimulus(in, sh.format(), "input");
        if (const auto side = io::sidecar_path(a.input); fs::exists(side)) {
            std::ifstream sin(side);
            freq = io::parse_sidecar(sin).input_frequency_hz.value_or(freq);
        }
    } else {
        input = make_square_wave({a.freq, a.amp, a.dur, a.fs});
    }
    const auto rec = channel::simulate_channel(spec, *input, freq, a.replicate_id);
    const auto path = sh.out_dir() / (a.name + ".csv");
    io::save_recording_file(path, rec);
    if (sh.to_stdout) {
        io::write_recording(std::cout, rec);
    }
    log("info", "wrote " + path.string() + " (" + std::to_string(rec.size()) + " samples)");
    return exit_ok;
}

// ---------------------------------------------------------------------------------------------

struct ReportArgs {
    std::vector<std::string> inputs;
    std::string id;
    std::size_t excerpt = 1000;
    std::optional<double> freq;
};

int cmd_report(const Shared& sh, const ReportArgs& a) {
    const auto files = expand_inputs(a.inputs);
    const auto it = std::find_if(files.begin(), files.end(), [&](const fs::path& p) { return p.stem() == a.id; });
    if (it == files.end()) {
        throw Error(Errc::invalid_argument, "unknown recording id '" + a.id + "'");
    }
    io::RecordingMetadata overrides;
    overrides.input_frequency_hz = a.freq;
    if (!a.freq && !fs::exists(io::sidecar_path(*it))) {
        overrides.input_frequency_hz = 0.0;  // plots do not need the metadata
    }
    const auto rec = io::load_recording_file(*it, sh.format(), overrides);
    if (a.excerpt == 0 || a.excerpt > rec.size()) {
        throw Error(Errc::invalid_argument, "excerpt of " + std::to_string(a.excerpt) +
                                                " samples does not fit a recording of " + std::to_string(rec.size()));
    }
    const auto dir = sh.out_dir();
    {
        auto out = open_out(dir / (a.id + ".timeseries.csv"));
        const auto part = RecordingPair(rec.input().slice(0, a.excerpt), rec.output().slice(0, a.excerpt),
                                        rec.input_frequency_hz(), rec.replicate_id());
        io::write_recording(out, part);
    }
    {
        auto out = open_out(dir / (a.id + ".amplitude.csv"));
        spectral::write_spectrum_csv(out, spectral::dft_amplitude_spectrum(rec.output()));
    }
    {
        auto out = open_out(dir / (a.id + ".csd.csv"));
        spectral::write_spectrum_csv(
            out, spectral::welch_csd(rec.input(), rec.output(), pipeline::effective_welch(sh.welch(), rec.size())));
    }
    log("info", "wrote plot data for " + a.id + " to " + dir.string());
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mycosys: stimulus generation, spectral/statistical analysis and NARX identification"};
    app.require_subcommand(1);
    app.fallthrough();

    Shared sh;
    app.add_option("--out", sh.out, "Output directory")->capture_default_str();
    app.add_option("--seed", sh.seed, "Random seed")->capture_default_str();
    app.add_option("--workers", sh.workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--alpha", sh.alpha, "Significance level")
        ->check(CLI::Range(0.0, 1.0))
        ->check([](const std::string& s) {
            const double v = std::stod(s);
            return (v > 0.0 && v < 1.0) ? std::string{} : std::string("alpha must lie strictly inside (0,1)");
        })
        ->capture_default_str();
    app.add_option("--welch-seg", sh.welch_seg, "Welch segment length")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--welch-overlap", sh.welch_overlap, "Welch overlap fraction")->capture_default_str();
    app.add_option("--rate", sh.rate, "Expected sample rate in Hz (checked within 0.1%)");
    app.add_flag("--stdout", sh.to_stdout, "Also write the main result to standard output");

    GenerateArgs ga;
    auto* gen = app.add_subcommand("generate", "Write a square-wave stimulus or a synthetic corpus");
    auto* sq = gen->add_flag("--square", ga.square, "Single square-wave stimulus");
    auto* co = gen->add_flag("--corpus", ga.corpus, "Synthetic corpus through the default channel");
    sq->excludes(co);
    gen->add_option("--freq", ga.freq, "Stimulus frequency in Hz");
    gen->add_option("--freqs", ga.freqs, "Corpus frequencies: start:stop:step or values, comma separated");
    gen->add_option("--reps", ga.reps, "Replicates per frequency")->capture_default_str();
    gen->add_option("--dur", ga.dur, "Duration in seconds")->capture_default_str();
    gen->add_option("--amp", ga.amp, "Amplitude in volts")->capture_default_str();
    gen->add_option("--fs", ga.fs, "Sample rate in Hz")->capture_default_str();
    gen->add_option("--noise-sigma", ga.noise_sigma, "Corpus measurement noise in volts")->capture_default_str();
    gen->add_option("--coupling", ga.coupling, "Corpus input coupling lag:gain (repeatable)");

    AnalyzeArgs aa;
    auto* ana = app.add_subcommand("analyze", "Per-recording tests and a per-frequency report");
    ana->add_option("inputs", aa.inputs, "Recording files, directories or glob patterns")->required();
    ana->add_option("--freq", aa.freq, "Input frequency for recordings without a sidecar");
    ana->add_option("--granger-lag-cap", aa.granger_cap, "Largest Granger lag considered")->capture_default_str();
    ana->add_flag("--no-spectra", aa.no_spectra, "Skip per-recording CSD files");

    IdentifyArgs ia;
    auto* idn = app.add_subcommand("identify", "Grid-searched NARX identification");
    idn->add_option("--train", ia.train, "Training recordings")->required();
    idn->add_option("--validate", ia.validate, "Validation recordings");
    idn->add_option("--grid", ia.grid, "Grid cell kind:degree:terms[:els] or 'default' (repeatable)");
    idn->add_option("--lag-policy", ia.lag_policy, "xcorr, acf or fixed")->capture_default_str();
    idn->add_option("--lag-cap", ia.lag_cap, "Largest automatically chosen lag")->capture_default_str();
    idn->add_option("--fixed-lags", ia.fixed_lags, "output:input lags for the fixed policy")->capture_default_str();
    idn->add_option("--train-fraction", ia.train_fraction, "Fit/test split of each training recording")
        ->capture_default_str();
    idn->add_option("--els-iterations", ia.els_iterations, "Extended least squares iterations")->capture_default_str();
    idn->add_flag("--no-input-lags", ia.no_input_lags, "Output-only candidate terms");
    idn->add_option("--freq", ia.freq, "Input frequency for recordings without a sidecar");

    SimulateArgs sa;
    auto* sim = app.add_subcommand("simulate", "Drive a channel model and write the recording");
    sim->add_option("--model", sa.model, "Model JSON, or eq2 for the built-in channel")->capture_default_str();
    sim->add_option("--input", sa.input, "Stimulus or recording CSV to drive the model");
    sim->add_option("--freq", sa.freq, "Square-wave frequency when no input file is given")->capture_default_str();
    sim->add_option("--dur", sa.dur, "Square-wave duration in seconds")->capture_default_str();
    sim->add_option("--amp", sa.amp, "Square-wave amplitude in volts")->capture_default_str();
    sim->add_option("--fs", sa.fs, "Square-wave sample rate in Hz")->capture_default_str();
    sim->add_option("--noise-sigma", sa.noise_sigma, "Measurement noise in volts")->capture_default_str();
    sim->add_option("--coupling", sa.coupling, "Input coupling lag:gain (repeatable)");
    sim->add_flag("--no-coupling", sa.no_coupling, "Drop all input coupling");
    sim->add_option("--initial", sa.initial, "Initial output level in volts");
    sim->add_option("--name", sa.name, "Output file stem")->capture_default_str();
    sim->add_option("--replicate-id", sa.replicate_id, "Replicate id written to the sidecar")->capture_default_str();

    ReportArgs ra;
    auto* rep = app.add_subcommand("report", "Plot data for one recording: excerpt, amplitude spectrum, CSD");
    rep->add_option("inputs", ra.inputs, "Recording files, directories or glob patterns")->required();
    rep->add_option("--id", ra.id, "Recording id (file stem)")->required();
    rep->add_option("--excerpt", ra.excerpt, "Samples in the time-series excerpt")->capture_default_str();
    rep->add_option("--freq", ra.freq, "Input frequency for a recording without a sidecar");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (gen->parsed()) {
            if (!ga.square && !ga.corpus) {
                throw Error(Errc::invalid_argument, "generate needs --square or --corpus");
            }
            if (ga.square && gen->count("--freq") == 0) {
                throw Error(Errc::invalid_argument, "--square needs --freq");
            }
            if (ga.corpus && ga.freqs.empty()) {
                throw Error(Errc::invalid_argument, "--corpus needs --freqs");
            }
            return cmd_generate(sh, ga);
        }
        if (ana->parsed()) {
            return cmd_analyze(sh, aa);
        }
        if (idn->parsed()) {
            return cmd_identify(sh, ia);
        }
        if (sim->parsed()) {
            return cmd_simulate(sh, sa);
        }
        if (rep->parsed()) {
            return cmd_report(sh, ra);
        }
    } catch (const Error& e) {
        log("error", e.what());
        switch (classify(e.code())) {
            case ErrorClass::usage:
                return exit_usage;
            case ErrorClass::data:
                return exit_data;
            case ErrorClass::numerical:
                return exit_numerical;
        }
    } catch (const std::exception& e) {
        log("error", e.what());
        return exit_data;
    }
    return exit_usage;
}
