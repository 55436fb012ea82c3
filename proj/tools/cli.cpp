#include "cli.hpp"

#include "rtfcs/error.hpp"
#include "rtfcs/estimators.hpp"
#include "rtfcs/evaluation.hpp"
#include "rtfcs/scenario.hpp"
#include "rtfcs/selection.hpp"
#include "rtfcs/serialize.hpp"
#include "rtfcs/sparse.hpp"
#include "rtfcs/sweep.hpp"
#include "rtfcs/wav.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <sstream>

namespace rtfcs::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public Error {
public:
    using Error::Error;
};

constexpr const char* kDefaultMethods = "fd,nsfd,fd+oracle,nsfd+oracle,fd+kurtosis,nsfd+kurtosis";
constexpr const char* kDefaultPercentages = "15,25,45,70,100";

fs::path resolve_out_dir(const std::string& flag) {
    fs::path dir;
    if (!flag.empty()) {
        dir = flag;
    } else if (const char* env = std::getenv("RTFCS_OUT_DIR"); env && *env) {
        dir = env;
    } else {
        dir = "rtfcs_out";
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    return fs::absolute(dir).lexically_normal();
}

class Run {
public:
    Run(std::string command, const std::string& out_flag)
        : dir_(resolve_out_dir(out_flag)), start_(std::chrono::steady_clock::now()) {
        manifest_.command = std::move(command);
    }

    RunManifest& manifest() { return manifest_; }
    const fs::path& dir() const { return dir_; }

    void text(const std::string& name, const std::string& content) {
        write_text_file(dir_ / name, content);
        record(name);
    }

    void wav(const std::string& name, const StereoRecording& rec) {
        write_wav(dir_ / name, rec, WavFormat::Float32);
        record(name);
    }

    fs::path finish() {
        manifest_.elapsed_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        const fs::path path = dir_ / (manifest_.command + ".manifest.json");
        write_text_file(path, manifest_to_json(manifest_));
        return path;
    }

private:
    void record(const std::string& name) {
        const std::string p = (dir_ / name).string();
        if (std::find(manifest_.outputs.begin(), manifest_.outputs.end(), p) == manifest_.outputs.end())
            manifest_.outputs.push_back(p);
    }

    fs::path dir_;
    std::chrono::steady_clock::time_point start_;
    RunManifest manifest_;
};

ScenarioSpec load_spec(const std::string& config, std::optional<std::uint64_t> seed) {
    ScenarioSpec s = load_scenario(config);
    if (seed) s.seed = *seed;
    return s;
}

TruthSidecar make_truth(const ScenarioSpec& spec, const Scenario& sc) {
    const AnalysisConfig& a = spec.analysis;
    TruthSidecar t;
    t.dft_len = a.dft_len;
    t.oracle_snr = oracle_snr(stft(sc.truth.s_left, a.dft_len, a.hop, a.window),
                              stft(sc.truth.y_left, a.dft_len, a.hop, a.window));
    t.h_rel = sc.truth.h_rel;
    return t;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// ---------------------------------------------------------------------------

struct CommonOpts {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* sub, CommonOpts& o, bool config_required) {
    auto* c = sub->add_option("--config", o.config, "scenario config file (JSON)");
    if (config_required) c->required();
    sub->add_option("--seed", o.seed, "override the scenario seed");
    sub->add_option("--out", o.out, "output directory (default: $RTFCS_OUT_DIR or ./rtfcs_out)");
}

int cmd_scenario(const CommonOpts& o, std::ostream& out) {
    const ScenarioSpec spec = load_spec(o.config, o.seed);
    const Scenario sc = mix_at_snr(spec);
    Run run("scenario", o.out);
    run.manifest().config_path = fs::absolute(o.config).string();
    run.manifest().seed = spec.seed;
    run.manifest().resolved = dump_scenario(spec);
    run.wav("mixture.wav", sc.mixture);
    run.wav("target.wav", StereoRecording(sc.truth.s_left, sc.truth.s_right));
    run.wav("noise.wav", StereoRecording(sc.truth.y_left, sc.truth.y_right));
    run.text("truth.json", truth_to_json(make_truth(spec, sc)));
    run.text("resolved.json", dump_scenario(spec) + "\n");
    const fs::path m = run.finish();
    out << "snr_in " << fmt("%.3f", snr_in_db(sc.truth)) << " dB, noise scale " << fmt("%.6g", sc.noise_scale)
        << "\nmanifest " << m.string() << "\n";
    return kOk;
}

struct EstimateOpts {
    CommonOpts common;
    std::string method;
    std::string input;
    std::string demix;
};

int cmd_estimate(const EstimateOpts& o, std::ostream& out) {
    EstimatorKind kind;
    try {
        kind = parse_estimator(o.method);
    } catch (const InvalidArgument& e) {
        throw UsageError(std::string(e.what()) + " (expected ls, fd, nsfd or external-demix)");
    }
    if (kind == EstimatorKind::ExternalDemix && o.demix.empty())
        throw UsageError("--method external-demix requires --demix FILE");
    if (o.common.config.empty() && o.input.empty()) throw UsageError("need --config or --input");

    std::optional<ScenarioSpec> spec;
    if (!o.common.config.empty()) spec = load_spec(o.common.config, o.common.seed);
    const AnalysisConfig a = spec ? spec->analysis : AnalysisConfig{};

    Run run("estimate", o.common.out);
    run.manifest().config_path = o.common.config.empty() ? "" : fs::absolute(o.common.config).string();
    run.manifest().seed = spec ? spec->seed : 0;
    run.manifest().resolved = spec ? dump_scenario(*spec) : "";
    run.manifest().arguments = {"--method", o.method};

    StereoRecording rec;
    if (!o.input.empty()) {
        rec = read_stereo_wav(o.input);
        run.manifest().arguments.insert(run.manifest().arguments.end(),
                                        {"--input", fs::absolute(o.input).string()});
    } else {
        const Scenario sc = mix_at_snr(*spec);
        rec = sc.mixture;
        run.text("truth.json", truth_to_json(make_truth(*spec, sc)));
    }

    EstimateFile file;
    file.delay = a.delay;
    const Spectrogram L = stft(rec.left(), a.dft_len, a.hop, a.window);
    switch (kind) {
        case EstimatorKind::TimeLs:
            file.estimate = rtf_from_filter(estimate_ls_time(rec, a.dft_len, a.delay), a.dft_len, kind);
            break;
        case EstimatorKind::Fd:
            file.estimate = estimate_fd(L, stft(rec.right(), a.dft_len, a.hop, a.window));
            break;
        case EstimatorKind::Nsfd: {
            const Spectrogram R = stft(rec.right(), a.dft_len, a.hop, a.window);
            const Index blocks = nsfd_block_count(L.frames(), a.hop, a.nsfd_block_samples);
            file.estimate = estimate_nsfd(compute_psd_frames(L, R, blocks)).estimate;
            break;
        }
        case EstimatorKind::ExternalDemix: {
            const DemixingMatrices d = demixing_from_json(read_text_file(o.demix));
            if (d.dft_len != a.dft_len)
                throw ConfigError("demixing file has dft_len " + std::to_string(d.dft_len) + ", analysis uses " +
                                  std::to_string(a.dft_len));
            run.manifest().arguments.insert(run.manifest().arguments.end(),
                                            {"--demix", fs::absolute(o.demix).string()});
            file.estimate = rtf_from_demixing(d);
            const TimeSignal right_delayed(delay_signal(rec.right().samples(), d.delay), rec.rate());
            file.coherence =
                coherence_scores(apply_demixing(d, L, stft(right_delayed, a.dft_len, a.hop, a.window)), a.dft_len);
            break;
        }
    }
    file.kurtosis = kurtosis_scores(L);
    run.text("estimate.json", estimate_to_json(file));
    const fs::path m = run.finish();

    const Index valid = file.estimate.valid_interior().size();
    out << estimator_name(kind) << ": " << valid << " of " << a.dft_len / 2 - 1 << " interior bins valid\nmanifest "
        << m.string() << "\n";
    return kOk;
}

struct ReconstructOpts {
    CommonOpts common;
    std::string estimate;
    std::string rule = "kurtosis";
    std::string mode = "percentage";
    double percentage = 50.0;
    double beta = 0.0;
    std::string truth;
    bool trace = false;
};

int cmd_reconstruct(const ReconstructOpts& o, std::ostream& out) {
    const bool baseline = o.rule == "none";
    std::optional<SelectionRule> rule;
    SelectionMode mode;
    try {
        if (!baseline) rule = parse_rule(o.rule);
        mode = parse_mode(o.mode);
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
    if (rule == SelectionRule::Oracle && o.truth.empty())
        throw UsageError("--rule oracle requires the truth sidecar (--truth FILE)");

    const EstimateFile est = estimate_from_json(read_text_file(o.estimate));
    const Index m = est.estimate.dft_len;

    WeightProfileParams wp;
    SolverConfig solver;
    std::optional<ScenarioSpec> spec;
    if (!o.common.config.empty()) {
        spec = load_spec(o.common.config, o.common.seed);
        wp = spec->weights;
        solver = spec->solver;
    }
    wp.delay = est.delay;
    wp.length = m;

    Run run("reconstruct", o.common.out);
    run.manifest().config_path = o.common.config.empty() ? "" : fs::absolute(o.common.config).string();
    run.manifest().seed = spec ? spec->seed : 0;
    run.manifest().resolved = spec ? dump_scenario(*spec) : "";
    run.manifest().arguments = {"--estimate", fs::absolute(o.estimate).string(), "--rule", o.rule, "--mode", o.mode,
                                "--percentage", fmt("%.17g", o.percentage), "--beta", fmt("%.17g", o.beta)};

    FilterFile filter;
    filter.dft_len = m;
    if (baseline) {
        filter.filter = filter_from_rtf(est.estimate, est.delay);
        filter.method = std::string(estimator_name(est.estimate.source));
        filter.percentage = 100.0;
        out << "baseline filter, " << m << " taps\n";
    } else {
        std::vector<BinScore> scores;
        switch (*rule) {
            case SelectionRule::Oracle: {
                const TruthSidecar t = truth_from_json(read_text_file(o.truth));
                if (t.dft_len != m) throw DimensionError("truth sidecar dft_len differs from the estimate");
                scores = t.oracle_snr;
                run.manifest().arguments.insert(run.manifest().arguments.end(),
                                                {"--truth", fs::absolute(o.truth).string()});
                break;
            }
            case SelectionRule::Kurtosis:
                if (!est.kurtosis) throw InvalidArgument("estimate file carries no kurtosis scores");
                scores = *est.kurtosis;
                break;
            case SelectionRule::Coherence:
                if (!est.coherence) throw InvalidArgument("coherence selection needs an external-demix estimate");
                scores = *est.coherence;
                break;
        }
        mask_invalid(scores, est.estimate);
        const SelectionConfig sel{*rule, mode, o.beta, o.percentage};
        const FrequencyBinSet bins = select_bins(scores, sel, m);
        if (bins.empty()) throw InvalidArgument("selection is empty: no bin passes the threshold");

        std::vector<TraceRow> trace;
        filter.filter = reconstruct_rtf(est.estimate, bins, wp, solver, &trace);
        filter.method = std::string(estimator_name(est.estimate.source)) + "+" + std::string(rule_name(*rule));
        filter.percentage = mode == SelectionMode::Percentage
                                ? o.percentage
                                : 100.0 * static_cast<double>(bins.size()) /
                                      static_cast<double>(est.estimate.valid_interior().size());
        if (o.trace) {
            std::ostringstream ss;
            write_trace_csv(ss, trace);
            run.text("trace.csv", ss.str());
        }
        out << bins.size() << " bins selected, " << trace.back().iter << " iterations, "
            << (filter.filter.taps.array() != 0.0).count() << " nonzero taps\n";
    }
    run.text("filter.json", filter_to_json(filter));
    out << "manifest " << run.finish().string() << "\n";
    return kOk;
}

struct EvaluateOpts {
    CommonOpts common;
    std::vector<std::string> filters;
};

int cmd_evaluate(const EvaluateOpts& o, std::ostream& out) {
    const ScenarioSpec spec = load_spec(o.common.config, o.common.seed);
    const Scenario sc = mix_at_snr(spec);
    const auto interval = static_cast<Index>(std::llround(spec.trials.interval_s * spec.sample_rate));
    const auto trials = split_trials(sc.mixture.size(), interval, spec.trials.overlap);

    Run run("evaluate", o.common.out);
    run.manifest().config_path = fs::absolute(o.common.config).string();
    run.manifest().seed = spec.seed;
    run.manifest().resolved = dump_scenario(spec);

    std::vector<TrialResult> rows;
    Index failures = 0;
    for (const auto& path : o.filters) {
        const FilterFile f = filter_from_json(read_text_file(path));
        run.manifest().arguments.insert(run.manifest().arguments.end(), {"--filter", fs::absolute(path).string()});
        const std::string label = f.method.empty() ? fs::path(path).stem().string() : f.method;
        for (std::size_t t = 0; t < trials.size(); ++t) {
            TrialResult r;
            r.trial = static_cast<Index>(t);
            r.method = label;
            r.percentage = f.percentage;
            try {
                r.snr_in_db = snr_in_db(sc.truth, trials[t]);
                r.snr_out_db = snr_out_db(f.filter, sc.truth, trials[t]);
                r.attenuation_db = r.snr_out_db - r.snr_in_db;
            } catch (const Error& e) {
                r.ok = false;
                r.error = e.what();
                ++failures;
            }
            rows.push_back(std::move(r));
        }
        const double whole = snr_out_db(f.filter, sc.truth) - snr_in_db(sc.truth);
        out << label << ": attenuation over the whole signal " << fmt("%.3f", whole) << " dB\n";
    }
    sort_results(rows);
    auto means = summarize(rows);
    rows.insert(rows.end(), means.begin(), means.end());
    std::ostringstream csv;
    write_results_csv(csv, rows);
    run.text("results.csv", csv.str());
    run.text("results.json", results_to_json(rows));
    out << "manifest " << run.finish().string() << "\n";
    return failures > 0 ? kPartial : kOk;
}

struct SweepOpts {
    CommonOpts common;
    std::string axis = "percentage";
    std::string grid;
    std::string methods = kDefaultMethods;
    std::string percentages;
    int jobs = 1;
    std::string from_manifest;
};

int cmd_sweep(SweepOpts o, std::ostream& out, std::ostream& err) {
    ScenarioSpec spec;
    std::string config_path;
    if (!o.from_manifest.empty()) {
        // Everything but --out and --jobs comes from the manifest.
        const RunManifest m = manifest_from_json(read_text_file(o.from_manifest));
        if (m.command != "sweep") throw UsageError(o.from_manifest + " is not a sweep manifest");
        spec = parse_scenario(m.resolved, "/");
        config_path = m.config_path;
        for (std::size_t i = 0; i + 1 < m.arguments.size(); i += 2) {
            const std::string& k = m.arguments[i];
            const std::string& v = m.arguments[i + 1];
            if (k == "--axis") o.axis = v;
            else if (k == "--grid") o.grid = v;
            else if (k == "--method") o.methods = v;
            else if (k == "--percentage") o.percentages = v;
            else throw IoError("manifest: unexpected argument " + k);
        }
        if (o.common.out.empty()) o.common.out = fs::path(o.from_manifest).parent_path().string();
    } else {
        if (o.common.config.empty()) throw UsageError("need --config or --from-manifest");
        spec = load_spec(o.common.config, o.common.seed);
        config_path = fs::absolute(o.common.config).string();
    }

    SweepAxis axis;
    std::vector<GridPoint> grid;
    SweepConfig cfg;
    try {
        axis = parse_axis(o.axis);
        cfg.methods = parse_methods(o.methods);
        if (axis == SweepAxis::Percentage) {
            if (o.grid.empty()) o.grid = o.percentages.empty() ? kDefaultPercentages : o.percentages;
            o.percentages = o.grid;
        } else {
            if (o.grid.empty()) throw InvalidArgument("--axis " + o.axis + " needs --grid");
            if (o.percentages.empty()) o.percentages = "50";
        }
        grid = parse_grid(axis, o.grid);
        cfg.percentages = parse_number_list(o.percentages);
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
    if (o.jobs < 1) throw UsageError("--jobs must be >= 1");
    cfg.jobs = o.jobs;

    const SweepOutcome res = run_sweep(spec, grid, cfg);

    Run run("sweep", o.common.out);
    run.manifest().config_path = config_path;
    run.manifest().seed = spec.seed;
    run.manifest().resolved = dump_scenario(spec);
    run.manifest().arguments = {"--axis", o.axis, "--grid", o.grid, "--method", o.methods, "--percentage",
                                o.percentages};
    std::ostringstream csv;
    write_results_csv(csv, res.rows);
    run.text("results.csv", csv.str());
    run.text("results.json", results_to_json(res.rows));
    const fs::path m = run.finish();

    for (const auto& r : res.rows)
        if (r.trial < 0 && r.ok)
            out << r.grid_point << ' ' << r.method << ' ' << fmt("%g", r.percentage) << "%: "
                << fmt("%.2f", r.attenuation_db) << " dB\n";
    out << "manifest " << m.string() << "\n";
    if (res.failures > 0) {
        err << "warning: " << res.failures << " cells failed; see the status column\n";
        return kPartial;
    }
    return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sparse reconstruction of relative transfer functions from incomplete estimates", "rtfcs"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kArtifactVersion);

    CommonOpts scen;
    auto* s_scen = app.add_subcommand("scenario", "build a scenario: mixture, images and truth sidecar");
    add_common(s_scen, scen, true);

    EstimateOpts est;
    auto* s_est = app.add_subcommand("estimate", "estimate the RTF per frequency bin");
    add_common(s_est, est.common, false);
    s_est->add_option("--method", est.method, "ls | fd | nsfd | external-demix")->required();
    s_est->add_option("--input", est.input, "stereo WAV mixture (default: build from --config)");
    s_est->add_option("--demix", est.demix, "demixing matrices (JSON) for external-demix");

    ReconstructOpts rec;
    auto* s_rec = app.add_subcommand("reconstruct", "select bins and reconstruct a sparse filter");
    add_common(s_rec, rec.common, false);
    s_rec->add_option("--estimate", rec.estimate, "estimate file")->required();
    s_rec->add_option("--rule", rec.rule, "oracle | kurtosis | coherence | none")->capture_default_str();
    s_rec->add_option("--mode", rec.mode, "threshold | percentage")->capture_default_str();
    s_rec->add_option("--percentage", rec.percentage, "percentage of valid bins")->capture_default_str();
    s_rec->add_option("--beta", rec.beta, "score threshold")->capture_default_str();
    s_rec->add_option("--truth", rec.truth, "truth sidecar (oracle rule)");
    s_rec->add_flag("--trace", rec.trace, "write the solver trace as trace.csv");

    EvaluateOpts ev;
    auto* s_ev = app.add_subcommand("evaluate", "evaluate filters on the scenario trials");
    add_common(s_ev, ev.common, true);
    s_ev->add_option("--filter", ev.filters, "filter file(s)")->required();

    SweepOpts sw;
    auto* s_sw = app.add_subcommand("sweep", "run a parameter sweep over trials");
    add_common(s_sw, sw.common, false);
    s_sw->add_option("--axis", sw.axis, "percentage | snr | length | decay | mixed")->capture_default_str();
    s_sw->add_option("--grid", sw.grid, "comma list; mixed: snr=..,length=..,decay=..;...");
    s_sw->add_option("--method", sw.methods, "comma list of methods")->capture_default_str();
    s_sw->add_option("--percentage", sw.percentages, "comma list of percentages (non-percentage axes)");
    s_sw->add_option("--jobs", sw.jobs, "worker threads")->capture_default_str();
    s_sw->add_option("--from-manifest", sw.from_manifest, "rerun the sweep recorded in a manifest");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kOk : kUsage;
    }

    try {
        if (s_scen->parsed()) return cmd_scenario(scen, out);
        if (s_est->parsed()) return cmd_estimate(est, out);
        if (s_rec->parsed()) return cmd_reconstruct(rec, out);
        if (s_ev->parsed()) return cmd_evaluate(ev, out);
        if (s_sw->parsed()) return cmd_sweep(sw, out, err);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << "\n";
        return kNumeric;
    } catch (const DimensionError& e) {
        err << "dimension error: " << e.what() << "\n";
        return kNumeric;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << "\n";
        return kIo;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kUsage;
}

}  // namespace rtfcs::cli
