#include "rtfcs/sweep.hpp"

#include "rtfcs/error.hpp"
#include "rtfcs/sparse.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

namespace rtfcs {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t at = 0;
    while (true) {
        const auto next = s.find(sep, at);
        out.push_back(trim(s.substr(at, next == std::string_view::npos ? std::string_view::npos : next - at)));
        if (next == std::string_view::npos) break;
        at = next + 1;
    }
    return out;
}

double parse_double(std::string_view s) {
    double v = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v))
        throw InvalidArgument("not a number: \"" + std::string(s) + "\"");
    return v;
}

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace

std::string MethodSpec::tag() const {
    std::string t(estimator_name(estimator));
    if (rule) t += "+" + std::string(rule_name(*rule));
    return t;
}

MethodSpec parse_method(std::string_view tag) {
    const auto plus = tag.find('+');
    MethodSpec m;
    m.estimator = parse_estimator(trim(tag.substr(0, plus)));
    if (m.estimator == EstimatorKind::ExternalDemix)
        throw InvalidArgument("method \"" + std::string(tag) + "\": external-demix needs a demixing file");
    if (plus != std::string_view::npos) {
        m.rule = parse_rule(trim(tag.substr(plus + 1)));
        if (*m.rule == SelectionRule::Coherence)
            throw InvalidArgument("method \"" + std::string(tag) + "\": coherence needs external demixing");
    }
    return m;
}

std::vector<MethodSpec> parse_methods(std::string_view comma_list) {
    std::vector<MethodSpec> out;
    for (auto part : split(comma_list, ','))
        if (!part.empty()) out.push_back(parse_method(part));
    if (out.empty()) throw InvalidArgument("no methods given");
    return out;
}

std::vector<double> parse_number_list(std::string_view comma_list) {
    std::vector<double> out;
    for (auto part : split(comma_list, ','))
        if (!part.empty()) out.push_back(parse_double(part));
    if (out.empty()) throw InvalidArgument("empty list");
    return out;
}

std::string_view axis_name(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::Percentage: return "percentage";
        case SweepAxis::Snr: return "snr";
        case SweepAxis::Length: return "length";
        case SweepAxis::Decay: return "decay";
        case SweepAxis::Mixed: return "mixed";
    }
    return "";
}

SweepAxis parse_axis(std::string_view name) {
    for (auto a : {SweepAxis::Percentage, SweepAxis::Snr, SweepAxis::Length, SweepAxis::Decay, SweepAxis::Mixed})
        if (axis_name(a) == name) return a;
    throw InvalidArgument("unknown sweep axis \"" + std::string(name) + "\"");
}

std::vector<GridPoint> parse_grid(SweepAxis axis, std::string_view grid) {
    std::vector<GridPoint> out;
    if (axis == SweepAxis::Percentage) return {GridPoint{"base", {}, {}, {}}};
    if (axis == SweepAxis::Mixed) {
        for (auto point : split(grid, ';')) {
            if (point.empty()) continue;
            GridPoint g;
            g.label = std::string(point);
            for (auto kv : split(point, ',')) {
                const auto eq = kv.find('=');
                if (eq == std::string_view::npos) throw InvalidArgument("grid entry \"" + std::string(kv) + "\" lacks '='");
                const auto key = trim(kv.substr(0, eq));
                const double v = parse_double(trim(kv.substr(eq + 1)));
                if (key == "snr") g.snr_in_db = v;
                else if (key == "length") g.interval_s = v;
                else if (key == "decay") g.decay_rate = v;
                else throw InvalidArgument("unknown grid key \"" + std::string(key) + "\"");
            }
            out.push_back(std::move(g));
        }
    } else {
        for (double v : parse_number_list(grid)) {
            GridPoint g;
            g.label = std::string(axis_name(axis)) + "=" + format_value(v);
            if (axis == SweepAxis::Snr) g.snr_in_db = v;
            if (axis == SweepAxis::Length) g.interval_s = v;
            if (axis == SweepAxis::Decay) g.decay_rate = v;
            out.push_back(std::move(g));
        }
    }
    if (out.empty()) throw InvalidArgument("sweep grid is empty");
    return out;
}

ScenarioSpec apply_grid_point(const ScenarioSpec& base, const GridPoint& point) {
    ScenarioSpec s = base;
    if (point.snr_in_db) s.snr_in_db = *point.snr_in_db;
    if (point.interval_s) {
        if (!(*point.interval_s > 0.0)) throw ConfigError("grid " + point.label + ": length must be positive");
        s.trials.interval_s = *point.interval_s;
    }
    if (point.decay_rate) {
        if (!(*point.decay_rate > 0.0)) throw ConfigError("grid " + point.label + ": decay must be positive");
        bool any = false;
        if (s.target.rir) {
            for (RirSpec* r : {&s.target.rir->left, &s.target.rir->right})
                if (r->kind == RirKind::Synthetic) {
                    r->synthetic.decay_rate = *point.decay_rate;
                    any = true;
                }
        }
        if (!any) throw ConfigError("grid " + point.label + ": decay sweeps need synthetic target RIRs");
    }
    return s;
}

namespace {

struct Estimated {
    std::optional<RtfEstimate> est;
    std::string error;
};

RtfEstimate run_estimator(EstimatorKind kind, const StereoRecording& seg, const Spectrogram& L, const Spectrogram& R,
                          const AnalysisConfig& a) {
    switch (kind) {
        case EstimatorKind::Fd: return estimate_fd(L, R);
        case EstimatorKind::Nsfd: {
            const Index blocks = nsfd_block_count(L.frames(), a.hop, a.nsfd_block_samples);
            return estimate_nsfd(compute_psd_frames(L, R, blocks)).estimate;
        }
        case EstimatorKind::TimeLs:
            return rtf_from_filter(estimate_ls_time(seg, a.dft_len, a.delay), a.dft_len, EstimatorKind::TimeLs);
        case EstimatorKind::ExternalDemix: break;
    }
    throw InvalidArgument("estimator not available in sweeps");
}

}  // namespace

std::vector<TrialResult> run_trial(const Scenario& scenario, const ScenarioSpec& spec, const TrialWindow& window,
                                   Index trial, const std::string& grid_label, const SweepConfig& cfg) {
    std::vector<TrialResult> rows;
    const auto emit = [&](const MethodSpec& m, double pct, double in, std::optional<double> out,
                          const std::string& err) {
        TrialResult r;
        r.grid_point = grid_label;
        r.trial = trial;
        r.method = m.tag();
        r.percentage = pct;
        if (out) {
            r.snr_in_db = in;
            r.snr_out_db = *out;
            r.attenuation_db = *out - in;
        } else {
            r.ok = false;
            r.error = err;
        }
        rows.push_back(std::move(r));
    };
    const auto fail_all = [&](const std::string& err) {
        for (const auto& m : cfg.methods)
            for (double p : cfg.percentages) emit(m, p, 0.0, std::nullopt, err);
        return rows;
    };

    const AnalysisConfig& a = spec.analysis;
    WeightProfileParams wp = spec.weights;
    wp.delay = a.delay;
    wp.length = a.dft_len;

    double snr_in = 0.0;
    Spectrogram L, R;
    StereoRecording seg;
    try {
        snr_in = snr_in_db(scenario.truth, window);
        seg = scenario.mixture.slice(window.begin, window.end);
        L = stft(seg.left(), a.dft_len, a.hop, a.window);
        R = stft(seg.right(), a.dft_len, a.hop, a.window);
    } catch (const Error& e) {
        return fail_all(e.what());
    }

    std::map<EstimatorKind, Estimated> estimates;
    for (const auto& m : cfg.methods) {
        if (estimates.count(m.estimator)) continue;
        Estimated& e = estimates[m.estimator];
        try {
            e.est = run_estimator(m.estimator, seg, L, R, a);
        } catch (const Error& ex) {
            e.error = std::string(estimator_name(m.estimator)) + ": " + ex.what();
        }
    }

    std::optional<std::vector<BinScore>> oracle, kurt;
    std::string oracle_err, kurt_err;
    const auto need = [&](SelectionRule r) {
        return std::any_of(cfg.methods.begin(), cfg.methods.end(), [&](const MethodSpec& m) { return m.rule == r; });
    };
    if (need(SelectionRule::Oracle)) {
        try {
            const Spectrogram S = stft(scenario.truth.s_left.slice(window.begin, window.end), a.dft_len, a.hop, a.window);
            const Spectrogram Y = stft(scenario.truth.y_left.slice(window.begin, window.end), a.dft_len, a.hop, a.window);
            oracle = oracle_snr(S, Y);
        } catch (const Error& e) {
            oracle_err = e.what();
        }
    }
    if (need(SelectionRule::Kurtosis)) {
        try {
            kurt = kurtosis_scores(L);
        } catch (const Error& e) {
            kurt_err = e.what();
        }
    }

    const auto evaluate = [&](const ImpulseResponse& g) { return snr_out_db(g, scenario.truth, window); };

    for (const auto& m : cfg.methods) {
        const Estimated& e = estimates.at(m.estimator);
        if (!e.est) {
            for (double p : cfg.percentages) emit(m, p, snr_in, std::nullopt, e.error);
            continue;
        }
        if (!m.rule) {
            // Baselines do not depend on the percentage.
            std::optional<double> out;
            std::string err;
            try {
                out = evaluate(filter_from_rtf(*e.est, a.delay));
            } catch (const Error& ex) {
                err = ex.what();
            }
            for (double p : cfg.percentages) emit(m, p, snr_in, out, err);
            continue;
        }
        const bool is_oracle = *m.rule == SelectionRule::Oracle;
        const auto& base_scores = is_oracle ? oracle : kurt;
        for (double p : cfg.percentages) {
            if (!base_scores) {
                emit(m, p, snr_in, std::nullopt, is_oracle ? oracle_err : kurt_err);
                continue;
            }
            try {
                std::vector<BinScore> scores = *base_scores;
                mask_invalid(scores, *e.est);
                const FrequencyBinSet bins = select_by_percentage(scores, p, rule_direction(*m.rule), a.dft_len);
                emit(m, p, snr_in, evaluate(reconstruct_rtf(*e.est, bins, wp, spec.solver)), "");
            } catch (const Error& ex) {
                emit(m, p, snr_in, std::nullopt, ex.what());
            }
        }
    }
    return rows;
}

SweepOutcome run_sweep(const ScenarioSpec& base, const std::vector<GridPoint>& grid, const SweepConfig& cfg) {
    if (grid.empty()) throw InvalidArgument("sweep grid is empty");
    if (cfg.methods.empty()) throw InvalidArgument("no methods given");
    if (cfg.percentages.empty()) throw InvalidArgument("no percentages given");
    for (double p : cfg.percentages)
        if (!(p > 0.0 && p <= 100.0)) throw InvalidArgument("percentage " + format_value(p) + " outside (0, 100]");

    struct Point {
        ScenarioSpec spec;
        Scenario scenario;
        std::vector<TrialWindow> trials;
    };
    std::vector<Point> points;
    for (const auto& g : grid) {
        Point p;
        p.spec = apply_grid_point(base, g);
        p.scenario = mix_at_snr(p.spec);
        const auto interval = static_cast<Index>(std::llround(p.spec.trials.interval_s * p.spec.sample_rate));
        p.trials = split_trials(p.scenario.mixture.size(), interval, p.spec.trials.overlap);
        points.push_back(std::move(p));
    }

    std::vector<std::pair<std::size_t, std::size_t>> tasks;
    for (std::size_t g = 0; g < points.size(); ++g)
        for (std::size_t t = 0; t < points[g].trials.size(); ++t) tasks.emplace_back(g, t);

    std::vector<std::vector<TrialResult>> results(tasks.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr fatal;
    std::mutex fatal_mu;
    const auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            const auto [g, t] = tasks[i];
            try {
                results[i] = run_trial(points[g].scenario, points[g].spec, points[g].trials[t],
                                       static_cast<Index>(t), grid[g].label, cfg);
            } catch (...) {
                std::lock_guard lock(fatal_mu);
                if (!fatal) fatal = std::current_exception();
            }
        }
    };
    const int jobs = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(tasks.size())));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }
    if (fatal) std::rethrow_exception(fatal);

    SweepOutcome out;
    for (auto& r : results)
        for (auto& row : r) {
            if (!row.ok) ++out.failures;
            out.rows.push_back(std::move(row));
        }
    auto means = summarize(out.rows);
    sort_results(out.rows);
    out.rows.insert(out.rows.end(), means.begin(), means.end());
    // Grid points in the order given; trial rows, then the means.
    std::map<std::string, std::size_t> order;
    for (std::size_t g = 0; g < grid.size(); ++g) order.emplace(grid[g].label, g);
    std::stable_sort(out.rows.begin(), out.rows.end(), [&](const TrialResult& a, const TrialResult& b) {
        const auto ga = order.at(a.grid_point), gb = order.at(b.grid_point);
        if (ga != gb) return ga < gb;
        return (a.trial < 0) < (b.trial < 0);
    });
    return out;
}

}  // namespace rtfcs
