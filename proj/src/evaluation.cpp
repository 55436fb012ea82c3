#include "rtfcs/evaluation.hpp"

#include "rtfcs/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

namespace rtfcs {

TimeSignal blocking_output(const ImpulseResponse& g, const StereoRecording& rec) {
    const RealVector filtered = convolve(g.taps, rec.left().samples(), ConvolutionMode::Truncated);
    return TimeSignal(filtered - delay_signal(rec.right().samples(), g.delay), rec.rate());
}

namespace {

TrialWindow resolve(const ScenarioTruth& truth, std::optional<TrialWindow> window) {
    const TrialWindow w = window.value_or(TrialWindow{0, truth.size()});
    if (w.begin < 0 || w.end > truth.size() || w.begin >= w.end)
        throw DimensionError("evaluation window outside the signal");
    if (truth.s_right.size() != truth.size() || truth.y_left.size() != truth.size() ||
        truth.y_right.size() != truth.size())
        throw DimensionError("scenario truth components differ in length");
    return w;
}

double energy(const RealVector& x, const TrialWindow& w) { return x.segment(w.begin, w.size()).squaredNorm(); }

// (g * a)(n) - b(n - D) for n in the window.
RealVector cancel(const ImpulseResponse& g, const RealVector& a, const RealVector& b, const TrialWindow& w) {
    RealVector out = convolve_window(g.taps, a, w.begin, w.end);
    for (Index n = w.begin; n < w.end; ++n) {
        const Index src = n - g.delay;
        if (src >= 0 && src < b.size()) out(n - w.begin) -= b(src);
    }
    return out;
}

}  // namespace

double snr_in_db(const ScenarioTruth& truth, std::optional<TrialWindow> window) {
    const TrialWindow w = resolve(truth, window);
    const double target = energy(truth.s_left.samples(), w) + energy(truth.s_right.samples(), w);
    const double noise = energy(truth.y_left.samples(), w) + energy(truth.y_right.samples(), w);
    if (!(noise > 0.0)) throw InvalidArgument("snr_in: noise energy is zero");
    if (target == 0.0) return -std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(target / noise);
}

double snr_out_db(const ImpulseResponse& g, const ScenarioTruth& truth, std::optional<TrialWindow> window) {
    const TrialWindow w = resolve(truth, window);
    if (g.size() == 0) throw InvalidArgument("snr_out: empty filter");
    const double leak = cancel(g, truth.s_left.samples(), truth.s_right.samples(), w).squaredNorm();
    const double noise = cancel(g, truth.y_left.samples(), truth.y_right.samples(), w).squaredNorm();
    if (!(noise > 0.0)) throw InvalidArgument("snr_out: noise reference energy is zero");
    if (leak == 0.0) return kLeakageFloorDb;
    return std::max(kLeakageFloorDb, 10.0 * std::log10(leak / noise));
}

std::vector<TrialWindow> split_trials(Index n, Index interval, double overlap) {
    if (interval < 1) throw InvalidArgument("split_trials: interval must be >= 1");
    if (interval > n) throw InvalidArgument("split_trials: interval longer than the data");
    if (!(overlap >= 0.0 && overlap < 1.0)) throw InvalidArgument("split_trials: overlap must lie in [0, 1)");
    const Index step = std::max<Index>(1, std::llround(static_cast<double>(interval) * (1.0 - overlap)));
    std::vector<TrialWindow> out;
    for (Index b = 0; b + interval <= n; b += step) out.push_back({b, b + interval});
    return out;
}

std::vector<TrialResult> summarize(const std::vector<TrialResult>& rows) {
    struct Acc {
        double in = 0.0, out = 0.0, att = 0.0;
        int count = 0;
    };
    std::map<std::tuple<std::string, std::string, double>, Acc> groups;
    for (const auto& r : rows) {
        if (r.trial < 0) continue;
        Acc& a = groups[{r.grid_point, r.method, r.percentage}];
        if (!r.ok) continue;
        a.in += r.snr_in_db;
        a.out += r.snr_out_db;
        a.att += r.attenuation_db;
        ++a.count;
    }
    std::vector<TrialResult> out;
    for (const auto& [key, a] : groups) {
        TrialResult s;
        s.grid_point = std::get<0>(key);
        s.trial = -1;
        s.method = std::get<1>(key);
        s.percentage = std::get<2>(key);
        if (a.count == 0) {
            s.ok = false;
            s.error = "no successful trials";
        } else {
            s.snr_in_db = a.in / a.count;
            s.snr_out_db = a.out / a.count;
            s.attenuation_db = a.att / a.count;
        }
        out.push_back(std::move(s));
    }
    return out;
}

void sort_results(std::vector<TrialResult>& rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const TrialResult& a, const TrialResult& b) {
        return std::tie(a.grid_point, a.trial, a.method, a.percentage) <
               std::tie(b.grid_point, b.trial, b.method, b.percentage);
    });
}

}  // namespace rtfcs
