#pragma once

#include "rtfcs/signal.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rtfcs {

// Microphone images of the target (s) and of the summed noise (y).
// The observed mixture is x_L = s_L + y_L, x_R = s_R + y_R.
struct ScenarioTruth {
    TimeSignal s_left;
    TimeSignal s_right;
    TimeSignal y_left;
    TimeSignal y_right;
    std::optional<ImpulseResponse> h_rel;

    Index size() const { return s_left.size(); }
};

// Half-open sample range [begin, end).
struct TrialWindow {
    Index begin = 0;
    Index end = 0;

    Index size() const { return end - begin; }
    bool operator==(const TrialWindow&) const = default;
};

// Reported value for vanishing target leakage.
inline constexpr double kLeakageFloorDb = -120.0;

// z = g * x_L - x_R(n - D), with D = g.delay. The convolution is the full
// linear one truncated to the recording length.
TimeSignal blocking_output(const ImpulseResponse& g, const StereoRecording& rec);

// 10 log10 of summed target energy over summed noise energy on both
// channels, over `window` (whole signal when absent). Returns -inf for a
// silent target; throws InvalidArgument when the noise is silent.
double snr_in_db(const ScenarioTruth& truth, std::optional<TrialWindow> window = std::nullopt);

// 10 log10 of leakage energy (g * s_L - s_R(n - D)) over noise-reference
// energy (g * y_L - y_R(n - D)) inside `window`. Convolutions run over the
// whole signal and are then cut to the window, so samples preceding the
// window contribute their tails. Values below kLeakageFloorDb are clamped.
double snr_out_db(const ImpulseResponse& g, const ScenarioTruth& truth,
                  std::optional<TrialWindow> window = std::nullopt);

// Windows of `interval` samples starting every round(interval * (1 - overlap))
// samples, as many as fit in n.
std::vector<TrialWindow> split_trials(Index n, Index interval, double overlap);

struct TrialResult {
    std::string grid_point;  // sweep grid label; empty outside sweeps
    Index trial = 0;         // -1 for summary (mean) rows
    std::string method;
    double percentage = 100.0;
    double snr_in_db = 0.0;
    double snr_out_db = 0.0;
    double attenuation_db = 0.0;
    bool ok = true;
    std::string error;
};

// Per (grid_point, method, percentage) mean over successful trials, in dB.
std::vector<TrialResult> summarize(const std::vector<TrialResult>& rows);

// Sort by grid point, trial, method, percentage.
void sort_results(std::vector<TrialResult>& rows);

}  // namespace rtfcs
