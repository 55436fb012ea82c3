#pragma once

#include "rtfcs/estimators.hpp"
#include "rtfcs/evaluation.hpp"
#include "rtfcs/scenario.hpp"
#include "rtfcs/selection.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rtfcs {

// "fd", "nsfd", "ls" run the estimator alone (baseline). "fd+oracle",
// "nsfd+kurtosis", ... add percentage selection and sparse reconstruction.
struct MethodSpec {
    EstimatorKind estimator = EstimatorKind::Fd;
    std::optional<SelectionRule> rule;

    std::string tag() const;
    bool operator==(const MethodSpec&) const = default;
};

MethodSpec parse_method(std::string_view tag);
std::vector<MethodSpec> parse_methods(std::string_view comma_list);
std::vector<double> parse_number_list(std::string_view comma_list);

enum class SweepAxis { Percentage, Snr, Length, Decay, Mixed };

std::string_view axis_name(SweepAxis axis);
SweepAxis parse_axis(std::string_view name);

// Overrides applied to the base scenario at one grid point. Decay sets the
// decay_rate of every synthetic target RIR; length sets the trial interval.
struct GridPoint {
    std::string label;
    std::optional<double> snr_in_db;
    std::optional<double> interval_s;
    std::optional<double> decay_rate;
};

// Percentage axis: one point labelled "base" (the grid lists percentages
// instead). Mixed axis: points separated by ';', each a comma list of
// snr=..., length=..., decay=... assignments.
std::vector<GridPoint> parse_grid(SweepAxis axis, std::string_view grid);

ScenarioSpec apply_grid_point(const ScenarioSpec& base, const GridPoint& point);

struct SweepConfig {
    std::vector<MethodSpec> methods;
    std::vector<double> percentages{100.0};
    int jobs = 1;
};

struct SweepOutcome {
    std::vector<TrialResult> rows;  // trial rows followed by their means, sorted
    Index failures = 0;             // failed (trial, method, percentage) cells
};

// Rows for every (method, percentage) on one trial window. Estimation and
// selection use only the window; the oracle uses the window's truth.
std::vector<TrialResult> run_trial(const Scenario& scenario, const ScenarioSpec& spec, const TrialWindow& window,
                                   Index trial, const std::string& grid_label, const SweepConfig& cfg);

SweepOutcome run_sweep(const ScenarioSpec& base, const std::vector<GridPoint>& grid, const SweepConfig& cfg);

}  // namespace rtfcs
