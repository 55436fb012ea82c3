#pragma once

#include "rtfcs/estimators.hpp"
#include "rtfcs/evaluation.hpp"
#include "rtfcs/selection.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace rtfcs {

inline constexpr const char* kArtifactVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

// Convention tags written into every estimate and filter file.
inline constexpr const char* kDftSignTag = "exp(-i*2*pi*k*n/M)";
inline constexpr const char* kDelayTag = "filter(n) ~ h_rel(n - D); H(k) = H_R/H_L without delay factor";

struct EstimateFile {
    RtfEstimate estimate;
    Index delay = 0;  // D the downstream filter will be referenced to
    std::optional<std::vector<BinScore>> kurtosis;
    std::optional<std::vector<BinScore>> coherence;
};

struct FilterFile {
    ImpulseResponse filter;
    Index dft_len = 0;
    std::string method;
    double percentage = 100.0;  // selection percentage; 100 for baselines
};

// Per-bin oracle SNR of the left channel plus, when available, the true
// relative impulse response.
struct TruthSidecar {
    Index dft_len = 0;
    std::vector<BinScore> oracle_snr;
    std::optional<ImpulseResponse> h_rel;
};

std::string estimate_to_json(const EstimateFile& f);
EstimateFile estimate_from_json(const std::string& text);

std::string filter_to_json(const FilterFile& f);
FilterFile filter_from_json(const std::string& text);

std::string truth_to_json(const TruthSidecar& t);
TruthSidecar truth_from_json(const std::string& text);

// Keys dft_len, delay and W11, W12, W21, W22: arrays over bins 0..M/2 of
// [re, im] pairs.
std::string demixing_to_json(const DemixingMatrices& d);
DemixingMatrices demixing_from_json(const std::string& text);

// Columns grid_point,trial,method,percentage,snr_in_db,snr_out_db,
// attenuation_db,status. Summary rows have trial "mean"; failed cells are
// empty and status carries the error.
void write_results_csv(std::ostream& os, const std::vector<TrialResult>& rows);
std::string results_to_json(const std::vector<TrialResult>& rows);

struct RunManifest {
    std::string command;
    std::string config_path;
    std::string resolved;  // JSON text of the resolved parameters
    std::uint64_t seed = 0;
    std::vector<std::string> arguments;
    std::vector<std::string> outputs;
    double elapsed_s = 0.0;
};

std::string manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const std::string& text);

std::string read_text_file(const std::filesystem::path& path);
// Writes through a temporary file in the same directory, then renames.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace rtfcs
