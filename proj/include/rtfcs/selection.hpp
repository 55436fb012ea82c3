#pragma once

#include "rtfcs/estimators.hpp"
#include "rtfcs/signal.hpp"

#include <string_view>
#include <vector>

namespace rtfcs {

enum class SelectionRule { Oracle, Kurtosis, Coherence };
enum class Direction { Greater, Less };
enum class SelectionMode { Threshold, Percentage };

std::string_view rule_name(SelectionRule rule);
SelectionRule parse_rule(std::string_view name);
std::string_view mode_name(SelectionMode mode);
SelectionMode parse_mode(std::string_view name);

// Oracle SNR and kurtosis prefer large scores, coherence prefers small ones.
Direction rule_direction(SelectionRule rule);

struct BinScore {
    Index bin = 0;
    double score = 0.0;
    bool valid = true;
};

struct SelectionConfig {
    SelectionRule rule = SelectionRule::Kurtosis;
    SelectionMode mode = SelectionMode::Percentage;
    double beta = 0.0;
    double percentage = 50.0;
};

// sum_l |S_L|^2 / sum_l |Y_L|^2 per interior bin; +inf where the noise
// energy vanishes but the target does not.
std::vector<BinScore> oracle_snr(const Spectrogram& target_left, const Spectrogram& noise_left);

// (E|X|^4 - |E X^2|^2) / (E|X|^2)^2 - 2 with sample means.
double kurtosis(const ComplexVector& samples);

// Kurtosis of each interior bin of the left-channel spectrogram across
// frames. Silent bins are marked invalid.
std::vector<BinScore> kurtosis_scores(const Spectrogram& left);

// |sum y1 conj(y2)| / (||y1|| ||y2||)
double coherence(const ComplexVector& y1, const ComplexVector& y2);

// Coherence between the two separated outputs per interior bin.
std::vector<BinScore> coherence_scores(const SeparatedSignals& separated, Index dft_len);

// Marks scores invalid where the estimate is invalid.
void mask_invalid(std::vector<BinScore>& scores, const RtfEstimate& est);

// Bins whose score passes the strict inequality; invalid bins never pass.
FrequencyBinSet select_by_threshold(const std::vector<BinScore>& scores, double beta, Direction dir,
                                    Index dft_len);

// The ceil(p/100 * #valid) best valid bins, ties broken by lower bin index.
// Throws InvalidArgument when p is outside (0, 100] or no bin is valid.
FrequencyBinSet select_by_percentage(const std::vector<BinScore>& scores, double percentage, Direction dir,
                                     Index dft_len);

FrequencyBinSet select_bins(const std::vector<BinScore>& scores, const SelectionConfig& cfg, Index dft_len);

}  // namespace rtfcs
