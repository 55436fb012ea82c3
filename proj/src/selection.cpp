#include "rtfcs/selection.hpp"

#include "rtfcs/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace rtfcs {

std::string_view rule_name(SelectionRule rule) {
    switch (rule) {
        case SelectionRule::Oracle: return "oracle";
        case SelectionRule::Kurtosis: return "kurtosis";
        case SelectionRule::Coherence: return "coherence";
    }
    return "unknown";
}

SelectionRule parse_rule(std::string_view name) {
    if (name == "oracle") return SelectionRule::Oracle;
    if (name == "kurtosis") return SelectionRule::Kurtosis;
    if (name == "coherence") return SelectionRule::Coherence;
    throw InvalidArgument("unknown selection rule '" + std::string(name) + "'");
}

std::string_view mode_name(SelectionMode mode) {
    return mode == SelectionMode::Threshold ? "threshold" : "percentage";
}

SelectionMode parse_mode(std::string_view name) {
    if (name == "threshold") return SelectionMode::Threshold;
    if (name == "percentage") return SelectionMode::Percentage;
    throw InvalidArgument("unknown selection mode '" + std::string(name) + "'");
}

Direction rule_direction(SelectionRule rule) {
    return rule == SelectionRule::Coherence ? Direction::Less : Direction::Greater;
}

std::vector<BinScore> oracle_snr(const Spectrogram& target_left, const Spectrogram& noise_left) {
    if (target_left.dft_len != noise_left.dft_len || target_left.frames() != noise_left.frames())
        throw DimensionError("oracle_snr: spectrogram shapes differ");
    std::vector<BinScore> out;
    for (Index k = 1; k <= target_left.dft_len / 2 - 1; ++k) {
        const double s = target_left.values.row(k).cwiseAbs2().sum();
        const double y = noise_left.values.row(k).cwiseAbs2().sum();
        double score = 0.0;
        if (s > 0.0) score = y > 0.0 ? s / y : std::numeric_limits<double>::infinity();
        out.push_back({k, score, true});
    }
    return out;
}

double kurtosis(const ComplexVector& x) {
    if (x.size() < 4) throw InvalidArgument("kurtosis: at least 4 samples are required");
    const auto n = static_cast<double>(x.size());
    const double m2 = x.cwiseAbs2().sum() / n;
    if (!(m2 > 0.0)) throw InvalidArgument("kurtosis: undefined for zero-power input");
    const double m4 = x.cwiseAbs2().cwiseAbs2().sum() / n;
    const std::complex<double> c2 = x.cwiseProduct(x).sum() / n;
    return (m4 - std::norm(c2)) / (m2 * m2) - 2.0;
}

std::vector<BinScore> kurtosis_scores(const Spectrogram& left) {
    std::vector<BinScore> out;
    for (Index k = 1; k <= left.dft_len / 2 - 1; ++k) {
        const ComplexVector row = left.values.row(k).transpose();
        BinScore s{k, 0.0, false};
        if (row.size() >= 4 && row.cwiseAbs2().sum() > 0.0) {
            s.score = kurtosis(row);
            s.valid = std::isfinite(s.score);
        }
        out.push_back(s);
    }
    return out;
}

double coherence(const ComplexVector& y1, const ComplexVector& y2) {
    if (y1.size() != y2.size() || y1.size() < 1) throw DimensionError("coherence: lengths must match and be >= 1");
    const double e1 = y1.norm();
    const double e2 = y2.norm();
    if (!(e1 > 0.0) || !(e2 > 0.0)) throw InvalidArgument("coherence: zero-energy input");
    const double c = std::abs(y1.cwiseProduct(y2.conjugate()).sum()) / (e1 * e2);
    // Proportional inputs reach Cauchy-Schwarz equality; rounding leaves a few ulps.
    if (c >= 1.0 - 64.0 * std::numeric_limits<double>::epsilon()) return 1.0;
    return c;
}

std::vector<BinScore> coherence_scores(const SeparatedSignals& y, Index dft_len) {
    std::vector<BinScore> out;
    for (Index k = 1; k <= dft_len / 2 - 1; ++k) {
        const ComplexVector a = y.first.row(k).transpose();
        const ComplexVector b = y.second.row(k).transpose();
        BinScore s{k, 0.0, false};
        if (a.norm() > 0.0 && b.norm() > 0.0) {
            s.score = coherence(a, b);
            s.valid = true;
        }
        out.push_back(s);
    }
    return out;
}

void mask_invalid(std::vector<BinScore>& scores, const RtfEstimate& est) {
    for (auto& s : scores)
        if (s.bin < 0 || s.bin >= est.bins() || !est.is_valid(s.bin)) s.valid = false;
}

namespace {

bool usable(const BinScore& s, Index dft_len) {
    return s.valid && !std::isnan(s.score) && s.bin >= 1 && s.bin <= dft_len / 2 - 1;
}

FrequencyBinSet to_set(std::vector<Index> bins, Index dft_len) {
    std::sort(bins.begin(), bins.end());
    bins.erase(std::unique(bins.begin(), bins.end()), bins.end());
    return {dft_len, std::move(bins)};
}

}  // namespace

FrequencyBinSet select_by_threshold(const std::vector<BinScore>& scores, double beta, Direction dir,
                                    Index dft_len) {
    std::vector<Index> bins;
    for (const auto& s : scores) {
        if (!usable(s, dft_len)) continue;
        if (dir == Direction::Greater ? s.score > beta : s.score < beta) bins.push_back(s.bin);
    }
    return to_set(std::move(bins), dft_len);
}

FrequencyBinSet select_by_percentage(const std::vector<BinScore>& scores, double percentage, Direction dir,
                                     Index dft_len) {
    if (!(percentage > 0.0 && percentage <= 100.0))
        throw InvalidArgument("select_by_percentage: percentage must lie in (0, 100]");
    std::vector<BinScore> pool;
    for (const auto& s : scores)
        if (usable(s, dft_len)) pool.push_back(s);
    if (pool.empty()) throw InvalidArgument("select_by_percentage: no valid bins");

    std::stable_sort(pool.begin(), pool.end(), [dir](const BinScore& a, const BinScore& b) {
        if (a.score != b.score) return dir == Direction::Greater ? a.score > b.score : a.score < b.score;
        return a.bin < b.bin;
    });
    const auto n = static_cast<double>(pool.size());
    auto count = static_cast<std::size_t>(std::ceil(percentage / 100.0 * n - 1e-9));
    count = std::clamp<std::size_t>(count, 1, pool.size());

    std::vector<Index> bins;
    for (std::size_t j = 0; j < count; ++j) bins.push_back(pool[j].bin);
    return to_set(std::move(bins), dft_len);
}

FrequencyBinSet select_bins(const std::vector<BinScore>& scores, const SelectionConfig& cfg, Index dft_len) {
    const Direction dir = rule_direction(cfg.rule);
    if (cfg.mode == SelectionMode::Threshold) return select_by_threshold(scores, cfg.beta, dir, dft_len);
    return select_by_percentage(scores, cfg.percentage, dir, dft_len);
}

}  // namespace rtfcs
