#pragma once

#include "rtfcs/signal.hpp"

#include <complex>
#include <string_view>
#include <vector>

namespace rtfcs {

enum class EstimatorKind { TimeLs, Fd, Nsfd, ExternalDemix };

std::string_view estimator_name(EstimatorKind kind);
EstimatorKind parse_estimator(std::string_view name);

// Per-bin RTF estimate on bins 0..M/2. Values are the plain ratio
// H_R/H_L: no delay compensation is folded in. Bins whose estimator
// hit a zero denominator or a degenerate system are marked invalid and
// hold 0.
struct RtfEstimate {
    Index dft_len = 0;
    ComplexVector values;
    std::vector<bool> valid;
    EstimatorKind source = EstimatorKind::Fd;

    Index bins() const { return values.size(); }
    bool is_valid(Index k) const { return valid.at(static_cast<std::size_t>(k)); }
    // Valid bins among 1..M/2-1.
    FrequencyBinSet valid_interior() const;
};

// Least-squares FIR fit of length filter_len from left to the right channel
// delayed by `delay` samples. Uses the first N rows of the zero-padded
// convolution matrix of the left channel, so R = X^T X / N and
// p = X^T x_R / N are accumulated without building X.
// Throws NumericError when R is singular or its condition exceeds 1e12.
ImpulseResponse estimate_ls_time(const StereoRecording& rec, Index filter_len, Index delay);

// Averaged cross-spectrum over auto-spectrum, per bin.
RtfEstimate estimate_fd(const Spectrogram& left, const Spectrogram& right);

// Sample (cross) PSDs over P contiguous frame blocks, bins 0..M/2.
struct PsdFrames {
    Eigen::MatrixXcd cross;  // (bin, block): mean of X_R conj(X_L)
    Eigen::MatrixXd left;    // (bin, block): mean of |X_L|^2
    Index blocks = 0;
    Index dft_len = 0;
};

PsdFrames compute_psd_frames(const Spectrogram& left, const Spectrogram& right, Index blocks);

// Number of blocks when each block spans `block_samples` samples of input
// (rounded up to whole STFT hops).
Index nsfd_block_count(Index frames, Index hop, Index block_samples);

struct NsfdFit {
    std::complex<double> rtf;
    std::complex<double> nuisance;  // cross PSD of the noise term with X_L
    double residual = 0.0;
    bool valid = false;
};

struct NsfdResult {
    RtfEstimate estimate;
    std::vector<NsfdFit> fits;
};

// Per bin, least-squares solve of
//   cross(k, p) = H(k) * left(k, p) + c(k),   p = 1..P.
NsfdResult estimate_nsfd(const PsdFrames& psd);

// Externally supplied 2x2 separating transforms, one per bin 0..M/2, applied
// to [X_L, X_{R,D}] where X_{R,D} is the STFT of the right channel delayed
// by D samples. Row 0 is the target-cancelling row.
struct DemixingMatrices {
    Index dft_len = 0;
    Index delay = 0;
    std::vector<Eigen::Matrix2cd> w;
};

// H = -W11 / W12, with the delay factor removed.
RtfEstimate rtf_from_demixing(const DemixingMatrices& demix);

// Outputs y = W [X_L; X_{R,D}] for bins 0..M/2, returned as (bin, frame).
struct SeparatedSignals {
    Eigen::MatrixXcd first;
    Eigen::MatrixXcd second;
};
SeparatedSignals apply_demixing(const DemixingMatrices& demix, const Spectrogram& left,
                                const Spectrogram& right_delayed);

// DFT of a (delayed) time-domain filter, with the delay factor removed.
RtfEstimate rtf_from_filter(const ImpulseResponse& h, Index dft_len, EstimatorKind source);

// Time-domain filter from the full estimate: inverse DFT of H(k) e^{-i theta_k D}
// over all bins (invalid bins contribute 0). This is the plain baseline
// filter used when no bin selection or sparse reconstruction takes place.
ImpulseResponse filter_from_rtf(const RtfEstimate& est, Index delay);

}  // namespace rtfcs
