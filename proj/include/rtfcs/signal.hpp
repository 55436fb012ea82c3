#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace rtfcs {

using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;
using Index = Eigen::Index;

bool all_finite(const RealVector& v);
bool all_finite(const ComplexVector& v);

// A sampled real waveform. Samples must be finite and the rate positive.
class TimeSignal {
public:
    TimeSignal() = default;
    TimeSignal(RealVector samples, double rate);

    const RealVector& samples() const { return samples_; }
    double rate() const { return rate_; }
    Index size() const { return samples_.size(); }
    bool empty() const { return samples_.size() == 0; }

    // Samples [begin, end) as a new signal.
    TimeSignal slice(Index begin, Index end) const;

private:
    RealVector samples_;
    double rate_ = 1.0;
};

// Left/right microphone pair with equal length and rate.
class StereoRecording {
public:
    StereoRecording() = default;
    StereoRecording(TimeSignal left, TimeSignal right);

    const TimeSignal& left() const { return left_; }
    const TimeSignal& right() const { return right_; }
    Index size() const { return left_.size(); }
    double rate() const { return left_.rate(); }

    StereoRecording slice(Index begin, Index end) const;

private:
    TimeSignal left_;
    TimeSignal right_;
};

// Filter taps plus the integer delay (in samples) the taps are referenced
// to. A filter with delay D approximates h_rel shifted right by D, so it
// must be compared against the right channel delayed by D.
struct ImpulseResponse {
    RealVector taps;
    Index delay = 0;

    Index size() const { return taps.size(); }
};

enum class WindowKind { Rectangular, Hann, SqrtHann };

std::string_view window_name(WindowKind kind);
WindowKind parse_window(std::string_view name);

// Periodic window of the given length.
RealVector make_window(WindowKind kind, Index length);

// Full-spectrum short-term DFT: values(k, l) for bins k = 0..M-1.
struct Spectrogram {
    Eigen::MatrixXcd values;
    Index dft_len = 0;
    Index hop = 1;
    WindowKind window = WindowKind::SqrtHann;

    Index frames() const { return values.cols(); }
    Index bins() const { return values.rows(); }
};

// Frame l covers samples [l*hop, l*hop + M). Frames are added until every
// sample is covered; the last frame is zero-padded past the end.
Spectrogram stft(const TimeSignal& sig, Index dft_len, Index hop,
                 WindowKind window = WindowKind::SqrtHann);

// Number of frames stft() produces for a signal of n samples.
Index stft_frame_count(Index n, Index dft_len, Index hop);

enum class ConvolutionMode {
    Full,       // length len(h) + len(x) - 1
    Truncated,  // first len(x) samples of the full result
};

RealVector convolve(const RealVector& h, const RealVector& x,
                    ConvolutionMode mode = ConvolutionMode::Truncated);

TimeSignal convolve(const ImpulseResponse& h, const TimeSignal& sig,
                    ConvolutionMode mode = ConvolutionMode::Truncated);

// Samples [begin, end) of the full linear convolution h * x, computed from
// the input samples that actually contribute to that range.
RealVector convolve_window(const RealVector& h, const RealVector& x, Index begin, Index end);

// Circular convolution of period x.size(); h is wrapped modulo the period.
RealVector convolve_circular(const RealVector& h, const RealVector& x);

// x(n - d) with zeros shifted in; negative d advances.
RealVector delay_signal(const RealVector& x, Index d);

// Interior bins of an M-point DFT: strictly increasing k with 1 <= k <= M/2 - 1.
class FrequencyBinSet {
public:
    FrequencyBinSet() = default;
    FrequencyBinSet(Index dft_len, std::vector<Index> indices);

    static FrequencyBinSet all_interior(Index dft_len);

    Index dft_len() const { return dft_len_; }
    const std::vector<Index>& indices() const { return indices_; }
    Index size() const { return static_cast<Index>(indices_.size()); }
    bool empty() const { return indices_.empty(); }
    bool contains(Index k) const;

    bool operator==(const FrequencyBinSet&) const = default;

private:
    Index dft_len_ = 0;
    std::vector<Index> indices_;
};

// RTF values known only on a bin subset.
struct IncompleteRtf {
    FrequencyBinSet bins;
    ComplexVector values;

    IncompleteRtf() = default;
    IncompleteRtf(FrequencyBinSet b, ComplexVector v);
};

// Real-valued form of an incomplete measurement: rhs = [Re f; Im f].
struct RealifiedSystem {
    RealVector rhs;
    FrequencyBinSet bins;
};

}  // namespace rtfcs
