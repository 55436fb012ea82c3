#include "rtfcs/signal.hpp"

#include "rtfcs/dft.hpp"
#include "rtfcs/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace rtfcs {

bool all_finite(const RealVector& v) { return v.allFinite(); }
bool all_finite(const ComplexVector& v) { return v.allFinite(); }

TimeSignal::TimeSignal(RealVector samples, double rate) : samples_(std::move(samples)), rate_(rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) throw InvalidArgument("TimeSignal: rate must be positive");
    if (!samples_.allFinite()) throw InvalidArgument("TimeSignal: samples must be finite");
}

TimeSignal TimeSignal::slice(Index begin, Index end) const {
    if (begin < 0 || end > size() || begin > end)
        throw DimensionError("TimeSignal::slice: range [" + std::to_string(begin) + ", " +
                             std::to_string(end) + ") outside " + std::to_string(size()));
    return TimeSignal(samples_.segment(begin, end - begin), rate_);
}

StereoRecording::StereoRecording(TimeSignal left, TimeSignal right)
    : left_(std::move(left)), right_(std::move(right)) {
    if (left_.size() != right_.size())
        throw DimensionError("StereoRecording: channel lengths differ (" + std::to_string(left_.size()) +
                             " vs " + std::to_string(right_.size()) + ")");
    if (left_.rate() != right_.rate()) throw InvalidArgument("StereoRecording: channel rates differ");
}

StereoRecording StereoRecording::slice(Index begin, Index end) const {
    return {left_.slice(begin, end), right_.slice(begin, end)};
}

std::string_view window_name(WindowKind kind) {
    switch (kind) {
        case WindowKind::Rectangular: return "rectangular";
        case WindowKind::Hann: return "hann";
        case WindowKind::SqrtHann: return "sqrt_hann";
    }
    return "unknown";
}

WindowKind parse_window(std::string_view name) {
    if (name == "rectangular" || name == "rect") return WindowKind::Rectangular;
    if (name == "hann") return WindowKind::Hann;
    if (name == "sqrt_hann") return WindowKind::SqrtHann;
    throw InvalidArgument("unknown window '" + std::string(name) + "'");
}

RealVector make_window(WindowKind kind, Index length) {
    RealVector w(length);
    for (Index n = 0; n < length; ++n) {
        const double hann =
            0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(length));
        switch (kind) {
            case WindowKind::Rectangular: w(n) = 1.0; break;
            case WindowKind::Hann: w(n) = hann; break;
            case WindowKind::SqrtHann: w(n) = std::sqrt(hann); break;
        }
    }
    return w;
}

Index stft_frame_count(Index n, Index dft_len, Index hop) {
    if (n < dft_len) return 0;
    return 1 + (n - dft_len + hop - 1) / hop;
}

Spectrogram stft(const TimeSignal& sig, Index dft_len, Index hop, WindowKind window) {
    if (sig.empty()) throw InvalidArgument("stft: empty signal");
    if (dft_len < 2 || dft_len % 2 != 0) throw InvalidArgument("stft: dft_len must be even and >= 2");
    if (hop < 1 || hop > dft_len) throw InvalidArgument("stft: hop must be in [1, dft_len]");
    if (sig.size() < dft_len)
        throw InvalidArgument("stft: signal of " + std::to_string(sig.size()) +
                              " samples is shorter than one frame (" + std::to_string(dft_len) + ")");

    const Index n = sig.size();
    const Index frames = stft_frame_count(n, dft_len, hop);
    const RealVector win = make_window(window, dft_len);
    RealFft fft(dft_len);

    Spectrogram out;
    out.dft_len = dft_len;
    out.hop = hop;
    out.window = window;
    out.values.resize(dft_len, frames);

    RealVector frame(dft_len);
    const RealVector& x = sig.samples();
    for (Index l = 0; l < frames; ++l) {
        const Index start = l * hop;
        const Index avail = std::min(dft_len, n - start);
        frame.setZero();
        frame.head(avail) = x.segment(start, avail).cwiseProduct(win.head(avail));
        out.values.col(l) = fft.forward_full(frame);
    }
    return out;
}

namespace {

Index next_pow2(Index n) {
    Index p = 1;
    while (p < n) p <<= 1;
    return p;
}

RealVector convolve_direct(const RealVector& h, const RealVector& x) {
    const Index nh = h.size();
    const Index nx = x.size();
    RealVector y = RealVector::Zero(nh + nx - 1);
    for (Index j = 0; j < nh; ++j) {
        if (h(j) == 0.0) continue;
        y.segment(j, nx) += h(j) * x;
    }
    return y;
}

RealVector convolve_fft(const RealVector& h, const RealVector& x) {
    const Index out_len = h.size() + x.size() - 1;
    const Index n = next_pow2(out_len);
    RealFft fft(n);
    RealVector hp = RealVector::Zero(n);
    RealVector xp = RealVector::Zero(n);
    hp.head(h.size()) = h;
    xp.head(x.size()) = x;
    const ComplexVector prod = fft.forward_half(hp).cwiseProduct(fft.forward_half(xp));
    return fft.inverse_half(prod).head(out_len);
}

RealVector convolve_full(const RealVector& h, const RealVector& x) {
    if (h.size() == 0) throw InvalidArgument("convolve: empty filter");
    if (x.size() == 0) return RealVector();
    // Direct summation is exact and fast for short filters.
    if (h.size() <= 64 || x.size() <= 64) return convolve_direct(h, x);
    return convolve_fft(h, x);
}

}  // namespace

RealVector convolve(const RealVector& h, const RealVector& x, ConvolutionMode mode) {
    RealVector full = convolve_full(h, x);
    if (mode == ConvolutionMode::Truncated && full.size() > x.size()) full.conservativeResize(x.size());
    return full;
}

TimeSignal convolve(const ImpulseResponse& h, const TimeSignal& sig, ConvolutionMode mode) {
    if (!h.taps.allFinite()) throw InvalidArgument("convolve: non-finite filter taps");
    return TimeSignal(convolve(h.taps, sig.samples(), mode), sig.rate());
}

RealVector convolve_window(const RealVector& h, const RealVector& x, Index begin, Index end) {
    if (h.size() == 0) throw InvalidArgument("convolve_window: empty filter");
    if (begin < 0 || end < begin) throw DimensionError("convolve_window: bad range");
    RealVector out = RealVector::Zero(end - begin);
    const Index lo = std::max<Index>(0, begin - (h.size() - 1));
    const Index hi = std::min<Index>(x.size(), end);
    if (hi <= lo) return out;
    const RealVector c = convolve_full(h, x.segment(lo, hi - lo));
    for (Index n = begin; n < end; ++n) {
        const Index m = n - lo;
        if (m >= 0 && m < c.size()) out(n - begin) = c(m);
    }
    return out;
}

RealVector convolve_circular(const RealVector& h, const RealVector& x) {
    const Index n = x.size();
    if (n == 0) return RealVector();
    RealVector hw = RealVector::Zero(n);
    for (Index j = 0; j < h.size(); ++j) hw(j % n) += h(j);
    RealFft fft(n);
    const ComplexVector prod = fft.forward_half(hw).cwiseProduct(fft.forward_half(x));
    return fft.inverse_half(prod);
}

RealVector delay_signal(const RealVector& x, Index d) {
    const Index n = x.size();
    RealVector y = RealVector::Zero(n);
    if (d >= 0) {
        if (d < n) y.tail(n - d) = x.head(n - d);
    } else {
        const Index a = -d;
        if (a < n) y.head(n - a) = x.tail(n - a);
    }
    return y;
}

FrequencyBinSet::FrequencyBinSet(Index dft_len, std::vector<Index> indices)
    : dft_len_(dft_len), indices_(std::move(indices)) {
    if (dft_len < 4 || dft_len % 2 != 0)
        throw InvalidArgument("FrequencyBinSet: dft_len must be even and >= 4, got " + std::to_string(dft_len));
    for (std::size_t j = 0; j < indices_.size(); ++j) {
        const Index k = indices_[j];
        if (k < 1 || k > dft_len / 2 - 1)
            throw InvalidArgument("FrequencyBinSet: bin " + std::to_string(k) + " outside [1, " +
                                  std::to_string(dft_len / 2 - 1) + "]");
        if (j > 0 && k <= indices_[j - 1])
            throw InvalidArgument("FrequencyBinSet: indices must be strictly increasing");
    }
}

FrequencyBinSet FrequencyBinSet::all_interior(Index dft_len) {
    std::vector<Index> idx;
    for (Index k = 1; k <= dft_len / 2 - 1; ++k) idx.push_back(k);
    return {dft_len, std::move(idx)};
}

bool FrequencyBinSet::contains(Index k) const {
    return std::binary_search(indices_.begin(), indices_.end(), k);
}

IncompleteRtf::IncompleteRtf(FrequencyBinSet b, ComplexVector v) : bins(std::move(b)), values(std::move(v)) {
    if (values.size() != bins.size())
        throw DimensionError("IncompleteRtf: " + std::to_string(values.size()) + " values for " +
                             std::to_string(bins.size()) + " bins");
    if (!values.allFinite()) throw InvalidArgument("IncompleteRtf: values must be finite");
}

}  // namespace rtfcs
