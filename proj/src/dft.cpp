#include "rtfcs/dft.hpp"

#include "rtfcs/error.hpp"

#include <unsupported/Eigen/FFT>

#include <numbers>
#include <string>
#include <vector>

namespace rtfcs {

struct RealFft::Impl {
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spectrum;
    std::vector<double> time;
};

RealFft::RealFft(Index n) : n_(n), impl_(std::make_unique<Impl>()) {
    if (n < 1) throw InvalidArgument("RealFft: length must be positive");
    impl_->fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
    impl_->fft.SetFlag(Eigen::FFT<double>::Unscaled);
    impl_->spectrum.resize(static_cast<std::size_t>(n / 2 + 1));
    impl_->time.resize(static_cast<std::size_t>(n));
}

RealFft::~RealFft() = default;
RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

ComplexVector RealFft::forward_half(const RealVector& x) {
    if (x.size() != n_)
        throw DimensionError("RealFft: input length " + std::to_string(x.size()) +
                             " != " + std::to_string(n_));
    impl_->fft.fwd(impl_->spectrum.data(), x.data(), n_);
    return Eigen::Map<const ComplexVector>(impl_->spectrum.data(), n_ / 2 + 1);
}

ComplexVector RealFft::forward_full(const RealVector& x) {
    const ComplexVector half = forward_half(x);
    ComplexVector full(n_);
    full.head(half.size()) = half;
    for (Index k = half.size(); k < n_; ++k) full(k) = std::conj(half(n_ - k));
    return full;
}

RealVector RealFft::inverse_half(const ComplexVector& half) {
    if (half.size() != n_ / 2 + 1)
        throw DimensionError("RealFft: half spectrum must have n/2+1 bins");
    for (Index k = 0; k < half.size(); ++k) impl_->spectrum[static_cast<std::size_t>(k)] = half(k);
    // The real inverse treats bin 0 (and n/2 for even n) as real.
    impl_->spectrum[0] = {half(0).real(), 0.0};
    if (n_ % 2 == 0) impl_->spectrum[static_cast<std::size_t>(n_ / 2)] = {half(n_ / 2).real(), 0.0};
    impl_->fft.inv(impl_->time.data(), impl_->spectrum.data(), n_);
    return Eigen::Map<const RealVector>(impl_->time.data(), n_) / static_cast<double>(n_);
}

double bin_frequency(Index k, Index dft_len) {
    return 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(dft_len);
}

PartialDft::PartialDft(FrequencyBinSet bins) : bins_(std::move(bins)), fft_(bins_.dft_len()) {}

ComplexVector PartialDft::forward_complex(const RealVector& h) {
    if (h.size() != dft_len())
        throw DimensionError("partial DFT: filter length " + std::to_string(h.size()) +
                             " != dft_len " + std::to_string(dft_len()));
    const ComplexVector spec = fft_.forward_half(h);
    const auto& idx = bins_.indices();
    ComplexVector out(static_cast<Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) out(static_cast<Index>(j)) = spec(idx[j]);
    return out;
}

RealVector PartialDft::apply(const RealVector& h) {
    const ComplexVector f = forward_complex(h);
    RealVector out(2 * f.size());
    out.head(f.size()) = f.real();
    out.tail(f.size()) = f.imag();
    return out;
}

RealVector PartialDft::adjoint(const RealVector& r) {
    const Index s = bins_.size();
    if (r.size() != 2 * s)
        throw DimensionError("partial DFT adjoint: residual length " + std::to_string(r.size()) +
                             " != 2|S| = " + std::to_string(2 * s));
    const Index m = dft_len();
    ComplexVector d = ComplexVector::Zero(m / 2 + 1);
    const auto& idx = bins_.indices();
    for (Index j = 0; j < s; ++j) d(idx[static_cast<std::size_t>(j)]) = {r(j), r(s + j)};
    // M/2 * ifft(d, 'symmetric'); inverse_half already divides by M.
    return fft_.inverse_half(d) * (static_cast<double>(m) / 2.0);
}

ComplexVector partial_dft_forward(const RealVector& h, const FrequencyBinSet& bins) {
    return PartialDft(bins).forward_complex(h);
}

RealifiedSystem realify(const ComplexVector& f, const FrequencyBinSet& bins) {
    if (f.size() != bins.size())
        throw DimensionError("realify: " + std::to_string(f.size()) + " values for " +
                             std::to_string(bins.size()) + " bins");
    RealifiedSystem sys;
    sys.bins = bins;
    sys.rhs.resize(2 * f.size());
    sys.rhs.head(f.size()) = f.real();
    sys.rhs.tail(f.size()) = f.imag();
    return sys;
}

RealVector realified_forward(const RealVector& h, const FrequencyBinSet& bins) {
    return PartialDft(bins).apply(h);
}

RealVector realified_adjoint(const RealVector& r, const FrequencyBinSet& bins) {
    return PartialDft(bins).adjoint(r);
}

}  // namespace rtfcs
