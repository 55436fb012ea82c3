#pragma once

#include "rtfcs/signal.hpp"

#include <memory>

namespace rtfcs {

// Real-input FFT of a fixed length n, forward sign exp(-i 2 pi k m / n),
// no normalization on the forward transform. Holds a plan cache, so one
// instance must not be shared between threads.
class RealFft {
public:
    explicit RealFft(Index n);
    ~RealFft();
    RealFft(RealFft&&) noexcept;
    RealFft& operator=(RealFft&&) noexcept;

    Index size() const { return n_; }

    // Bins 0..n/2 of the DFT of x (x.size() == n).
    ComplexVector forward_half(const RealVector& x);
    // All n bins.
    ComplexVector forward_full(const RealVector& x);
    // Real inverse from bins 0..n/2 (Hermitian completion implied), scaled by 1/n.
    RealVector inverse_half(const ComplexVector& half);

private:
    struct Impl;
    Index n_;
    std::unique_ptr<Impl> impl_;
};

// The realified partial DFT operator for a bin set S:
//   apply:   h (length M)   -> [Re(F_S h); Im(F_S h)]   (length 2|S|)
//   adjoint: r (length 2|S|) -> F_S^T r                  (length M)
// Both are matrix-free. The adjoint zero-fills a spectrum with
// d_k = r_re,k + i r_im,k on S and returns M/2 times its symmetric inverse FFT.
class PartialDft {
public:
    explicit PartialDft(FrequencyBinSet bins);

    const FrequencyBinSet& bins() const { return bins_; }
    Index dft_len() const { return bins_.dft_len(); }
    Index rows() const { return 2 * bins_.size(); }

    ComplexVector forward_complex(const RealVector& h);
    RealVector apply(const RealVector& h);
    RealVector adjoint(const RealVector& r);

private:
    FrequencyBinSet bins_;
    RealFft fft_;
};

ComplexVector partial_dft_forward(const RealVector& h, const FrequencyBinSet& bins);
RealifiedSystem realify(const ComplexVector& f, const FrequencyBinSet& bins);
RealVector realified_forward(const RealVector& h, const FrequencyBinSet& bins);
RealVector realified_adjoint(const RealVector& r, const FrequencyBinSet& bins);

// theta_k = 2 pi k / M
double bin_frequency(Index k, Index dft_len);

}  // namespace rtfcs
