#pragma once

// Brute-force reference computations used by the tests. Nothing here calls
// into the library's numerical code paths.

#include "rtfcs/rng.hpp"
#include "rtfcs/signal.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace oracle {

using rtfcs::ComplexVector;
using rtfcs::Index;
using rtfcs::RealVector;
using cd = std::complex<double>;

// F(k, n) = exp(-i 2 pi k n / M)
inline Eigen::MatrixXcd dft_matrix(Index m) {
    Eigen::MatrixXcd f(m, m);
    for (Index k = 0; k < m; ++k)
        for (Index n = 0; n < m; ++n) {
            // Reduce k*n mod m first so large products keep full accuracy.
            const double ang = -2.0 * std::numbers::pi * static_cast<double>((k * n) % m) / static_cast<double>(m);
            f(k, n) = cd(std::cos(ang), std::sin(ang));
        }
    return f;
}

inline ComplexVector dft(const RealVector& x) { return dft_matrix(x.size()) * x.cast<cd>(); }

// [Re F_S; Im F_S], 2|S| x M.
inline Eigen::MatrixXd realified_matrix(Index m, const std::vector<Index>& bins) {
    const Eigen::MatrixXcd f = dft_matrix(m);
    const auto s = static_cast<Index>(bins.size());
    Eigen::MatrixXd out(2 * s, m);
    for (Index j = 0; j < s; ++j) {
        out.row(j) = f.row(bins[static_cast<std::size_t>(j)]).real();
        out.row(s + j) = f.row(bins[static_cast<std::size_t>(j)]).imag();
    }
    return out;
}

inline RealVector direct_convolution(const RealVector& h, const RealVector& x) {
    RealVector y = RealVector::Zero(h.size() + x.size() - 1);
    for (Index i = 0; i < h.size(); ++i)
        for (Index n = 0; n < x.size(); ++n) y(i + n) += h(i) * x(n);
    return y;
}

inline RealVector direct_circular_convolution(const RealVector& h, const RealVector& x) {
    const Index n = x.size();
    RealVector y = RealVector::Zero(n);
    for (Index i = 0; i < h.size(); ++i)
        for (Index t = 0; t < n; ++t) y((i + t) % n) += h(i) * x(t);
    return y;
}

// Least-squares FIR fit: first N rows of the zero-padded convolution matrix
// of x_L against x_R delayed by D, solved through an explicit QR.
inline RealVector ls_fit(const RealVector& left, const RealVector& right, Index taps, Index delay) {
    const Index n = left.size();
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, taps);
    for (Index r = 0; r < n; ++r)
        for (Index c = 0; c < taps && c <= r; ++c) x(r, c) = left(r - c);
    RealVector target = RealVector::Zero(n);
    for (Index r = delay; r < n; ++r) target(r) = right(r - delay);
    return x.colPivHouseholderQr().solve(target);
}

// One STFT frame evaluated directly.
inline ComplexVector stft_frame(const RealVector& x, Index start, const RealVector& window) {
    const Index m = window.size();
    RealVector frame = RealVector::Zero(m);
    for (Index i = 0; i < m; ++i)
        if (start + i < x.size()) frame(i) = x(start + i) * window(i);
    return dft(frame);
}

inline double objective(const Eigen::MatrixXd& a, const RealVector& h, const RealVector& rhs, const RealVector& w) {
    return 0.5 * (a * h - rhs).squaredNorm() + w.cwiseProduct(h).cwiseAbs().sum();
}

// Given the support and signs of a solution, solve the stationarity system
//   A_G^T A_G h_G = A_G^T b - w_G .* sign(h_G)
// on the support G, which pins down the exact minimizer when the support
// and signs are right.
inline RealVector polish_on_support(const Eigen::MatrixXd& a, const RealVector& h, const RealVector& rhs,
                                    const RealVector& w) {
    std::vector<Index> g;
    for (Index i = 0; i < h.size(); ++i)
        if (h(i) != 0.0) g.push_back(i);
    const auto k = static_cast<Index>(g.size());
    Eigen::MatrixXd ag(a.rows(), k);
    RealVector q(k), wg(k);
    for (Index j = 0; j < k; ++j) {
        ag.col(j) = a.col(g[static_cast<std::size_t>(j)]);
        q(j) = h(g[static_cast<std::size_t>(j)]) > 0 ? 1.0 : -1.0;
        wg(j) = w(g[static_cast<std::size_t>(j)]);
    }
    const RealVector sol = (ag.transpose() * ag).ldlt().solve(ag.transpose() * rhs - wg.cwiseProduct(q));
    RealVector out = RealVector::Zero(h.size());
    for (Index j = 0; j < k; ++j) out(g[static_cast<std::size_t>(j)]) = sol(j);
    return out;
}

inline RealVector gaussian(Index n, std::uint64_t seed, const char* stream) {
    rtfcs::CounterRng rng(seed, stream);
    RealVector x(n);
    for (Index i = 0; i < n; ++i) x(i) = rng.normal();
    return x;
}

inline ComplexVector complex_gaussian(Index n, std::uint64_t seed, const char* stream) {
    rtfcs::CounterRng rng(seed, stream);
    ComplexVector x(n);
    for (Index i = 0; i < n; ++i) x(i) = cd(rng.normal(), rng.normal()) / std::sqrt(2.0);
    return x;
}

inline double max_abs(const RealVector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace oracle
