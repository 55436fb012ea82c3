#include "oracles.hpp"

#include "rtfcs/dft.hpp"
#include "rtfcs/error.hpp"
#include "rtfcs/estimators.hpp"

#include <doctest.h>

using namespace rtfcs;
using cd = std::complex<double>;

namespace {

Spectrogram make_spec(Eigen::MatrixXcd values, Index m) {
    Spectrogram s;
    s.values = std::move(values);
    s.dft_len = m;
    s.hop = 1;
    s.window = WindowKind::Rectangular;
    return s;
}

StereoRecording pair(const RealVector& l, const RealVector& r) {
    return {TimeSignal(l, 16000.0), TimeSignal(r, 16000.0)};
}

}  // namespace

TEST_CASE("estimate_ls_time: identity filter") {
    const RealVector x = oracle::gaussian(500, 1, "x");
    for (Index taps : {1, 5, 16}) {
        const ImpulseResponse h = estimate_ls_time(pair(x, x), taps, 0);
        RealVector e0 = RealVector::Zero(taps);
        e0(0) = 1.0;
        CHECK(oracle::max_abs(h.taps - e0) <= 1e-10);
        CHECK(h.delay == 0);
    }
}

TEST_CASE("estimate_ls_time: two-tap filter against the normal-equation oracle") {
    const RealVector x = oracle::gaussian(400, 2, "x");
    RealVector h(2);
    h << 0.5, -0.25;
    const RealVector y = oracle::direct_convolution(h, x).head(400);
    const ImpulseResponse est = estimate_ls_time(pair(x, y), 2, 0);
    CHECK(oracle::max_abs(est.taps - h) <= 1e-8);
    CHECK(oracle::max_abs(est.taps - oracle::ls_fit(x, y, 2, 0)) <= 1e-10);
}

TEST_CASE("estimate_ls_time: noisy data matches the explicit least-squares solution") {
    const RealVector x = oracle::gaussian(600, 3, "x");
    const RealVector y = oracle::gaussian(600, 3, "y");
    for (Index delay : {0, 4}) {
        const ImpulseResponse est = estimate_ls_time(pair(x, y), 12, delay);
        CHECK(oracle::max_abs(est.taps - oracle::ls_fit(x, y, 12, delay)) <= 1e-10);
    }
}

TEST_CASE("estimate_ls_time: planted filter with delay") {
    const RealVector x = oracle::gaussian(2000, 4, "x");
    const RealVector h = oracle::gaussian(16, 4, "h");
    const RealVector y = oracle::direct_convolution(h, x).head(2000);
    const Index d = 5;
    const ImpulseResponse est = estimate_ls_time(pair(x, y), 24, d);
    RealVector expect = RealVector::Zero(24);
    expect.segment(d, 16) = h;
    CHECK(oracle::max_abs(est.taps - expect) <= 1e-8);
    CHECK(est.delay == d);
}

TEST_CASE("estimate_ls_time: errors") {
    CHECK_THROWS_AS(estimate_ls_time(pair(RealVector::Zero(100), RealVector::Ones(100)), 4, 0), NumericError);
    const RealVector x = oracle::gaussian(10, 5, "x");
    CHECK_THROWS_AS(estimate_ls_time(pair(x, x), 11, 0), InvalidArgument);
    CHECK_THROWS_AS(estimate_ls_time(pair(x, x), 0, 0), InvalidArgument);
    CHECK_THROWS_AS(estimate_ls_time(pair(x, x), 2, 10), InvalidArgument);
}

TEST_CASE("estimate_fd examples") {
    const Index m = 8;
    SUBCASE("single frame ratio") {
        Eigen::MatrixXcd l = Eigen::MatrixXcd::Ones(m, 1), r = Eigen::MatrixXcd::Ones(m, 1);
        l(2, 0) = 2.0;
        r(2, 0) = 6.0;
        const RtfEstimate e = estimate_fd(make_spec(l, m), make_spec(r, m));
        CHECK(e.values.size() == m / 2 + 1);
        CHECK(std::abs(e.values(2) - cd(3.0, 0.0)) < 1e-15);
    }
    SUBCASE("two frames [1, i] and [2, 2i]") {
        Eigen::MatrixXcd l = Eigen::MatrixXcd::Ones(m, 2), r = Eigen::MatrixXcd::Ones(m, 2);
        l(1, 0) = 1.0;
        l(1, 1) = cd(0, 1);
        r(1, 0) = 2.0;
        r(1, 1) = cd(0, 2);
        const RtfEstimate e = estimate_fd(make_spec(l, m), make_spec(r, m));
        CHECK(std::abs(e.values(1) - cd(2.0, 0.0)) < 1e-15);
    }
    SUBCASE("noise-free model is reproduced exactly and is scale equivariant") {
        const Index frames = 20;
        Eigen::MatrixXcd l(m, frames);
        for (Index f = 0; f < frames; ++f) l.col(f) = oracle::complex_gaussian(m, static_cast<std::uint64_t>(f), "l");
        const ComplexVector hv = oracle::complex_gaussian(m, 99, "h");
        const Eigen::MatrixXcd r = hv.asDiagonal() * l;
        const RtfEstimate e = estimate_fd(make_spec(l, m), make_spec(r, m));
        for (Index k = 0; k <= m / 2; ++k) CHECK(std::abs(e.values(k) - hv(k)) <= 1e-12 * std::abs(hv(k)));
        const cd c(0.3, -2.0);
        const RtfEstimate scaled = estimate_fd(make_spec(l, m), make_spec(c * r, m));
        for (Index k = 0; k <= m / 2; ++k) CHECK(std::abs(scaled.values(k) - c * e.values(k)) <= 1e-12 * std::abs(c * e.values(k)));
    }
    SUBCASE("zero denominator flags the bin invalid") {
        Eigen::MatrixXcd l = Eigen::MatrixXcd::Ones(m, 3), r = Eigen::MatrixXcd::Ones(m, 3);
        l.row(3).setZero();
        const RtfEstimate e = estimate_fd(make_spec(l, m), make_spec(r, m));
        CHECK_FALSE(e.is_valid(3));
        CHECK(e.values(3) == cd(0.0, 0.0));
        CHECK_FALSE(e.valid_interior().contains(3));
        CHECK(e.valid_interior().size() == m / 2 - 2);
    }
    SUBCASE("shape mismatch") {
        CHECK_THROWS_AS(estimate_fd(make_spec(Eigen::MatrixXcd::Ones(m, 3), m), make_spec(Eigen::MatrixXcd::Ones(m, 4), m)),
                        DimensionError);
    }
}

TEST_CASE("estimate_fd is exact on a noise-free periodic scenario") {
    // A period-M source, circular mixing and rectangular frames that all lie
    // inside the data: every frame obeys X_R = H X_L exactly.
    const Index m = 64, hop = 16, n = 16 * m;
    const RealVector period = oracle::gaussian(m, 7, "src");
    RealVector s(n);
    for (Index i = 0; i < n; ++i) s(i) = period(i % m);
    const RealVector h = oracle::gaussian(20, 7, "h");
    const RealVector right = convolve_circular(h, s);
    const Spectrogram L = stft(TimeSignal(s, 1.0), m, hop, WindowKind::Rectangular);
    const Spectrogram R = stft(TimeSignal(right, 1.0), m, hop, WindowKind::Rectangular);
    REQUIRE((L.frames() - 1) * hop + m == n);
    const RtfEstimate e = estimate_fd(L, R);
    RealVector hp = RealVector::Zero(m);
    hp.head(20) = h;
    const ComplexVector truth = oracle::dft(hp);
    for (Index k = 0; k <= m / 2; ++k) {
        if (!e.is_valid(k)) continue;
        CHECK(std::abs(e.values(k) - truth(k)) <= 1e-6 * std::abs(truth(k)));
    }
}

TEST_CASE("compute_psd_frames") {
    const Index m = 8;
    SUBCASE("errors") {
        const Spectrogram s = make_spec(Eigen::MatrixXcd::Ones(m, 4), m);
        CHECK_THROWS_AS(compute_psd_frames(s, s, 1), InvalidArgument);
        CHECK_THROWS_AS(compute_psd_frames(s, s, 5), InvalidArgument);
    }
    SUBCASE("constant spectrograms give identical PSDs across blocks") {
        const Spectrogram l = make_spec(Eigen::MatrixXcd::Constant(m, 12, cd(1.0, 2.0)), m);
        const Spectrogram r = make_spec(Eigen::MatrixXcd::Constant(m, 12, cd(-0.5, 0.25)), m);
        const PsdFrames p = compute_psd_frames(l, r, 3);
        for (Index b = 1; b < 3; ++b) {
            CHECK((p.cross.col(b) - p.cross.col(0)).cwiseAbs().maxCoeff() < 1e-15);
            CHECK((p.left.col(b) - p.left.col(0)).cwiseAbs().maxCoeff() < 1e-15);
        }
    }
    SUBCASE("two hand-built blocks equal direct averages") {
        Eigen::MatrixXcd l(m, 4), r(m, 4);
        for (Index f = 0; f < 4; ++f) {
            l.col(f) = oracle::complex_gaussian(m, static_cast<std::uint64_t>(f), "l");
            r.col(f) = oracle::complex_gaussian(m, static_cast<std::uint64_t>(f), "r");
        }
        const PsdFrames p = compute_psd_frames(make_spec(l, m), make_spec(r, m), 2);
        CHECK(p.cross.rows() == m / 2 + 1);
        for (Index k = 0; k <= m / 2; ++k)
            for (Index b = 0; b < 2; ++b) {
                const cd c = (r(k, 2 * b) * std::conj(l(k, 2 * b)) + r(k, 2 * b + 1) * std::conj(l(k, 2 * b + 1))) / 2.0;
                const double a = (std::norm(l(k, 2 * b)) + std::norm(l(k, 2 * b + 1))) / 2.0;
                CHECK(std::abs(p.cross(k, b) - c) < 1e-14);
                CHECK(std::abs(p.left(k, b) - a) < 1e-14);
                CHECK(p.left(k, b) >= 0.0);
            }
    }
}

TEST_CASE("nsfd_block_count treats the block length as samples") {
    CHECK(nsfd_block_count(2497, 64, 1000) == 2497 / 16);
    CHECK(nsfd_block_count(100, 1000, 1000) == 100);
    CHECK(nsfd_block_count(10, 1, 3) == 3);
    CHECK_THROWS_AS(nsfd_block_count(10, 0, 3), InvalidArgument);
}

TEST_CASE("estimate_nsfd") {
    const Index m = 8, half = m / 2 + 1;
    SUBCASE("exact linear system is recovered") {
        const Index blocks = 5;
        PsdFrames p;
        p.blocks = blocks;
        p.dft_len = m;
        p.left.resize(half, blocks);
        p.cross.resize(half, blocks);
        const ComplexVector h = oracle::complex_gaussian(half, 1, "h");
        const ComplexVector c = oracle::complex_gaussian(half, 1, "c");
        rtfcs::CounterRng rng(1, "phi");
        for (Index k = 0; k < half; ++k)
            for (Index b = 0; b < blocks; ++b) {
                p.left(k, b) = rng.uniform(0.1, 3.0);
                p.cross(k, b) = h(k) * p.left(k, b) + c(k);
            }
        const NsfdResult r = estimate_nsfd(p);
        for (Index k = 0; k < half; ++k) {
            const NsfdFit& f = r.fits[static_cast<std::size_t>(k)];
            CHECK(f.valid);
            CHECK(std::abs(f.rtf - h(k)) < 1e-12);
            CHECK(std::abs(f.nuisance - c(k)) < 1e-12);
            CHECK(f.residual < 1e-12);
            CHECK(std::abs(r.estimate.values(k) - h(k)) < 1e-12);
        }
    }
    SUBCASE("two blocks equal the closed-form 2x2 solve") {
        PsdFrames p;
        p.blocks = 2;
        p.dft_len = m;
        p.left.resize(half, 2);
        p.cross.resize(half, 2);
        for (Index k = 0; k < half; ++k) {
            p.left(k, 0) = 1.0 + static_cast<double>(k);
            p.left(k, 1) = 0.5;
            p.cross(k, 0) = cd(1.0, static_cast<double>(k));
            p.cross(k, 1) = cd(-2.0, 0.5);
        }
        const NsfdResult r = estimate_nsfd(p);
        for (Index k = 0; k < half; ++k) {
            // [a1 1; a2 1] [H; c] = [b1; b2]
            const double a1 = p.left(k, 0), a2 = p.left(k, 1);
            const cd b1 = p.cross(k, 0), b2 = p.cross(k, 1);
            const cd h = (b1 - b2) / (a1 - a2);
            const cd c = (a1 * b2 - a2 * b1) / (a1 - a2);
            CHECK(std::abs(r.fits[static_cast<std::size_t>(k)].rtf - h) < 1e-12);
            CHECK(std::abs(r.fits[static_cast<std::size_t>(k)].nuisance - c) < 1e-12);
        }
    }
    SUBCASE("identical auto-PSDs flag the bin invalid") {
        PsdFrames p;
        p.blocks = 3;
        p.dft_len = m;
        p.left = Eigen::MatrixXd::Constant(half, 3, 2.0);
        p.left(1, 2) = 3.0;
        p.cross = Eigen::MatrixXcd::Ones(half, 3);
        const NsfdResult r = estimate_nsfd(p);
        CHECK(r.estimate.is_valid(1));
        CHECK_FALSE(r.estimate.is_valid(2));
        CHECK_FALSE(r.fits[2].valid);
        PsdFrames one = p;
        one.blocks = 1;
        CHECK_THROWS_AS(estimate_nsfd(one), InvalidArgument);
    }
}

TEST_CASE("rtf_from_demixing") {
    DemixingMatrices d;
    d.dft_len = 4;
    d.delay = 0;
    d.w.assign(3, Eigen::Matrix2cd::Identity());
    d.w[0](0, 0) = 1.0;
    d.w[0](0, 1) = -1.0;
    d.w[1](0, 0) = cd(0, 2);
    d.w[1](0, 1) = cd(0, 1);
    d.w[2](0, 1) = 0.0;
    const RtfEstimate e = rtf_from_demixing(d);
    CHECK(std::abs(e.values(0) - cd(1, 0)) < 1e-15);
    CHECK(std::abs(e.values(1) - cd(-2, 0)) < 1e-15);
    CHECK_FALSE(e.is_valid(2));
    CHECK(e.source == EstimatorKind::ExternalDemix);

    // A demixing row built around a delayed right channel yields the plain ratio.
    DemixingMatrices dd;
    dd.dft_len = 8;
    dd.delay = 3;
    const ComplexVector h = oracle::complex_gaussian(5, 4, "h");
    for (Index k = 0; k < 5; ++k) {
        Eigen::Matrix2cd w = Eigen::Matrix2cd::Identity();
        // X_{R,D} = H e^{-i theta D} X_L, so W11 = H e^{-i theta D}, W12 = -1 cancels it.
        w(0, 0) = h(k) * std::polar(1.0, -bin_frequency(k, 8) * 3.0);
        w(0, 1) = -1.0;
        dd.w.push_back(w);
    }
    const RtfEstimate ed = rtf_from_demixing(dd);
    for (Index k = 0; k < 5; ++k) CHECK(std::abs(ed.values(k) - h(k)) < 1e-14);
    dd.w.pop_back();
    CHECK_THROWS_AS(rtf_from_demixing(dd), DimensionError);
}

TEST_CASE("apply_demixing multiplies each bin") {
    const Index m = 8, frames = 3;
    Eigen::MatrixXcd l(m, frames), r(m, frames);
    for (Index f = 0; f < frames; ++f) {
        l.col(f) = oracle::complex_gaussian(m, static_cast<std::uint64_t>(f), "l");
        r.col(f) = oracle::complex_gaussian(m, static_cast<std::uint64_t>(f), "r");
    }
    DemixingMatrices d;
    d.dft_len = m;
    for (Index k = 0; k <= m / 2; ++k) {
        const ComplexVector v = oracle::complex_gaussian(4, static_cast<std::uint64_t>(k), "w");
        Eigen::Matrix2cd w;
        w << v(0), v(1), v(2), v(3);
        d.w.push_back(w);
    }
    const SeparatedSignals y = apply_demixing(d, make_spec(l, m), make_spec(r, m));
    for (Index k = 0; k <= m / 2; ++k)
        for (Index f = 0; f < frames; ++f) {
            const Eigen::Vector2cd x(l(k, f), r(k, f));
            const Eigen::Vector2cd out = d.w[static_cast<std::size_t>(k)] * x;
            CHECK(std::abs(y.first(k, f) - out(0)) < 1e-14);
            CHECK(std::abs(y.second(k, f) - out(1)) < 1e-14);
        }
}

TEST_CASE("rtf_from_filter and filter_from_rtf are inverse under the delay convention") {
    const Index m = 32;
    const ImpulseResponse g{oracle::gaussian(m, 5, "g"), 6};
    const RtfEstimate e = rtf_from_filter(g, m, EstimatorKind::TimeLs);
    // values carry no delay: e^{+i theta D} times the DFT of the taps
    const ComplexVector dft = oracle::dft(g.taps);
    for (Index k = 0; k <= m / 2; ++k)
        CHECK(std::abs(e.values(k) - dft(k) * std::polar(1.0, bin_frequency(k, m) * 6.0)) < 1e-12);
    const ImpulseResponse back = filter_from_rtf(e, 6);
    CHECK(back.delay == 6);
    CHECK(oracle::max_abs(back.taps - g.taps) < 1e-12);
    // Re-referencing to another delay circularly shifts the taps.
    const ImpulseResponse moved = filter_from_rtf(e, 8);
    for (Index i = 0; i < m; ++i) CHECK(std::abs(moved.taps((i + 2) % m) - g.taps(i)) < 1e-12);
    CHECK_THROWS_AS(rtf_from_filter({RealVector::Ones(m + 1), 0}, m, EstimatorKind::Fd), DimensionError);
}
