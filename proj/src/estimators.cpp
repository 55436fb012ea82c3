#include "rtfcs/estimators.hpp"

#include "rtfcs/dft.hpp"
#include "rtfcs/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rtfcs {

std::string_view estimator_name(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::TimeLs: return "ls";
        case EstimatorKind::Fd: return "fd";
        case EstimatorKind::Nsfd: return "nsfd";
        case EstimatorKind::ExternalDemix: return "external-demix";
    }
    return "unknown";
}

EstimatorKind parse_estimator(std::string_view name) {
    if (name == "ls") return EstimatorKind::TimeLs;
    if (name == "fd") return EstimatorKind::Fd;
    if (name == "nsfd") return EstimatorKind::Nsfd;
    if (name == "external-demix") return EstimatorKind::ExternalDemix;
    throw InvalidArgument("unknown estimator '" + std::string(name) + "'");
}

FrequencyBinSet RtfEstimate::valid_interior() const {
    std::vector<Index> idx;
    for (Index k = 1; k <= dft_len / 2 - 1; ++k)
        if (is_valid(k)) idx.push_back(k);
    return {dft_len, std::move(idx)};
}

ImpulseResponse estimate_ls_time(const StereoRecording& rec, Index filter_len, Index delay) {
    const Index n = rec.size();
    if (filter_len < 1) throw InvalidArgument("estimate_ls_time: filter length must be >= 1");
    if (n < filter_len)
        throw InvalidArgument("estimate_ls_time: " + std::to_string(n) + " samples < filter length " +
                              std::to_string(filter_len));
    if (delay < 0 || delay >= n) throw InvalidArgument("estimate_ls_time: delay must lie in [0, N)");

    const RealVector& x = rec.left().samples();
    const RealVector y = delay_signal(rec.right().samples(), delay);
    const RealVector xrev = x.reverse();

    // autocorr(j) = sum_m x(m) x(m+j), xcorr(i) = sum_m x(m) y(m+i)
    const RealVector acf = convolve(xrev, x, ConvolutionMode::Full).segment(n - 1, filter_len);
    const RealVector xcf = convolve(xrev, y, ConvolutionMode::Full).segment(n - 1, filter_len);

    const double inv_n = 1.0 / static_cast<double>(n);
    Eigen::MatrixXd r(filter_len, filter_len);
    for (Index j = 0; j < filter_len; ++j) r(0, j) = acf(j);
    // Rows of the prewindowed matrix lose one trailing product per shift.
    for (Index i = 0; i + 1 < filter_len; ++i)
        for (Index j = i; j + 1 < filter_len; ++j) r(i + 1, j + 1) = r(i, j) - x(n - 1 - i) * x(n - 1 - j);
    r = r.selfadjointView<Eigen::Upper>();
    r *= inv_n;
    const RealVector p = xcf * inv_n;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(r);
    const double rcond = ldlt.info() == Eigen::Success ? ldlt.rcond() : 0.0;
    if (!(r(0, 0) > 0.0) || !(rcond >= 1e-12))
        throw NumericError("estimate_ls_time: correlation matrix is rank deficient or ill-conditioned "
                           "(reciprocal condition estimate " + std::to_string(rcond) + ")");

    ImpulseResponse h;
    h.taps = ldlt.solve(p);
    h.delay = delay;
    if (!h.taps.allFinite()) throw NumericError("estimate_ls_time: non-finite solution");
    return h;
}

namespace {

void check_pair(const Spectrogram& a, const Spectrogram& b, const char* who) {
    if (a.dft_len != b.dft_len || a.hop != b.hop || a.window != b.window || a.frames() != b.frames() ||
        a.bins() != b.bins())
        throw DimensionError(std::string(who) + ": spectrograms differ in shape or parameters");
    if (a.frames() < 1) throw InvalidArgument(std::string(who) + ": no frames");
}

}  // namespace

RtfEstimate estimate_fd(const Spectrogram& left, const Spectrogram& right) {
    check_pair(left, right, "estimate_fd");
    const Index half = left.dft_len / 2 + 1;
    RtfEstimate est;
    est.dft_len = left.dft_len;
    est.source = EstimatorKind::Fd;
    est.values = ComplexVector::Zero(half);
    est.valid.assign(static_cast<std::size_t>(half), false);
    for (Index k = 0; k < half; ++k) {
        const auto xl = left.values.row(k);
        const auto xr = right.values.row(k);
        const std::complex<double> num = xl.conjugate().cwiseProduct(xr).sum();
        const double den = xl.cwiseAbs2().sum();
        if (den > 0.0) {
            const std::complex<double> v = num / den;
            if (std::isfinite(v.real()) && std::isfinite(v.imag())) {
                est.values(k) = v;
                est.valid[static_cast<std::size_t>(k)] = true;
            }
        }
    }
    return est;
}

PsdFrames compute_psd_frames(const Spectrogram& left, const Spectrogram& right, Index blocks) {
    check_pair(left, right, "compute_psd_frames");
    if (blocks < 2) throw InvalidArgument("compute_psd_frames: at least 2 blocks are needed");
    const Index frames = left.frames();
    if (blocks > frames)
        throw InvalidArgument("compute_psd_frames: " + std::to_string(blocks) + " blocks exceed " +
                              std::to_string(frames) + " frames");
    const Index half = left.dft_len / 2 + 1;
    PsdFrames psd;
    psd.blocks = blocks;
    psd.dft_len = left.dft_len;
    psd.cross.resize(half, blocks);
    psd.left.resize(half, blocks);
    for (Index p = 0; p < blocks; ++p) {
        const Index b = p * frames / blocks;
        const Index e = (p + 1) * frames / blocks;
        const double inv = 1.0 / static_cast<double>(e - b);
        const auto xl = left.values.block(0, b, half, e - b);
        const auto xr = right.values.block(0, b, half, e - b);
        psd.cross.col(p) = xr.cwiseProduct(xl.conjugate()).rowwise().sum() * inv;
        psd.left.col(p) = xl.cwiseAbs2().rowwise().sum() * inv;
    }
    return psd;
}

Index nsfd_block_count(Index frames, Index hop, Index block_samples) {
    if (hop < 1 || block_samples < 1) throw InvalidArgument("nsfd_block_count: hop and block length must be >= 1");
    const Index frames_per_block = std::max<Index>(1, (block_samples + hop - 1) / hop);
    return frames / frames_per_block;
}

NsfdResult estimate_nsfd(const PsdFrames& psd) {
    if (psd.blocks < 2) throw InvalidArgument("estimate_nsfd: at least 2 blocks are needed");
    const Index half = psd.cross.rows();
    const Index blocks = psd.blocks;
    const auto pb = static_cast<double>(blocks);

    NsfdResult out;
    out.estimate.dft_len = psd.dft_len;
    out.estimate.source = EstimatorKind::Nsfd;
    out.estimate.values = ComplexVector::Zero(half);
    out.estimate.valid.assign(static_cast<std::size_t>(half), false);
    out.fits.resize(static_cast<std::size_t>(half));

    for (Index k = 0; k < half; ++k) {
        const Eigen::RowVectorXd phi = psd.left.row(k);
        const Eigen::RowVectorXcd b = psd.cross.row(k);
        const double lo = phi.minCoeff();
        const double hi = phi.maxCoeff();
        NsfdFit& fit = out.fits[static_cast<std::size_t>(k)];
        if (!(hi - lo > 1e-12 * std::max(std::abs(hi), std::abs(lo))) || !b.allFinite()) continue;

        // Normal equations of the P x 2 system [phi 1] [H; c] = b; the design
        // matrix is real, so A^H A is real symmetric.
        const double s_pp = phi.squaredNorm();
        const double s_p = phi.sum();
        const std::complex<double> t_p = (phi.cast<std::complex<double>>().cwiseProduct(b)).sum();
        const std::complex<double> t_1 = b.sum();
        const double det = pb * s_pp - s_p * s_p;
        if (!(det > 0.0)) continue;
        fit.rtf = (pb * t_p - s_p * t_1) / det;
        fit.nuisance = (s_pp * t_1 - s_p * t_p) / det;
        const Eigen::RowVectorXcd resid =
            phi.cast<std::complex<double>>() * fit.rtf + Eigen::RowVectorXcd::Constant(blocks, fit.nuisance) - b;
        fit.residual = resid.norm();
        fit.valid = std::isfinite(fit.rtf.real()) && std::isfinite(fit.rtf.imag());
        if (fit.valid) {
            out.estimate.values(k) = fit.rtf;
            out.estimate.valid[static_cast<std::size_t>(k)] = true;
        }
    }
    return out;
}

RtfEstimate rtf_from_demixing(const DemixingMatrices& demix) {
    const Index half = demix.dft_len / 2 + 1;
    if (static_cast<Index>(demix.w.size()) != half)
        throw DimensionError("rtf_from_demixing: expected " + std::to_string(half) + " matrices, got " +
                             std::to_string(demix.w.size()));
    RtfEstimate est;
    est.dft_len = demix.dft_len;
    est.source = EstimatorKind::ExternalDemix;
    est.values = ComplexVector::Zero(half);
    est.valid.assign(static_cast<std::size_t>(half), false);
    for (Index k = 0; k < half; ++k) {
        const Eigen::Matrix2cd& w = demix.w[static_cast<std::size_t>(k)];
        if (w(0, 1) == std::complex<double>(0.0, 0.0)) continue;
        const double theta = bin_frequency(k, demix.dft_len);
        const std::complex<double> v =
            -w(0, 0) / w(0, 1) * std::polar(1.0, theta * static_cast<double>(demix.delay));
        if (std::isfinite(v.real()) && std::isfinite(v.imag())) {
            est.values(k) = v;
            est.valid[static_cast<std::size_t>(k)] = true;
        }
    }
    return est;
}

SeparatedSignals apply_demixing(const DemixingMatrices& demix, const Spectrogram& left,
                                const Spectrogram& right_delayed) {
    check_pair(left, right_delayed, "apply_demixing");
    const Index half = demix.dft_len / 2 + 1;
    if (left.dft_len != demix.dft_len || static_cast<Index>(demix.w.size()) != half)
        throw DimensionError("apply_demixing: demixing matrices do not match the spectrogram");
    SeparatedSignals y;
    y.first.resize(half, left.frames());
    y.second.resize(half, left.frames());
    for (Index k = 0; k < half; ++k) {
        const Eigen::Matrix2cd& w = demix.w[static_cast<std::size_t>(k)];
        y.first.row(k) = w(0, 0) * left.values.row(k) + w(0, 1) * right_delayed.values.row(k);
        y.second.row(k) = w(1, 0) * left.values.row(k) + w(1, 1) * right_delayed.values.row(k);
    }
    return y;
}

RtfEstimate rtf_from_filter(const ImpulseResponse& h, Index dft_len, EstimatorKind source) {
    if (h.size() > dft_len)
        throw DimensionError("rtf_from_filter: filter of " + std::to_string(h.size()) + " taps exceeds dft_len " +
                             std::to_string(dft_len));
    RealVector padded = RealVector::Zero(dft_len);
    padded.head(h.size()) = h.taps;
    RealFft fft(dft_len);
    RtfEstimate est;
    est.dft_len = dft_len;
    est.source = source;
    est.values = fft.forward_half(padded);
    for (Index k = 0; k < est.values.size(); ++k)
        est.values(k) *= std::polar(1.0, bin_frequency(k, dft_len) * static_cast<double>(h.delay));
    est.valid.assign(static_cast<std::size_t>(est.values.size()), true);
    return est;
}

ImpulseResponse filter_from_rtf(const RtfEstimate& est, Index delay) {
    const Index m = est.dft_len;
    ComplexVector half = ComplexVector::Zero(m / 2 + 1);
    for (Index k = 0; k < half.size(); ++k)
        if (est.is_valid(k))
            half(k) = est.values(k) * std::polar(1.0, -bin_frequency(k, m) * static_cast<double>(delay));
    RealFft fft(m);
    return {fft.inverse_half(half), delay};
}

}  // namespace rtfcs
