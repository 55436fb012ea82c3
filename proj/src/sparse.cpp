#include "rtfcs/sparse.hpp"

#include "rtfcs/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

namespace rtfcs {

RealVector weight_profile(const WeightProfileParams& p) {
    if (!(p.c1 > 0.0 && p.c2 > 0.0 && p.c3 > 0.0))
        throw InvalidArgument("weight_profile: c1, c2, c3 must be positive");
    if (p.length < 1 || p.delay < 0 || p.delay >= p.length)
        throw InvalidArgument("weight_profile: delay must lie in [0, length)");
    RealVector w(p.length);
    for (Index j = 0; j < p.length; ++j) {
        const double dist = std::abs(static_cast<double>(j - p.delay));
        w(j) = p.c1 * std::exp(p.c2 * std::pow(dist, p.c3));
        if (!std::isfinite(w(j))) {
            char msg[160];
            std::snprintf(msg, sizeof msg, "weight_profile: overflow at tap %ld (c1=%g, c2=%g, c3=%g, delay=%ld)",
                          static_cast<long>(j), p.c1, p.c2, p.c3, static_cast<long>(p.delay));
            throw NumericError(msg);
        }
    }
    return w;
}

RealVector soft_threshold(const RealVector& u, const RealVector& a) {
    if (u.size() != a.size()) throw DimensionError("soft_threshold: length mismatch");
    RealVector out(u.size());
    for (Index i = 0; i < u.size(); ++i) {
        const double mag = std::abs(u(i)) - a(i);
        out(i) = mag > 0.0 ? std::copysign(mag, u(i)) : 0.0;
    }
    return out;
}

void SolverConfig::validate() const {
    if (!(alpha_min > 0.0 && alpha_min <= alpha_max)) throw InvalidArgument("solver: need 0 < alpha_min <= alpha_max");
    if (!(tol > 0.0)) throw InvalidArgument("solver: tol must be positive");
    if (max_iters < 1) throw InvalidArgument("solver: max_iters must be >= 1");
    if (!(alpha0 > 0.0)) throw InvalidArgument("solver: alpha0 must be positive");
    if (nonmonotone_memory < 0) throw InvalidArgument("solver: nonmonotone_memory must be >= 0");
    if (!(sufficient_decrease >= 0.0 && sufficient_decrease < 1.0))
        throw InvalidArgument("solver: sufficient_decrease must lie in [0, 1)");
}

double clip_step(double dh_sq, double b_sq, double alpha_min, double alpha_max, double previous) {
    if (dh_sq == 0.0) return previous;
    const double raw = b_sq > 0.0 ? dh_sq / b_sq : std::numeric_limits<double>::infinity();
    return std::min(alpha_max, std::max(alpha_min, raw));
}

double bb_step(const RealVector& delta_h, const FrequencyBinSet& bins, double alpha_min, double alpha_max,
               double previous) {
    const RealVector b = realified_forward(delta_h, bins);
    return clip_step(delta_h.squaredNorm(), b.squaredNorm(), alpha_min, alpha_max, previous);
}

std::vector<Index> active_set_of(const RealVector& h) {
    std::vector<Index> gamma;
    for (Index i = 0; i < h.size(); ++i)
        if (h(i) != 0.0) gamma.push_back(i);
    return gamma;
}

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double crit_of(const RealVector& h, const RealVector& grad, const RealVector& w) {
    double acc = 0.0;
    for (Index i = 0; i < h.size(); ++i) {
        if (h(i) == 0.0) continue;
        const double v = grad(i) + w(i) * sign(h(i));
        acc += v * v;
    }
    return acc;
}

bool dual_feasible(const RealVector& h, const RealVector& grad, const RealVector& w, double slack) {
    for (Index i = 0; i < h.size(); ++i)
        if (h(i) == 0.0 && std::abs(grad(i)) > w(i) + slack) return false;
    return true;
}

}  // namespace

double optimality_crit(const SolverState& state, const RealVector& w) {
    if (state.h.size() != w.size() || state.grad.size() != w.size())
        throw DimensionError("optimality_crit: length mismatch");
    return crit_of(state.h, state.grad, w);
}

double wlasso_objective(const RealVector& residual, const RealVector& h, const RealVector& w) {
    return 0.5 * residual.squaredNorm() + w.cwiseProduct(h).cwiseAbs().sum();
}

bool check_kkt(const RealVector& h, const FrequencyBinSet& bins, const RealVector& rhs, const RealVector& w,
               double slack) {
    if (!(slack > 0.0)) throw InvalidArgument("check_kkt: slack must be positive");
    if (h.size() != w.size()) throw DimensionError("check_kkt: weight length mismatch");
    PartialDft op(bins);
    const RealVector grad = op.adjoint(op.apply(h) - rhs);
    for (Index i = 0; i < h.size(); ++i) {
        if (h(i) != 0.0) {
            if (std::abs(grad(i) + w(i) * sign(h(i))) > slack) return false;
        } else if (std::abs(grad(i)) > w(i) + slack) {
            return false;
        }
    }
    return true;
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace) {
    os << "iter,objective,crit,alpha,nnz\n";
    char line[160];
    for (const auto& t : trace) {
        std::snprintf(line, sizeof line, "%d,%.12e,%.12e,%.12e,%ld\n", t.iter, t.objective, t.crit, t.alpha,
                      static_cast<long>(t.nnz));
        os << line;
    }
}

SparsaSolver::SparsaSolver(const IncompleteRtf& rtf, RealVector weights, SolverConfig cfg,
                           const std::optional<RealVector>& h0)
    : op_(rtf.bins), w_(std::move(weights)), cfg_(cfg) {
    cfg_.validate();
    if (rtf.bins.empty()) throw InvalidArgument("sparsa_solve: empty bin set");
    const Index m = rtf.bins.dft_len();
    if (w_.size() != m)
        throw DimensionError("sparsa_solve: " + std::to_string(w_.size()) + " weights for dft_len " +
                             std::to_string(m));
    if (!w_.allFinite() || (w_.array() < 0.0).any())
        throw InvalidArgument("sparsa_solve: weights must be finite and nonnegative");
    rhs_ = realify(rtf.values, rtf.bins).rhs;

    state_.h = h0 ? *h0 : RealVector::Zero(m);
    if (state_.h.size() != m) throw DimensionError("sparsa_solve: initial iterate has wrong length");
    if (!state_.h.allFinite()) throw InvalidArgument("sparsa_solve: initial iterate must be finite");
    state_.r = op_.apply(state_.h) - rhs_;
    state_.grad = op_.adjoint(state_.r);
    state_.alpha = std::min(cfg_.alpha_max, std::max(cfg_.alpha_min, cfg_.alpha0));
    refresh_bookkeeping();
    recent_.push_back(objective());
}

void SparsaSolver::refresh_bookkeeping() {
    state_.active_set = active_set_of(state_.h);
    state_.crit = crit_of(state_.h, state_.grad, w_);
}

bool SparsaSolver::converged() const {
    if (state_.crit > cfg_.tol) return false;
    // With an empty active set the criterion is vacuous; require the dual
    // condition so h = 0 is only accepted when it is optimal.
    if (state_.active_set.empty() || cfg_.require_dual_feasibility)
        return dual_feasible(state_.h, state_.grad, w_, cfg_.tol);
    return true;
}

void SparsaSolver::step() {
    double alpha = state_.alpha;
    const double ref = recent_.empty() ? 0.0 : *std::max_element(recent_.begin(), recent_.end());
    RealVector next, dh, b;
    for (;;) {
        next = soft_threshold(state_.h - alpha * state_.grad, alpha * w_);
        dh = next - state_.h;
        b = op_.apply(dh);
        if (cfg_.nonmonotone_memory == 0 || alpha <= cfg_.alpha_min) break;
        const double phi = wlasso_objective(state_.r + b, next, w_);
        if (phi <= ref - cfg_.sufficient_decrease / (2.0 * alpha) * dh.squaredNorm()) break;
        alpha = std::max(cfg_.alpha_min, 0.5 * alpha);
    }
    state_.h = next;
    state_.r += b;
    state_.alpha = clip_step(dh.squaredNorm(), b.squaredNorm(), cfg_.alpha_min, cfg_.alpha_max, alpha);
    state_.grad = op_.adjoint(state_.r);
    ++state_.iter;
    if (!state_.h.allFinite() || !state_.r.allFinite() || !state_.grad.allFinite())
        throw NumericError("sparsa_solve: non-finite values at iteration " + std::to_string(state_.iter));
    refresh_bookkeeping();
    if (cfg_.nonmonotone_memory > 0) {
        recent_.push_back(objective());
        while (static_cast<int>(recent_.size()) > cfg_.nonmonotone_memory) recent_.pop_front();
    }
}

SolveResult sparsa_solve(const IncompleteRtf& rtf, const RealVector& weights, const SolverConfig& cfg,
                         const std::optional<RealVector>& h0) {
    SparsaSolver solver(rtf, weights, cfg, h0);
    SolveResult out;
    const auto record = [&] {
        const SolverState& s = solver.state();
        out.trace.push_back({s.iter, solver.objective(), s.crit, s.alpha, static_cast<Index>(s.active_set.size())});
    };
    record();
    while (!solver.converged() && solver.state().iter < cfg.max_iters) {
        solver.step();
        record();
    }
    out.converged = solver.converged();
    out.state = solver.state();
    out.h = {out.state.h, 0};
    return out;
}

IncompleteRtf assemble_incomplete_rtf(const RtfEstimate& est, const FrequencyBinSet& bins, Index delay) {
    if (bins.dft_len() != est.dft_len)
        throw DimensionError("assemble_incomplete_rtf: bin set and estimate disagree on dft_len");
    ComplexVector f(bins.size());
    for (Index j = 0; j < bins.size(); ++j) {
        const Index k = bins.indices()[static_cast<std::size_t>(j)];
        if (!est.is_valid(k))
            throw InvalidArgument("assemble_incomplete_rtf: bin " + std::to_string(k) + " is flagged invalid");
        f(j) = est.values(k) * std::polar(1.0, -bin_frequency(k, est.dft_len) * static_cast<double>(delay));
    }
    return {bins, std::move(f)};
}

ImpulseResponse reconstruct_rtf(const RtfEstimate& est, const FrequencyBinSet& bins,
                                const WeightProfileParams& params, const SolverConfig& cfg,
                                std::vector<TraceRow>* trace) {
    if (bins.empty()) throw InvalidArgument("reconstruct_rtf: empty bin set");
    if (params.length != est.dft_len)
        throw DimensionError("reconstruct_rtf: weight length " + std::to_string(params.length) +
                             " != dft_len " + std::to_string(est.dft_len));
    const IncompleteRtf rtf = assemble_incomplete_rtf(est, bins, params.delay);
    SolveResult res = sparsa_solve(rtf, weight_profile(params), cfg);
    if (trace) *trace = std::move(res.trace);
    return {std::move(res.h.taps), params.delay};
}

}  // namespace rtfcs
