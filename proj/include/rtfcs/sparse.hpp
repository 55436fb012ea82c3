#pragma once

#include "rtfcs/dft.hpp"
#include "rtfcs/estimators.hpp"
#include "rtfcs/signal.hpp"

#include <deque>
#include <iosfwd>
#include <optional>
#include <vector>

namespace rtfcs {

// w[j] = c1 * exp(c2 * |j - delay|^c3), j = 0..length-1. The minimum c1 sits
// on tap `delay`, where the direct-path peak of a delay-compensated relative
// impulse response is expected.
struct WeightProfileParams {
    double c1 = 0.1;
    double c2 = 0.11;
    double c3 = 0.3;
    Index delay = 100;
    Index length = 2048;
};

RealVector weight_profile(const WeightProfileParams& params);

// sign(u) * max(|u| - a, 0), elementwise.
RealVector soft_threshold(const RealVector& u, const RealVector& a);

struct SolverConfig {
    double alpha_min = 1e-7;
    double alpha_max = 1e3;
    double tol = 1e-3;
    int max_iters = 5000;
    double alpha0 = 1.0;
    // When set, every stop also requires |grad_j| <= w_j + tol off the
    // active set; otherwise that check applies only while the active set is
    // empty.
    bool require_dual_feasibility = false;
    // Step acceptance against the largest of the last `nonmonotone_memory`
    // objective values; a rejected step is halved. 0 takes every BB step as is.
    int nonmonotone_memory = 5;
    double sufficient_decrease = 1e-5;

    void validate() const;
};

// ||dh||^2 / ||F_S dh||^2 clipped to [alpha_min, alpha_max]; returns
// `previous` when dh is zero.
double bb_step(const RealVector& delta_h, const FrequencyBinSet& bins, double alpha_min, double alpha_max,
               double previous);
double clip_step(double dh_sq, double b_sq, double alpha_min, double alpha_max, double previous);

struct SolverState {
    RealVector h;     // iterate
    RealVector r;     // F_S h - f
    RealVector grad;  // F_S^T r
    double alpha = 1.0;
    std::vector<Index> active_set;
    int iter = 0;
    double crit = 0.0;
};

std::vector<Index> active_set_of(const RealVector& h);

// || (grad + w .* sign(h))_Gamma ||^2 over the active set Gamma.
double optimality_crit(const SolverState& state, const RealVector& w);

// 1/2 ||F_S h - f||^2 + ||w .* h||_1
double wlasso_objective(const RealVector& residual, const RealVector& h, const RealVector& w);

// Optimality conditions with slack: on the active set the stationarity
// residual is at most `slack` in max norm, off it |grad_j| <= w_j + slack.
bool check_kkt(const RealVector& h, const FrequencyBinSet& bins, const RealVector& rhs, const RealVector& w,
               double slack);

struct TraceRow {
    int iter = 0;
    double objective = 0.0;
    double crit = 0.0;
    double alpha = 0.0;
    Index nnz = 0;
};

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace);

// Proximal-gradient iterations for min 1/2 ||F_S h - f||^2 + ||w .* h||_1:
//   h <- soft(h - alpha grad, alpha w)
// with the residual updated incrementally from F_S dh and the step length
// set by the clipped Barzilai-Borwein ratio. A candidate must satisfy
//   phi(h+) <= max(recent phi) - sigma / (2 alpha) ||dh||^2
// or alpha is halved (never below alpha_min, where the step is taken).
class SparsaSolver {
public:
    SparsaSolver(const IncompleteRtf& rtf, RealVector weights, SolverConfig cfg,
                 const std::optional<RealVector>& h0 = std::nullopt);

    const SolverState& state() const { return state_; }
    const RealVector& rhs() const { return rhs_; }
    const RealVector& weights() const { return w_; }

    bool converged() const;
    // One iteration. Throws NumericError on non-finite values.
    void step();
    double objective() const { return wlasso_objective(state_.r, state_.h, w_); }

private:
    void refresh_bookkeeping();

    PartialDft op_;
    RealVector rhs_;
    RealVector w_;
    SolverConfig cfg_;
    SolverState state_;
    std::deque<double> recent_;
};

struct SolveResult {
    ImpulseResponse h;
    SolverState state;
    std::vector<TraceRow> trace;
    bool converged = false;
};

SolveResult sparsa_solve(const IncompleteRtf& rtf, const RealVector& weights, const SolverConfig& cfg,
                         const std::optional<RealVector>& h0 = std::nullopt);

// f_k = H(k) e^{-i theta_k D} for k in S. Every bin of S must be valid.
IncompleteRtf assemble_incomplete_rtf(const RtfEstimate& est, const FrequencyBinSet& bins, Index delay);

// Restricts the estimate to S, builds the weight profile and solves. The
// returned filter carries delay_ref = params.delay.
ImpulseResponse reconstruct_rtf(const RtfEstimate& est, const FrequencyBinSet& bins,
                                const WeightProfileParams& params, const SolverConfig& cfg,
                                std::vector<TraceRow>* trace = nullptr);

}  // namespace rtfcs
