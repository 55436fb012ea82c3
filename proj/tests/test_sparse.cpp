#include "oracles.hpp"

#include "rtfcs/dft.hpp"
#include "rtfcs/error.hpp"
#include "rtfcs/sparse.hpp"

#include <doctest.h>

#include <sstream>

using namespace rtfcs;

namespace {

struct Problem {
    FrequencyBinSet bins;
    RealVector h_true;
    IncompleteRtf rtf;
    RealVector rhs;
    Eigen::MatrixXd a;
};

Problem planted(Index m, Index nbins, Index k, std::uint64_t seed) {
    rtfcs::CounterRng rng(seed, "planted");
    std::vector<Index> all;
    for (Index b = 1; b < m / 2; ++b) all.push_back(b);
    for (std::size_t i = 0; i < all.size(); ++i) {
        const auto j = i + static_cast<std::size_t>(rng.uniform() * static_cast<double>(all.size() - i));
        std::swap(all[i], all[std::min(j, all.size() - 1)]);
    }
    std::vector<Index> bins(all.begin(), all.begin() + nbins);
    std::sort(bins.begin(), bins.end());
    Problem p;
    p.bins = FrequencyBinSet(m, bins);
    p.h_true = RealVector::Zero(m);
    for (Index i = 0; i < k; ++i) {
        const auto at = static_cast<Index>(rng.uniform() * static_cast<double>(m));
        p.h_true(at) = rng.uniform(0.5, 2.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    }
    p.a = oracle::realified_matrix(m, bins);
    p.rhs = p.a * p.h_true;
    const Index s = p.bins.size();
    ComplexVector f(s);
    for (Index j = 0; j < s; ++j) f(j) = {p.rhs(j), p.rhs(s + j)};
    p.rtf = IncompleteRtf(p.bins, f);
    return p;
}

SolverConfig tight(double tol = 1e-14, int iters = 200000) {
    SolverConfig c;
    c.tol = tol;
    c.max_iters = iters;
    return c;
}

}  // namespace

TEST_CASE("weight_profile") {
    WeightProfileParams p;  // c1=0.1, c2=0.11, c3=0.3, D=100, M=2048
    const RealVector w = weight_profile(p);
    CHECK(w.size() == 2048);
    CHECK(w(100) == 0.1);
    CHECK(w(200) == doctest::Approx(0.1 * std::exp(0.11 * std::pow(100.0, 0.3))).epsilon(1e-14));
    for (Index t = 1; t <= 100; ++t) CHECK(w(100 + t) == w(100 - t));
    CHECK(w.minCoeff() == 0.1);
    p.c2 = 50.0;
    p.c3 = 1.0;
    CHECK_THROWS_AS(weight_profile(p), NumericError);
    p = {};
    p.c1 = 0.0;
    CHECK_THROWS_AS(weight_profile(p), InvalidArgument);
    p = {};
    p.delay = 2048;
    CHECK_THROWS_AS(weight_profile(p), InvalidArgument);
}

TEST_CASE("soft_threshold") {
    RealVector u(3), a(3), expect(3);
    u << 3.0, -0.5, -2.0;
    a << 1.0, 1.0, 0.5;
    expect << 2.0, 0.0, -1.5;
    CHECK(soft_threshold(u, a) == expect);
    const RealVector r = oracle::gaussian(200, 1, "u");
    const RealVector t = oracle::gaussian(200, 1, "a").cwiseAbs();
    const RealVector s = soft_threshold(r, t);
    for (Index i = 0; i < 200; ++i) CHECK((s(i) == 0.0 || (s(i) > 0) == (r(i) > 0)));
    CHECK_THROWS_AS(soft_threshold(u, RealVector::Ones(2)), DimensionError);
}

TEST_CASE("bb_step") {
    RealVector e0 = RealVector::Zero(4);
    e0(0) = 1.0;
    CHECK(bb_step(e0, FrequencyBinSet(4, {1}), 1e-7, 1e3, 0.5) == doctest::Approx(1.0));
    CHECK(clip_step(1e9, 1.0, 1e-7, 1e3, 0.5) == 1e3);
    CHECK(clip_step(1e-12, 1.0, 1e-7, 1e3, 0.5) == 1e-7);
    CHECK(clip_step(0.0, 0.0, 1e-7, 1e3, 0.5) == 0.5);
    CHECK(bb_step(RealVector::Zero(4), FrequencyBinSet(4, {1}), 1e-7, 1e3, 0.25) == 0.25);
    // Delta in the null space of F_S: the ratio is unbounded, so alpha_max.
    RealVector alt(4);
    alt << 1, -1, 1, -1;  // lives on bin 2 only
    CHECK(bb_step(alt, FrequencyBinSet(4, {1}), 1e-7, 1e3, 0.5) == 1e3);
}

TEST_CASE("optimality_crit") {
    const FrequencyBinSet bins(4, {1});
    const Eigen::MatrixXd a = oracle::realified_matrix(4, {1});
    RealVector rhs(2);
    rhs << 0.7, -0.2;
    const RealVector w = RealVector::Constant(4, 0.1);
    SolverState s;
    s.h = RealVector::Zero(4);
    s.grad = a.transpose() * (a * s.h - rhs);
    CHECK(optimality_crit(s, w) == 0.0);

    s.h(1) = 0.3;  // 1-sparse, hand-built
    s.grad = a.transpose() * (a * s.h - rhs);
    const double v = s.grad(1) + 0.1;
    CHECK(optimality_crit(s, w) == doctest::Approx(v * v).epsilon(1e-14));
    s.h(1) = -0.3;
    s.grad = a.transpose() * (a * s.h - rhs);
    const double v2 = s.grad(1) - 0.1;
    CHECK(optimality_crit(s, w) == doctest::Approx(v2 * v2).epsilon(1e-14));
}

TEST_CASE("sparsa_solve: zero data stops at once") {
    const FrequencyBinSet bins(16, {1, 3, 5});
    const IncompleteRtf rtf(bins, ComplexVector::Zero(3));
    const SolveResult r = sparsa_solve(rtf, RealVector::Constant(16, 0.1), SolverConfig{});
    CHECK(r.converged);
    CHECK(r.state.iter == 0);
    CHECK(r.h.taps.isZero(0.0));
    CHECK(r.trace.size() == 1);
    CHECK(check_kkt(RealVector::Zero(16), bins, RealVector::Zero(6), RealVector::Constant(16, 0.1), 1e-12));
}

TEST_CASE("sparsa_solve: empty active set does not stop early") {
    // h = 0 has crit 0 but is not optimal; the dual check keeps iterating.
    const Problem p = planted(32, 8, 2, 1);
    const RealVector w = RealVector::Constant(32, 1e-4);
    const SolveResult r = sparsa_solve(p.rtf, w, SolverConfig{});
    CHECK(r.state.iter > 0);
    CHECK((r.h.taps.array() != 0.0).any());
}

TEST_CASE("sparsa_solve: single spike M=64, |S|=16") {
    const Index m = 64, d = 20;
    Problem p = planted(m, 16, 0, 7);
    p.h_true(d) = 1.0;
    p.rhs = p.a * p.h_true;
    ComplexVector f(16);
    for (Index j = 0; j < 16; ++j) f(j) = {p.rhs(j), p.rhs(16 + j)};
    const IncompleteRtf rtf(p.bins, f);
    WeightProfileParams wp;
    wp.c1 = 1e-3;  // defaults scaled down
    wp.delay = d;
    wp.length = m;
    const SolveResult r = sparsa_solve(rtf, weight_profile(wp), tight(1e-12));
    CHECK(r.converged);
    Index peak = 0;
    r.h.taps.cwiseAbs().maxCoeff(&peak);
    CHECK(peak == d);
    CHECK(oracle::max_abs(r.h.taps - p.h_true) <= 1e-3);
}

TEST_CASE("sparsa_solve: KKT and objective dominance on small planted problems") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        CAPTURE(seed);
        const Problem p = planted(32, 8, 2, seed);
        const RealVector w = RealVector::Constant(32, 1e-4);
        const SolveResult r = sparsa_solve(p.rtf, w, tight());
        CHECK(check_kkt(r.h.taps, p.bins, p.rhs, w, 1e-4));
        const double obj = oracle::objective(p.a, r.h.taps, p.rhs, w);
        CHECK(obj <= oracle::objective(p.a, p.h_true, p.rhs, w) + 1e-12);
        CHECK(obj <= oracle::objective(p.a, RealVector::Zero(32), p.rhs, w));
        CHECK(r.trace.back().objective == doctest::Approx(obj).epsilon(1e-9));
    }
}

TEST_CASE("check_kkt detects a perturbed solution") {
    const Problem p = planted(32, 8, 2, 3);
    const RealVector w = RealVector::Constant(32, 1e-3);
    const SolveResult r = sparsa_solve(p.rtf, w, tight());
    REQUIRE(check_kkt(r.h.taps, p.bins, p.rhs, w, 1e-4));
    RealVector bad = r.h.taps;
    Index at = 0;
    bad.cwiseAbs().maxCoeff(&at);
    bad(at) += 10.0 * w.minCoeff() * (bad(at) > 0 ? 1.0 : -1.0);
    CHECK_FALSE(check_kkt(bad, p.bins, p.rhs, w, 1e-4));
    CHECK_THROWS_AS(check_kkt(bad, p.bins, p.rhs, w, 0.0), InvalidArgument);
}

TEST_CASE("property: solver state stays consistent with the iterate") {
    const Problem p = planted(64, 20, 4, 5);
    const RealVector w = RealVector::Constant(64, 1e-3);
    SparsaSolver solver(p.rtf, w, SolverConfig{});
    for (int t = 0; t < 200 && !solver.converged(); ++t) {
        solver.step();
        const SolverState& s = solver.state();
        const RealVector r = p.a * s.h - p.rhs;
        CHECK(oracle::max_abs(s.r - r) <= 1e-9);
        CHECK(oracle::max_abs(s.grad - p.a.transpose() * r) <= 1e-9);
        CHECK(s.active_set == active_set_of(s.h));
        CHECK(s.alpha >= 1e-7);
        CHECK(s.alpha <= 1e3);
    }
}

TEST_CASE("property: identical inputs give bitwise identical traces") {
    const Problem p = planted(64, 16, 3, 8);
    const RealVector w = RealVector::Constant(64, 1e-3);
    const SolveResult a = sparsa_solve(p.rtf, w, SolverConfig{});
    const SolveResult b = sparsa_solve(p.rtf, w, SolverConfig{});
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        CHECK(a.trace[i].objective == b.trace[i].objective);
        CHECK(a.trace[i].crit == b.trace[i].crit);
        CHECK(a.trace[i].alpha == b.trace[i].alpha);
        CHECK(a.trace[i].nnz == b.trace[i].nnz);
    }
    CHECK(a.h.taps == b.h.taps);
}

TEST_CASE("property: one iteration from a verified optimum stays put") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        CAPTURE(seed);
        const Problem p = planted(32, 10, 2, 100 + seed);
        const RealVector w = RealVector::Constant(32, 1e-2);
        const SolveResult r = sparsa_solve(p.rtf, w, tight());
        const RealVector star = oracle::polish_on_support(p.a, r.h.taps, p.rhs, w);
        REQUIRE(check_kkt(star, p.bins, p.rhs, w, 1e-9));
        SolverConfig one;
        one.max_iters = 1;
        one.tol = 1e-300;
        const SolveResult next = sparsa_solve(p.rtf, w, one, star);
        CHECK(next.state.iter == 1);
        CHECK(oracle::max_abs(next.h.taps - star) <= 1e-10);
    }
}

TEST_CASE("property: larger weights do not grow the support (reported)") {
    int violations = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Problem p = planted(64, 16, 4, 200 + seed);
        const RealVector w = RealVector::Constant(64, 1e-2);
        const auto nnz = [&](double c) {
            const SolveResult r = sparsa_solve(p.rtf, c * w, tight(1e-12, 50000));
            return (r.h.taps.array() != 0.0).count();
        };
        if (nnz(4.0) > nnz(1.0)) ++violations;
    }
    MESSAGE("support-growth violations over 20 seeds: " << violations);
    CHECK(violations <= 20);
}

TEST_CASE("sparsa_solve: argument errors") {
    const FrequencyBinSet bins(16, {1, 2});
    const IncompleteRtf rtf(bins, ComplexVector::Ones(2));
    CHECK_THROWS_AS(sparsa_solve(rtf, RealVector::Ones(15), SolverConfig{}), DimensionError);
    CHECK_THROWS_AS(sparsa_solve(rtf, -RealVector::Ones(16), SolverConfig{}), InvalidArgument);
    CHECK_THROWS_AS(sparsa_solve(IncompleteRtf(FrequencyBinSet(16, {}), ComplexVector()), RealVector::Ones(16),
                                 SolverConfig{}),
                    InvalidArgument);
    SolverConfig bad;
    bad.alpha_min = 2e3;
    CHECK_THROWS_AS(sparsa_solve(rtf, RealVector::Ones(16), bad), InvalidArgument);
    bad = {};
    bad.max_iters = 0;
    CHECK_THROWS_AS(sparsa_solve(rtf, RealVector::Ones(16), bad), InvalidArgument);
}

TEST_CASE("reconstruct_rtf recovers a sparse relative response from all valid bins") {
    const Index m = 128, d = 10;
    RealVector h = RealVector::Zero(m);
    h(0) = 1.0;
    h(3) = -0.4;
    h(9) = 0.25;
    h(m - 2) = 0.1;  // acausal tap, lands at d - 2 after compensation
    const RtfEstimate est = rtf_from_filter({h, 0}, m, EstimatorKind::Fd);
    WeightProfileParams wp;
    wp.c1 = 1e-4;
    wp.delay = d;
    wp.length = m;
    const ImpulseResponse g = reconstruct_rtf(est, est.valid_interior(), wp, tight(1e-14));
    CHECK(g.delay == d);
    RealVector expect = RealVector::Zero(m);
    for (Index i = 0; i < m; ++i) expect((i + d) % m) = h(i);
    CHECK(oracle::max_abs(g.taps - expect) <= 1e-3);

    CHECK_THROWS_AS(reconstruct_rtf(est, FrequencyBinSet(m, {}), wp, SolverConfig{}), InvalidArgument);
    RtfEstimate holed = est;
    holed.valid[5] = false;
    CHECK_THROWS_AS(reconstruct_rtf(holed, FrequencyBinSet(m, {4, 5}), wp, SolverConfig{}), InvalidArgument);
    wp.length = 64;
    CHECK_THROWS_AS(reconstruct_rtf(est, est.valid_interior(), wp, SolverConfig{}), DimensionError);
}

TEST_CASE("assemble_incomplete_rtf applies the delay factor") {
    const Index m = 16;
    RtfEstimate est;
    est.dft_len = m;
    est.values = ComplexVector::Ones(m / 2 + 1);
    est.valid.assign(m / 2 + 1, true);
    const IncompleteRtf r = assemble_incomplete_rtf(est, FrequencyBinSet(m, {1, 4}), 3);
    CHECK(std::abs(r.values(0) - std::polar(1.0, -2.0 * std::numbers::pi * 3.0 / 16.0)) < 1e-15);
    CHECK(std::abs(r.values(1) - std::polar(1.0, -2.0 * std::numbers::pi * 12.0 / 16.0)) < 1e-15);
}

TEST_CASE("trace CSV") {
    const Problem p = planted(32, 8, 2, 4);
    const SolveResult r = sparsa_solve(p.rtf, RealVector::Constant(32, 1e-3), SolverConfig{});
    std::ostringstream ss;
    write_trace_csv(ss, r.trace);
    std::istringstream in(ss.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "iter,objective,crit,alpha,nnz");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == static_cast<int>(r.trace.size()));
    CHECK(r.trace.front().iter == 0);
    CHECK(r.trace.back().iter == r.state.iter);
}
