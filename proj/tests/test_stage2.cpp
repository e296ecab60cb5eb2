#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include "varseg/simulate.hpp"
#include "varseg/stage2.hpp"

using namespace varseg;

namespace {

TimeSeries noise_series(int T, int p, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    TimeSeries y(T, p);
    for (int t = 0; t < T; ++t) {
        for (int j = 0; j < p; ++j) y(t, j) = z(rng) + (t > 0 ? 0.3 * y(t - 1, j) : 0.0);
    }
    return y;
}

TuningSchedule schedule_with(double eta, double omega)
{
    TuningSchedule s;
    s.eta_n = eta;
    s.omega_n = omega;
    return s;
}

} // namespace

TEST(FitSegment, LeastSquaresResidualOrthogonalToDesign)
{
    const auto y = noise_series(60, 3, 1);
    const SegmentRange range{10, 41};
    const auto fit = fit_segment(y, range, 2, 0.0);
    ASSERT_EQ(fit.theta.rows(), 3);
    ASSERT_EQ(fit.theta.cols(), 6);
    Matrix x(range.length(), 6), r(range.length(), 3);
    for (int t = range.start; t < range.end; ++t) {
        x.row(t - range.start) << y.row(t - 2), y.row(t - 3);
        r.row(t - range.start) = y.row(t - 1) - (fit.theta * x.row(t - range.start).transpose()).transpose();
    }
    EXPECT_LT((x.transpose() * r).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_NEAR(fit.sse, r.squaredNorm(), 1e-9);
    EXPECT_EQ(fit.penalty_weight, 0.0);
}

TEST(FitSegment, HugePenaltyGivesZero)
{
    const auto y = noise_series(40, 2, 2);
    const auto fit = fit_segment(y, {5, 30}, 1, 1e6);
    EXPECT_EQ(fit.theta.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(fit.l1_norm, 0.0);
}

TEST(FitSegment, UnivariateClosedForm)
{
    const auto y = noise_series(50, 1, 3);
    const SegmentRange range{2, 40};
    double sxy = 0.0, sxx = 0.0;
    for (int t = range.start; t < range.end; ++t) {
        sxy += y(t - 2, 0) * y(t - 1, 0);
        sxx += y(t - 2, 0) * y(t - 2, 0);
    }
    const int n = 50;
    for (double eta : {0.01, 0.1, 0.5}) {
        const auto fit = fit_segment(y, range, 1, eta);
        const double expected = soft_threshold(sxy, n * eta / 2.0) / sxx;
        EXPECT_NEAR(fit.theta(0, 0), expected, 1e-12) << "eta " << eta;
        EXPECT_DOUBLE_EQ(fit.penalty_weight, n * eta);
    }
}

TEST(FitSegment, TooShortSegmentIsInfeasible)
{
    const auto y = noise_series(30, 2, 4);
    EXPECT_THROW(fit_segment(y, {10, 12}, 2, 0.1), InfeasibleSubset);
    EXPECT_THROW(fit_segment(y, {10, 40}, 1, 0.1), InfeasibleSubset);
}

TEST(Partition, CoversTargetsWithoutOverlap)
{
    const auto parts = partition({30, 70}, 2, 100);
    ASSERT_EQ(parts.size(), 3u);
    EXPECT_EQ(parts[0], (SegmentRange{2, 30}));
    EXPECT_EQ(parts[1], (SegmentRange{30, 70}));
    EXPECT_EQ(parts[2], (SegmentRange{70, 101}));
    EXPECT_THROW(partition({30, 31}, 2, 100), InfeasibleSubset);
    EXPECT_THROW(partition({70, 30}, 2, 100), InfeasibleSubset);
}

TEST(EvaluateSubset, AdditiveOverSegments)
{
    const auto y = noise_series(120, 2, 5);
    const auto sched = schedule_with(0.05, 3.0);
    const auto ev = evaluate_subset(y, {40, 80}, 1, sched);
    double sum = 0.0;
    for (const auto& r : partition({40, 80}, 1, 120)) sum += fit_segment(y, r, 1, 0.05).objective();
    EXPECT_NEAR(ev.L_n, sum, 1e-10);
}

TEST(SegmentCache, MatchesFreshFitsAcrossThreads)
{
    const auto y = noise_series(100, 3, 6);
    SegmentCache cache(y, 1, 0.02);
    std::vector<std::thread> workers;
    for (int w = 0; w < 4; ++w) {
        workers.emplace_back([&cache, w] {
            for (int s = 2; s < 60; s += 7) cache.fit({s + w, s + w + 30});
        });
    }
    for (auto& t : workers) t.join();
    for (int w = 0; w < 4; ++w) {
        const SegmentRange r{2 + w, 32 + w};
        const auto cached = cache.fit(r);
        const auto fresh = fit_segment(y, r, 1, 0.02);
        EXPECT_EQ(cached.theta, fresh.theta);
        EXPECT_EQ(cached.sse, fresh.sse);
    }
}

TEST(MergeCandidates, KeepsLargestOfEachCluster)
{
    const auto merged = merge_candidates({20, 21, 22, 50, 90, 91}, {0.1, 0.5, 0.2, 0.3, 0.9, 0.1}, 1, 100);
    EXPECT_EQ(merged, (std::vector<int>{21, 50, 90}));
}

TEST(MergeCandidates, DropsBoundaryCandidates)
{
    const auto merged = merge_candidates({3, 50, 99}, {1.0, 1.0, 1.0}, 2, 100);
    EXPECT_EQ(merged, (std::vector<int>{50}));
    for (int t : merged) EXPECT_NO_THROW(partition({t}, 2, 100));
}

TEST(MergeCandidates, ResultIsAlwaysFeasible)
{
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        const int d = 1 + trial % 3;
        std::vector<int> times;
        std::vector<double> mags;
        for (int t = 1; t <= 80; ++t) {
            if (rng() % 4 == 0) {
                times.push_back(t);
                mags.push_back(static_cast<double>(rng() % 1000));
            }
        }
        const auto merged = merge_candidates(times, mags, d, 80);
        EXPECT_NO_THROW(partition(merged, d, 80));
    }
}

TEST(SelectBreaks, HugeOmegaSelectsNothing)
{
    const auto y = noise_series(100, 2, 9);
    const auto res = select_breaks(y, std::vector<int>{30, 60}, 1, schedule_with(0.01, 1e12));
    EXPECT_TRUE(res.breaks.empty());
    EXPECT_NEAR(res.ic, res.L_n, 1e-9);
}

TEST(SelectBreaks, IcIdentityAndTrace)
{
    const auto cfg = make_scenario(Scenario::kCenter, 3);
    const auto y = simulate(cfg);
    const auto sched = schedule_with(0.001, 0.05);
    const auto res = select_breaks(y, std::vector<int>{60, 100, 150, 200, 240}, 1, sched);
    EXPECT_NEAR(res.ic, res.L_n + static_cast<double>(res.m_final()) * sched.omega_n, 1e-9 * std::abs(res.ic));
    for (const auto& e : res.trace) {
        const auto ev = evaluate_subset(y, e.subset, 1, sched);
        EXPECT_NEAR(e.ic, ev.L_n + static_cast<double>(e.subset.size()) * sched.omega_n, 1e-9 * std::abs(e.ic));
    }
    bool empty_scored = false;
    for (const auto& e : res.trace) empty_scored |= e.subset.empty();
    EXPECT_TRUE(empty_scored);
}

TEST(SelectBreaks, ExhaustiveIsBruteForceOptimal)
{
    const auto y = simulate(make_scenario(Scenario::kCenter, 4));
    const std::vector<int> cands{50, 100, 130, 200, 260};
    const auto sched = schedule_with(0.001, 0.05);
    ScreeningOptions opts;
    opts.strategy = SearchStrategy::kExhaustive;
    const auto res = select_breaks(y, cands, 1, sched, opts);
    ASSERT_EQ(res.trace.size(), 32u);

    double best = std::numeric_limits<double>::infinity();
    std::vector<int> arg;
    for (unsigned mask = 0; mask < 32; ++mask) {
        std::vector<int> s;
        for (unsigned b = 0; b < 5; ++b) {
            if (mask & (1u << b)) s.push_back(cands[b]);
        }
        const double ic = evaluate_subset(y, s, 1, sched).L_n + static_cast<double>(s.size()) * sched.omega_n;
        if (ic < best) {
            best = ic;
            arg = s;
        }
    }
    EXPECT_EQ(res.breaks, arg);
    EXPECT_NEAR(res.ic, best, 1e-12 * std::abs(best));
}

TEST(SelectBreaks, ExhaustiveAboveCapFallsBack)
{
    const auto y = noise_series(100, 1, 10);
    ScreeningOptions opts;
    opts.strategy = SearchStrategy::kExhaustive;
    opts.exhaustive_cap = 2;
    const auto res = select_breaks(y, std::vector<int>{20, 40, 60}, 1, schedule_with(0.01, 1.0), opts);
    EXPECT_EQ(res.strategy, SearchStrategy::kBackward);
    EXPECT_EQ(screening_to_json(res)["strategy"], "backward");
}

TEST(SelectBreaks, TieBreakPrefersFewerBreaks)
{
    // Zero data: every subset has L_n = 0, so IC = m * omega and omega = 0 ties all of them.
    const TimeSeries y = TimeSeries::Zero(60, 1);
    ScreeningOptions opts;
    opts.strategy = SearchStrategy::kExhaustive;
    const auto res = select_breaks(y, std::vector<int>{20, 40}, 1, schedule_with(0.1, 0.0), opts);
    EXPECT_TRUE(res.breaks.empty());
}

TEST(SelectBreaks, RejectsUnsortedCandidates)
{
    const auto y = noise_series(60, 1, 11);
    EXPECT_THROW(select_breaks(y, std::vector<int>{40, 20}, 1, schedule_with(0.1, 1.0)), InvalidArgument);
}

TEST(StrategyName, RoundTrip)
{
    EXPECT_EQ(strategy_from_name(strategy_name(SearchStrategy::kExhaustive)), SearchStrategy::kExhaustive);
    EXPECT_EQ(strategy_from_name("backward"), SearchStrategy::kBackward);
    EXPECT_THROW(strategy_from_name("forward"), InvalidArgument);
}
