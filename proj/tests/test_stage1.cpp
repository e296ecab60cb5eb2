#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>

#include "support/prox_gradient.hpp"
#include "varseg/simulate.hpp"
#include "varseg/stage1.hpp"

using namespace varseg;

namespace {

TimeSeries random_series(int T, int p, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    TimeSeries y(T, p);
    for (int t = 0; t < T; ++t) {
        for (int j = 0; j < p; ++j) y(t, j) = z(rng) + (t > T / 2 ? 1.5 : 0.0) * (t > 0 ? y(t - 1, j) * 0.4 : 0.0);
    }
    return y;
}

void expect_monotone(const ThetaEstimate& est)
{
    for (std::size_t k = 1; k < est.objective_trace.size(); ++k) {
        EXPECT_LE(est.objective_trace[k], est.objective_trace[k - 1] + 1e-10) << "sweep " << k;
    }
}

} // namespace

TEST(BuildStage1, HandComputedUnivariate)
{
    TimeSeries y(3, 1);
    y << 1.0, 2.0, 3.0;
    const auto prob = build_stage1(y, 1);
    ASSERT_EQ(prob.n, 3);
    // rows: (x, y) = (0, 1), (1, 2), (2, 3)
    EXPECT_DOUBLE_EQ(prob.gram[0](0, 0), 5.0);
    EXPECT_DOUBLE_EQ(prob.gram[1](0, 0), 5.0);
    EXPECT_DOUBLE_EQ(prob.gram[2](0, 0), 4.0);
    EXPECT_DOUBLE_EQ(prob.cross[1](0, 0), 8.0);
    EXPECT_DOUBLE_EQ(prob.cross[2](0, 0), 6.0);
}

TEST(BuildStage1, SuffixSumsTelescope)
{
    const auto y = random_series(40, 3, 7);
    const auto prob = build_stage1(y, 2);
    ASSERT_EQ(prob.n, 39);
    for (int i = 0; i + 1 < prob.n; ++i) {
        const Matrix x = prob.lagged.row(i).transpose();
        EXPECT_LT((prob.gram[i] - prob.gram[i + 1] - x * x.transpose()).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LT((prob.cross[i] - prob.cross[i + 1] - x * prob.targets.row(i)).cwiseAbs().maxCoeff(), 1e-10);
    }
    // row 1 targets t = 2: lag 1 is y_1, lag 2 is pre-sample
    EXPECT_EQ(prob.lagged.row(0).head(3), y.row(0));
    EXPECT_EQ(prob.lagged.row(0).tail(3).cwiseAbs().maxCoeff(), 0.0);
}

TEST(SoftThreshold, Examples)
{
    Matrix x(1, 3);
    x << 3.0, -0.5, -2.0;
    const Matrix s = soft_threshold(x, 1.0);
    EXPECT_DOUBLE_EQ(s(0, 0), 2.0);
    EXPECT_DOUBLE_EQ(s(0, 1), 0.0);
    EXPECT_DOUBLE_EQ(s(0, 2), -1.0);
    EXPECT_DOUBLE_EQ(soft_threshold(0.7, 0.0), 0.7);
}

TEST(SoftThreshold, ShrinksMagnitude)
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z(0.0, 2.0);
    for (int k = 0; k < 200; ++k) {
        const double v = z(rng), lam = std::abs(z(rng));
        const double s = soft_threshold(v, lam);
        EXPECT_LE(std::abs(s), std::abs(v));
        EXPECT_GE(s * v, 0.0);
        EXPECT_NEAR(std::abs(s), std::max(std::abs(v) - lam, 0.0), 1e-15);
    }
}

TEST(Bcd, HugeLambdaGivesZero)
{
    const auto prob = build_stage1(random_series(30, 2, 11), 1);
    const auto est = bcd_solve(prob, 1e6);
    EXPECT_TRUE(est.converged);
    for (const auto& b : est.theta) EXPECT_EQ(b.cwiseAbs().maxCoeff(), 0.0);
    const auto cands = extract_candidates(est, default_zero_tol(est), 1);
    EXPECT_EQ(cands.m_hat(), 0u);
}

TEST(Bcd, MatchesProximalGradientOracle)
{
    std::mt19937_64 rng(2024);
    for (int inst = 0; inst < 8; ++inst) {
        const int p = 1 + inst % 3, d = 1 + inst % 2;
        const int T = 14 + 3 * inst;
        const auto y = random_series(T, p, rng());
        const double lambda = std::array{0.01, 0.1, 1.0}[inst % 3];
        BcdOptions opts;
        opts.tol = 1e-10;
        opts.max_sweeps = 20000;
        const auto prob = build_stage1(y, d);
        const auto est = bcd_solve(prob, lambda, opts);
        const double f_bcd = stage1_objective(prob, est.theta, lambda);
        const auto dense = oracle::dense_tv_problem(y, d);
        const double f_oracle = oracle::prox_gradient_minimum(dense, lambda);
        EXPECT_LE(std::abs(f_bcd - f_oracle), 1e-6 * std::abs(f_oracle)) << "instance " << inst;
        expect_monotone(est);
    }
}

TEST(Bcd, ObjectiveAgreesWithDenseDesign)
{
    const auto y = random_series(20, 2, 5);
    const auto prob = build_stage1(y, 2);
    const auto est = bcd_solve(prob, 0.05);
    const auto dense = oracle::dense_tv_problem(y, 2);
    Matrix B(static_cast<Eigen::Index>(prob.n) * prob.width(), prob.p);
    for (int i = 0; i < prob.n; ++i) B.middleRows(static_cast<Eigen::Index>(i) * prob.width(), prob.width()) = est.theta[i];
    EXPECT_NEAR(stage1_objective(prob, est.theta, 0.05), oracle::dense_objective(dense, B, 0.05), 1e-10);
}

TEST(Bcd, KktPassesAtConvergenceAndFailsWhenPerturbed)
{
    const auto y = simulate(make_scenario(Scenario::kCenter, 9));
    const auto prob = build_stage1(y / std::sqrt(y.squaredNorm() / static_cast<double>(y.size())), 1);
    const double lambda = default_schedule(prob.n, prob.p, 1, 0.5, 0.5).lambda_n;
    BcdOptions opts;
    opts.tol = 1e-8;
    opts.max_sweeps = 5000;
    const auto est = bcd_solve(prob, lambda, opts);
    ASSERT_TRUE(est.converged);
    const auto ok = kkt_check(prob, est, lambda, 1e-3);
    EXPECT_TRUE(ok.pass) << ok.failing_blocks.size() << " failing blocks";
    expect_monotone(est);

    auto bad = est;
    bad.theta[prob.n / 2](0, 0) += 0.5;
    EXPECT_FALSE(kkt_check(prob, bad, lambda, 1e-3).pass);
}

TEST(Bcd, InverseThresholdVariantRunsMonotoneOnDiagonalGram)
{
    // p = d = 1 makes every G_i a scalar, where the variant is an exact block minimizer
    const auto prob = build_stage1(random_series(40, 1, 21), 1);
    BcdOptions opts;
    opts.update = BlockUpdate::kInverseThreshold;
    opts.ridge_factor = 0.0;
    opts.tol = 1e-9;
    opts.max_sweeps = 5000;
    const auto est = bcd_solve(prob, 0.1, opts);
    expect_monotone(est);
    BcdOptions exact = opts;
    exact.update = BlockUpdate::kExact;
    const auto ref = bcd_solve(prob, 0.1, exact);
    EXPECT_NEAR(stage1_objective(prob, est.theta, 0.1), stage1_objective(prob, ref.theta, 0.1), 1e-8);
}

TEST(Bcd, WarmStartFromSolutionStopsImmediately)
{
    const auto prob = build_stage1(random_series(30, 2, 4), 1);
    BcdOptions opts;
    opts.tol = 1e-9;
    opts.max_sweeps = 5000;
    const auto est = bcd_solve(prob, 0.2, opts);
    const auto again = bcd_solve(prob, 0.2, opts, est);
    EXPECT_LE(again.iterations, 2);
    EXPECT_NEAR(again.objective_trace.back(), est.objective_trace.back(), 1e-12);
}

TEST(Bcd, RejectsBadLambda)
{
    const auto prob = build_stage1(random_series(10, 1, 1), 1);
    EXPECT_THROW(bcd_solve(prob, -1.0), InvalidArgument);
}

TEST(Candidates, SingleJumpAtBlockThree)
{
    ThetaEstimate est;
    est.theta.assign(6, Matrix::Zero(1, 1));
    est.theta[0](0, 0) = 0.4;
    est.theta[2](0, 0) = -0.3;
    const auto c = extract_candidates(est, 1e-6, 1);
    ASSERT_EQ(c.m_hat(), 1u);
    EXPECT_EQ(c.indices[0], 3);
    EXPECT_EQ(c.times[0], 3);
    ASSERT_EQ(c.segment_coefficients.size(), 2u);
    EXPECT_DOUBLE_EQ(c.segment_coefficients[0](0, 0), 0.4);
    EXPECT_NEAR(c.segment_coefficients[1](0, 0), 0.1, 1e-15);
}

TEST(Candidates, TimesShiftByLagOrder)
{
    ThetaEstimate est;
    est.theta.assign(8, Matrix::Zero(2, 1));
    est.theta[4](1, 0) = 1.0;
    const auto c = extract_candidates(est, 1e-6, 2);
    ASSERT_EQ(c.m_hat(), 1u);
    EXPECT_EQ(c.indices[0], 5);
    EXPECT_EQ(c.times[0], 6);
    EXPECT_EQ(c.segment_coefficients[0].rows(), 1);
    EXPECT_EQ(c.segment_coefficients[0].cols(), 2);
}

TEST(Candidates, ZeroTolFiltersTinyIncrements)
{
    ThetaEstimate est;
    est.theta.assign(4, Matrix::Zero(1, 1));
    est.theta[1](0, 0) = 1e-9;
    est.theta[3](0, 0) = 1e-3;
    EXPECT_EQ(extract_candidates(est, 1e-6, 1).m_hat(), 1u);
    EXPECT_EQ(extract_candidates(est, 1e-12, 1).m_hat(), 2u);
    EXPECT_DOUBLE_EQ(default_zero_tol(est), 1e-6);
}

TEST(Stage1Json, Fields)
{
    ThetaEstimate est;
    est.theta.assign(4, Matrix::Zero(1, 1));
    est.theta[2](0, 0) = 0.5;
    est.lambda = 0.1;
    est.converged = true;
    const auto doc = stage1_to_json(est, extract_candidates(est, 1e-6, 1));
    EXPECT_EQ(doc["candidates"], nlohmann::json::array({3}));
    EXPECT_EQ(doc["segments"].size(), 2u);
    EXPECT_TRUE(doc["converged"].get<bool>());
}
