#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "varseg/model.hpp"

namespace varseg {

/**
 * Sufficient statistics of the stacked total-variation regression.
 *
 * Regression rows are l = 1..n with n = T - d + 1. Row l targets time
 * t = l + d - 1 and its lag vector is x_l = (y_{t-1}, ..., y_{t-d}); lags
 * before t = 1 are zero. Row l loads on blocks 1..l, so the fitted value is
 * (theta_1 + ... + theta_l) x_l.
 *
 * Everything is stored 0-based: gram[i] holds G_{i+1} = sum_{l>=i+1} x_l x_l^T
 * and cross[i] holds c_{i+1} = sum_{l>=i+1} x_l y_l^T.
 */
struct Stage1Problem {
    int n = 0;
    int p = 0;
    int d = 0;
    Matrix lagged;   ///< n x pd, row l-1 = x_l^T
    Matrix targets;  ///< n x p, row l-1 = y_l^T
    std::vector<Matrix> gram;   ///< n blocks, pd x pd
    std::vector<Matrix> cross;  ///< n blocks, pd x p

    int width() const { return p * d; }
};

/// Suffix sums are built in one backward pass.
Stage1Problem build_stage1(const TimeSeries& data, int d);

/// Element-wise sign(x) * max(|x| - lambda, 0).
Matrix soft_threshold(const Matrix& x, double lambda);
double soft_threshold(double x, double lambda);

/// Stage-1 coefficient blocks. theta[i] stores (theta_{i+1})^T, shape pd x p.
struct ThetaEstimate {
    std::vector<Matrix> theta;
    double lambda = 0.0;
    int iterations = 0;
    bool converged = false;
    /// Objective at the starting point followed by one entry per sweep.
    std::vector<double> objective_trace;

    /// Increment theta_i (1-based) in p x pd orientation.
    Matrix increment(std::size_t i) const { return theta.at(i - 1).transpose(); }
};

enum class BlockUpdate {
    /// Minimizes the block subproblem exactly (inner coordinate descent on the
    /// block's Gram). Fixed points satisfy the KKT system.
    kExact,
    /// theta_i^T <- (G_i + rho I)^{-1} S(r_i; n lambda / 2). Cheap, but not a
    /// block minimizer unless G_i is diagonal.
    kInverseThreshold,
};

struct BcdOptions {
    int max_sweeps = 200;
    double tol = 1e-3;
    BlockUpdate update = BlockUpdate::kExact;
    int inner_max_passes = 200;
    double inner_tol = 1e-12;
    /// rho = ridge_factor * trace(G_1) / pd for kInverseThreshold; 0 disables.
    double ridge_factor = 1e-6;
};

/// (1/n) ||Y - Z Theta||^2 + lambda sum ||theta_i||_1, evaluated from raw rows.
double stage1_objective(const Stage1Problem& problem, const std::vector<Matrix>& theta, double lambda);

/**
 * Block coordinate descent over theta_1..theta_n in increasing order.
 *
 * r_i = c_i - G_i sum_{j<i} theta_j^T - sum_{j>i} G_j theta_j^T is maintained
 * from running prefix and suffix sums, so a sweep never touches raw rows.
 * Stops when the largest coefficient change in a sweep drops below tol.
 */
ThetaEstimate bcd_solve(const Stage1Problem& problem, double lambda, const BcdOptions& options = {},
                        const std::optional<ThetaEstimate>& init = std::nullopt);

struct KktReport {
    double threshold = 0.0;  ///< n lambda / 2
    double tol = 0.0;
    std::vector<std::size_t> active_blocks;  ///< 1-based
    std::vector<double> active_residuals;    ///< relative, per active block
    double inactive_max = 0.0;               ///< absolute sup-norm over inactive blocks
    std::vector<std::size_t> failing_blocks; ///< 1-based
    bool pass = true;
};

/**
 * Checks the stationarity conditions with
 * g_j = sum_{l>=j} x_l (y_l - (sum_{i<=l} theta_i) x_l)^T:
 * nonzero entries need g = (n lambda / 2) sign(theta), zero entries
 * |g| <= n lambda / 2. Residuals are relative to n lambda / 2.
 */
KktReport kkt_check(const Stage1Problem& problem, const ThetaEstimate& estimate, double lambda,
                    double tol_kkt);

struct CandidateSet {
    std::vector<int> indices;  ///< block indices i >= 2 with nonzero theta_i
    std::vector<int> times;    ///< i + d - 1, on the series time axis
    std::vector<double> magnitudes;  ///< ||theta_i||_inf
    std::vector<Matrix> segment_coefficients;  ///< m_hat + 1 blocks, p x pd

    std::size_t m_hat() const { return indices.size(); }
};

/// 1e-6 * max(1, ||theta_1||_inf).
double default_zero_tol(const ThetaEstimate& estimate);

CandidateSet extract_candidates(const ThetaEstimate& estimate, double zero_tol, int d);

nlohmann::json stage1_to_json(const ThetaEstimate& estimate, const CandidateSet& candidates);

} // namespace varseg
