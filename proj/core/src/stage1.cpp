#include "varseg/stage1.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace varseg {

Stage1Problem build_stage1(const TimeSeries& data, int d)
{
    if (d < 1) throw InvalidArgument("build_stage1: lag order d must be >= 1");
    const auto T = static_cast<int>(data.rows());
    if (T <= d) throw InvalidArgument("build_stage1: need T > d (T=" + std::to_string(T) + ", d=" + std::to_string(d) + ")");
    if (data.cols() < 1) throw InvalidArgument("build_stage1: series has no columns");
    if (!data.allFinite()) throw InvalidArgument("build_stage1: series has non-finite entries");

    Stage1Problem prob;
    prob.p = static_cast<int>(data.cols());
    prob.d = d;
    prob.n = effective_sample_size(T, d);
    const int n = prob.n, p = prob.p, k = prob.width();

    prob.lagged = Matrix::Zero(n, k);
    prob.targets.resize(n, p);
    for (int l = 1; l <= n; ++l) {
        const int t = l + d - 1;
        prob.targets.row(l - 1) = data.row(t - 1);
        for (int lag = 1; lag <= d; ++lag) {
            if (t - lag >= 1) prob.lagged.block(l - 1, (lag - 1) * p, 1, p) = data.row(t - lag - 1);
        }
    }

    prob.gram.resize(static_cast<std::size_t>(n));
    prob.cross.resize(static_cast<std::size_t>(n));
    Matrix g = Matrix::Zero(k, k);
    Matrix c = Matrix::Zero(k, p);
    for (int l = n; l >= 1; --l) {
        const auto x = prob.lagged.row(l - 1).transpose();
        g.noalias() += x * x.transpose();
        c.noalias() += x * prob.targets.row(l - 1);
        prob.gram[static_cast<std::size_t>(l - 1)] = g;
        prob.cross[static_cast<std::size_t>(l - 1)] = c;
    }
    return prob;
}

double soft_threshold(double x, double lambda)
{
    if (x > lambda) return x - lambda;
    if (x < -lambda) return x + lambda;
    return 0.0;
}

Matrix soft_threshold(const Matrix& x, double lambda)
{
    if (!(lambda >= 0.0)) throw InvalidArgument("soft_threshold: lambda must be >= 0");
    return x.unaryExpr([lambda](double v) { return soft_threshold(v, lambda); });
}

double stage1_objective(const Stage1Problem& prob, const std::vector<Matrix>& theta, double lambda)
{
    Matrix cum = Matrix::Zero(prob.width(), prob.p);
    double sse = 0.0, l1 = 0.0;
    for (int l = 0; l < prob.n; ++l) {
        const Matrix& b = theta[static_cast<std::size_t>(l)];
        cum += b;
        l1 += b.cwiseAbs().sum();
        sse += (prob.targets.row(l) - prob.lagged.row(l) * cum).squaredNorm();
    }
    return sse / prob.n + lambda * l1;
}

namespace {

/// Exact minimizer of 1/2 tr(B'GB) - tr(B'r) + tau ||B||_1, warm-started at b.
void exact_block_update(const Matrix& gram, const Matrix& r, double tau, const BcdOptions& opt, Matrix& b)
{
    Matrix w = gram * b;
    const Eigen::Index k = gram.rows();
    for (int pass = 0; pass < opt.inner_max_passes; ++pass) {
        double change = 0.0;
        for (Eigen::Index j = 0; j < b.cols(); ++j) {
            for (Eigen::Index c = 0; c < k; ++c) {
                const double gcc = gram(c, c);
                const double old = b(c, j);
                const double next = gcc > 0.0 ? soft_threshold(r(c, j) - w(c, j) + gcc * old, tau) / gcc : 0.0;
                const double delta = next - old;
                if (delta != 0.0) {
                    w.col(j).noalias() += delta * gram.col(c);
                    b(c, j) = next;
                    change = std::max(change, std::abs(delta));
                }
            }
        }
        if (change <= opt.inner_tol * std::max(1.0, b.cwiseAbs().maxCoeff())) break;
    }
}

} // namespace

ThetaEstimate bcd_solve(const Stage1Problem& prob, double lambda, const BcdOptions& opt,
                        const std::optional<ThetaEstimate>& init)
{
    if (!(lambda > 0.0)) throw InvalidArgument("bcd_solve: lambda must be > 0");
    if (opt.max_sweeps < 1) throw InvalidArgument("bcd_solve: max_sweeps must be >= 1");
    if (!(opt.tol > 0.0)) throw InvalidArgument("bcd_solve: tol must be > 0");

    const int n = prob.n, k = prob.width(), p = prob.p;
    const auto nb = static_cast<std::size_t>(n);
    const double tau = 0.5 * n * lambda;

    ThetaEstimate est;
    est.lambda = lambda;
    if (init) {
        if (init->theta.size() != nb) throw InvalidArgument("bcd_solve: warm start has wrong block count");
        for (const auto& b : init->theta) {
            if (b.rows() != k || b.cols() != p) throw InvalidArgument("bcd_solve: warm start block has wrong shape");
        }
        est.theta = init->theta;
    } else {
        est.theta.assign(nb, Matrix::Zero(k, p));
    }

    std::vector<Eigen::LLT<Matrix>> factors;
    if (opt.update == BlockUpdate::kInverseThreshold) {
        const double rho = opt.ridge_factor * prob.gram.front().trace() / k;
        factors.reserve(nb);
        for (std::size_t i = 0; i < nb; ++i) {
            Matrix reg = prob.gram[i];
            reg.diagonal().array() += rho;
            factors.emplace_back(reg);
            if (factors.back().info() != Eigen::Success) {
                throw SolverError("bcd_solve: block " + std::to_string(i + 1) +
                                      " Gram is singular; enable the ridge to proceed",
                                  static_cast<std::ptrdiff_t>(i + 1));
            }
        }
    }

    std::vector<char> nonzero(nb);
    for (std::size_t i = 0; i < nb; ++i) nonzero[i] = !est.theta[i].isZero(0.0);

    est.objective_trace.push_back(stage1_objective(prob, est.theta, lambda));

    Matrix prefix(k, p), suffix(k, p), r(k, p), next(k, p);
    for (int sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
        suffix.setZero();
        for (std::size_t i = 0; i < nb; ++i) {
            if (nonzero[i]) suffix.noalias() += prob.gram[i] * est.theta[i];
        }
        prefix.setZero();
        double max_delta = 0.0;

        for (std::size_t i = 0; i < nb; ++i) {
            Matrix& b = est.theta[i];
            const Matrix& g = prob.gram[i];
            if (nonzero[i]) suffix.noalias() -= g * b;
            r = prob.cross[i];
            r.noalias() -= g * prefix;
            r -= suffix;

            if (opt.update == BlockUpdate::kExact) {
                next = b;
                exact_block_update(g, r, tau, opt, next);
            } else {
                next = factors[i].solve(soft_threshold(r, tau));
            }
            max_delta = std::max(max_delta, (next - b).cwiseAbs().maxCoeff());
            b = next;
            nonzero[i] = !b.isZero(0.0);
            if (nonzero[i]) prefix += b;
        }

        est.iterations = sweep;
        est.objective_trace.push_back(stage1_objective(prob, est.theta, lambda));
        if (max_delta < opt.tol) {
            est.converged = true;
            break;
        }
    }
    return est;
}

KktReport kkt_check(const Stage1Problem& prob, const ThetaEstimate& est, double lambda, double tol_kkt)
{
    const int n = prob.n, k = prob.width(), p = prob.p;
    if (est.theta.size() != static_cast<std::size_t>(n)) throw InvalidArgument("kkt_check: block count mismatch");

    KktReport rep;
    rep.threshold = 0.5 * n * lambda;
    rep.tol = tol_kkt;
    const double scale = rep.threshold > 0.0 ? rep.threshold : 1.0;

    Matrix resid(n, p);
    Matrix cum = Matrix::Zero(k, p);
    for (int l = 0; l < n; ++l) {
        cum += est.theta[static_cast<std::size_t>(l)];
        resid.row(l) = prob.targets.row(l) - prob.lagged.row(l) * cum;
    }

    std::vector<Matrix> grad(static_cast<std::size_t>(n));
    Matrix acc = Matrix::Zero(k, p);
    for (int l = n - 1; l >= 0; --l) {
        acc.noalias() += prob.lagged.row(l).transpose() * resid.row(l);
        grad[static_cast<std::size_t>(l)] = acc;
    }

    for (int i = 0; i < n; ++i) {
        const Matrix& b = est.theta[static_cast<std::size_t>(i)];
        const Matrix& g = grad[static_cast<std::size_t>(i)];
        const auto block = static_cast<std::size_t>(i + 1);
        if (b.isZero(0.0)) {
            const double sup = g.cwiseAbs().maxCoeff();
            rep.inactive_max = std::max(rep.inactive_max, sup);
            if (sup > rep.threshold * (1.0 + tol_kkt) + (rep.threshold > 0.0 ? 0.0 : tol_kkt)) {
                rep.failing_blocks.push_back(block);
            }
            continue;
        }
        double worst = 0.0;
        for (Eigen::Index r = 0; r < k; ++r) {
            for (Eigen::Index c = 0; c < p; ++c) {
                const double v = b(r, c), gv = g(r, c);
                const double err = v != 0.0 ? std::abs(gv - rep.threshold * (v > 0.0 ? 1.0 : -1.0))
                                            : std::max(0.0, std::abs(gv) - rep.threshold);
                worst = std::max(worst, err / scale);
            }
        }
        rep.active_blocks.push_back(block);
        rep.active_residuals.push_back(worst);
        if (worst > tol_kkt) rep.failing_blocks.push_back(block);
    }
    std::sort(rep.failing_blocks.begin(), rep.failing_blocks.end());
    rep.pass = rep.failing_blocks.empty();
    return rep;
}

double default_zero_tol(const ThetaEstimate& est)
{
    const double base = est.theta.empty() ? 0.0 : est.theta.front().cwiseAbs().maxCoeff();
    return 1e-6 * std::max(1.0, base);
}

CandidateSet extract_candidates(const ThetaEstimate& est, double zero_tol, int d)
{
    if (!(zero_tol >= 0.0)) throw InvalidArgument("extract_candidates: zero_tol must be >= 0");
    CandidateSet out;
    if (est.theta.empty()) return out;
    Matrix cum = est.theta.front();
    out.segment_coefficients.push_back(cum.transpose());
    for (std::size_t i = 1; i < est.theta.size(); ++i) {
        const Matrix& b = est.theta[i];
        cum += b;
        const double mag = b.size() ? b.cwiseAbs().maxCoeff() : 0.0;
        if (mag > zero_tol) {
            const int index = static_cast<int>(i + 1);
            out.indices.push_back(index);
            out.times.push_back(index + d - 1);
            out.magnitudes.push_back(mag);
            out.segment_coefficients.push_back(cum.transpose());
        }
    }
    return out;
}

nlohmann::json stage1_to_json(const ThetaEstimate& est, const CandidateSet& cand)
{
    nlohmann::json segs = nlohmann::json::array();
    for (const auto& s : cand.segment_coefficients) segs.push_back(matrix_to_json(s));
    return {{"lambda", est.lambda},
            {"converged", est.converged},
            {"iterations", est.iterations},
            {"candidates", cand.times},
            {"segments", std::move(segs)}};
}

} // namespace varseg
