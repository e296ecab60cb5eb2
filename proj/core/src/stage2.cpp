#include "varseg/stage2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace varseg {

namespace {

void segment_design(const TimeSeries& data, SegmentRange range, int d, Matrix& x, Matrix& y)
{
    const auto p = data.cols();
    const int rows = range.length();
    x = Matrix::Zero(rows, p * d);
    y.resize(rows, p);
    for (int r = 0; r < rows; ++r) {
        const int t = range.start + r;
        y.row(r) = data.row(t - 1);
        for (int lag = 1; lag <= d; ++lag) {
            if (t - lag >= 1) x.block(r, (lag - 1) * p, 1, p) = data.row(t - lag - 1);
        }
    }
}

/// Covariance-update coordinate descent for min b'Gb - 2 b'q + weight |b|_1.
void lasso_cd(const Matrix& gram, const Vector& q, double weight, const SegmentSolverOptions& opt,
              Eigen::Ref<Vector> beta)
{
    const double tau = 0.5 * weight;
    Vector gb = gram * beta;
    for (int pass = 0; pass < opt.max_passes; ++pass) {
        double change = 0.0;
        for (Eigen::Index k = 0; k < beta.size(); ++k) {
            const double gkk = gram(k, k);
            const double old = beta(k);
            const double next = gkk > 0.0 ? soft_threshold(q(k) - gb(k) + gkk * old, tau) / gkk : 0.0;
            const double delta = next - old;
            if (delta != 0.0) {
                gb.noalias() += delta * gram.col(k);
                beta(k) = next;
                change = std::max(change, std::abs(delta));
            }
        }
        if (change < opt.tol) return;
    }
}

} // namespace

SegmentFit fit_segment(const TimeSeries& data, SegmentRange range, int d, double eta,
                       const SegmentSolverOptions& opt)
{
    const auto T = static_cast<int>(data.rows());
    if (d < 1) throw InvalidArgument("fit_segment: d must be >= 1");
    if (!(eta >= 0.0)) throw InvalidArgument("fit_segment: eta must be >= 0");
    if (range.start < 1 || range.end > T + 1 || range.length() <= d) {
        throw InfeasibleSubset("fit_segment: segment [" + std::to_string(range.start) + ", " +
                               std::to_string(range.end) + ") needs more than d=" + std::to_string(d) + " rows");
    }

    Matrix x, y;
    segment_design(data, range, d, x, y);

    SegmentFit fit;
    fit.range = range;
    fit.penalty_weight = effective_sample_size(T, d) * eta;

    Matrix beta;  // pd x p, column r = coefficients of response r
    if (fit.penalty_weight == 0.0) {
        beta = x.completeOrthogonalDecomposition().solve(y);
    } else {
        const Matrix gram = x.transpose() * x;
        const Matrix xty = x.transpose() * y;
        beta = Matrix::Zero(x.cols(), y.cols());
        for (Eigen::Index r = 0; r < y.cols(); ++r) lasso_cd(gram, xty.col(r), fit.penalty_weight, opt, beta.col(r));
    }
    fit.theta = beta.transpose();
    fit.sse = (y - x * beta).squaredNorm();
    fit.l1_norm = beta.cwiseAbs().sum();
    return fit;
}

SegmentCache::SegmentCache(const TimeSeries& data, int d, double eta, SegmentSolverOptions options)
    : data_(data), d_(d), eta_(eta), options_(options)
{
}

SegmentFit SegmentCache::fit(SegmentRange range)
{
    {
        std::lock_guard lock(mutex_);
        if (auto it = fits_.find(range); it != fits_.end()) return it->second;
    }
    SegmentFit fresh = fit_segment(data_, range, d_, eta_, options_);
    std::lock_guard lock(mutex_);
    return fits_.try_emplace(range, std::move(fresh)).first->second;
}

std::size_t SegmentCache::size() const
{
    std::lock_guard lock(mutex_);
    return fits_.size();
}

std::vector<SegmentRange> partition(const std::vector<int>& breaks, int d, int T)
{
    std::vector<SegmentRange> out;
    int start = d;
    for (int b : breaks) {
        if (b <= start) throw InfeasibleSubset("breaks must be strictly increasing and above d");
        out.push_back({start, b});
        start = b;
    }
    if (start >= T) throw InfeasibleSubset("break " + std::to_string(start) + " not below T");
    out.push_back({start, T + 1});
    for (const auto& r : out) {
        if (r.length() <= d) {
            throw InfeasibleSubset("segment [" + std::to_string(r.start) + ", " + std::to_string(r.end) +
                                   ") has " + std::to_string(r.length()) + " rows, needs more than " +
                                   std::to_string(d));
        }
    }
    return out;
}

SubsetEvaluation evaluate_subset(const std::vector<int>& breaks, int d, int T, SegmentCache& cache)
{
    SubsetEvaluation ev;
    for (const auto& range : partition(breaks, d, T)) {
        ev.fits.push_back(cache.fit(range));
        ev.L_n += ev.fits.back().objective();
    }
    return ev;
}

SubsetEvaluation evaluate_subset(const TimeSeries& data, const std::vector<int>& breaks, int d,
                                 const TuningSchedule& schedule)
{
    SegmentCache cache(data, d, schedule.eta_n);
    return evaluate_subset(breaks, d, static_cast<int>(data.rows()), cache);
}

std::string strategy_name(SearchStrategy s)
{
    return s == SearchStrategy::kExhaustive ? "exhaustive" : "backward";
}

SearchStrategy strategy_from_name(const std::string& name)
{
    if (name == "backward") return SearchStrategy::kBackward;
    if (name == "exhaustive") return SearchStrategy::kExhaustive;
    throw InvalidArgument("strategy must be 'backward' or 'exhaustive', got '" + name + "'");
}

std::vector<int> merge_candidates(const std::vector<int>& times, const std::vector<double>& magnitudes, int d,
                                  int T)
{
    if (times.size() != magnitudes.size()) throw InvalidArgument("merge_candidates: size mismatch");
    std::vector<int> merged;
    std::size_t i = 0;
    while (i < times.size()) {
        std::size_t best = i, j = i + 1;
        while (j < times.size() && times[j] - times[j - 1] <= d) {
            if (magnitudes[j] > magnitudes[best]) best = j;
            ++j;
        }
        merged.push_back(times[best]);
        i = j;
    }
    // A pick from the interior of a cluster can sit within d of the next pick.
    std::vector<int> spaced;
    for (int t : merged) {
        if (t - d <= d || T + 1 - t <= d) continue;
        if (!spaced.empty() && t - spaced.back() <= d) continue;
        spaced.push_back(t);
    }
    return spaced;
}

namespace {

bool better(double ic, const std::vector<int>& s, double best_ic, const std::vector<int>& best)
{
    if (ic != best_ic) return ic < best_ic;
    if (s.size() != best.size()) return s.size() < best.size();
    return s < best;
}

} // namespace

ScreeningResult select_breaks(const TimeSeries& data, const std::vector<int>& candidates, int d,
                              const TuningSchedule& schedule, const ScreeningOptions& options)
{
    const auto T = static_cast<int>(data.rows());
    if (!std::is_sorted(candidates.begin(), candidates.end())) {
        throw InvalidArgument("select_breaks: candidates must be increasing");
    }
    SegmentCache cache(data, d, schedule.eta_n, options.solver);

    ScreeningResult res;
    res.searched = candidates;
    res.omega_n = schedule.omega_n;
    res.eta_n = schedule.eta_n;
    res.strategy = options.strategy;
    if (res.strategy == SearchStrategy::kExhaustive &&
        static_cast<int>(candidates.size()) > options.exhaustive_cap) {
        res.strategy = SearchStrategy::kBackward;
    }

    std::set<std::vector<int>> seen;
    double best_ic = std::numeric_limits<double>::infinity();
    std::vector<int> best;
    auto score = [&](const std::vector<int>& subset) {
        const auto ev = evaluate_subset(subset, d, T, cache);
        const double ic = ev.L_n + static_cast<double>(subset.size()) * schedule.omega_n;
        if (seen.insert(subset).second) res.trace.push_back({subset, ic});
        if (better(ic, subset, best_ic, best)) {
            best_ic = ic;
            best = subset;
        }
        return ic;
    };

    if (res.strategy == SearchStrategy::kExhaustive) {
        const std::size_t k = candidates.size();
        std::vector<int> subset;
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
            subset.clear();
            for (std::size_t b = 0; b < k; ++b) {
                if (mask & (std::uint64_t{1} << b)) subset.push_back(candidates[b]);
            }
            score(subset);
        }
    } else {
        std::vector<int> current = candidates;
        double current_ic = score(current);
        while (!current.empty()) {
            double round_ic = std::numeric_limits<double>::infinity();
            std::vector<int> round_best;
            for (std::size_t drop = 0; drop < current.size(); ++drop) {
                std::vector<int> trial = current;
                trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(drop));
                const double ic = score(trial);
                if (better(ic, trial, round_ic, round_best)) {
                    round_ic = ic;
                    round_best = std::move(trial);
                }
            }
            if (!(round_ic < current_ic)) break;
            current = std::move(round_best);
            current_ic = round_ic;
        }
        score({});
    }

    const auto ev = evaluate_subset(best, d, T, cache);
    res.breaks = best;
    res.L_n = ev.L_n;
    res.ic = best_ic;
    res.fits = ev.fits;
    return res;
}

ScreeningResult select_breaks(const TimeSeries& data, const CandidateSet& candidates, int d,
                              const TuningSchedule& schedule, const ScreeningOptions& options)
{
    const auto merged = merge_candidates(candidates.times, candidates.magnitudes, d, static_cast<int>(data.rows()));
    return select_breaks(data, merged, d, schedule, options);
}

nlohmann::json screening_to_json(const ScreeningResult& res)
{
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& e : res.trace) trace.push_back({{"subset", e.subset}, {"ic", e.ic}});
    return {{"breaks", res.breaks},
            {"ic", res.ic},
            {"L_n", res.L_n},
            {"omega_n", res.omega_n},
            {"eta_n", res.eta_n},
            {"strategy", strategy_name(res.strategy)},
            {"trace", std::move(trace)}};
}

} // namespace varseg
