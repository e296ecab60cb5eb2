#pragma once

#include <map>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "varseg/model.hpp"
#include "varseg/stage1.hpp"

namespace varseg {

/// Half-open range [start, end) of regression target times.
struct SegmentRange {
    int start = 0;
    int end = 0;

    int length() const { return end - start; }
    auto operator<=>(const SegmentRange&) const = default;
};

struct SegmentFit {
    SegmentRange range;
    Matrix theta;  ///< p x pd
    double sse = 0.0;
    double l1_norm = 0.0;
    double penalty_weight = 0.0;  ///< n * eta

    double objective() const { return sse + penalty_weight * l1_norm; }
};

struct SegmentSolverOptions {
    double tol = 1e-7;
    int max_passes = 10000;
};

/**
 * LASSO-VAR on one segment:
 *   min sum_{t in range} ||y_t - theta x_t||^2 + n eta ||theta||_1
 * with n = T - d + 1 the global effective sample size. Solved by cyclic
 * coordinate descent per response row; eta = 0 is an ordinary least-squares
 * solve.
 */
SegmentFit fit_segment(const TimeSeries& data, SegmentRange range, int d, double eta,
                       const SegmentSolverOptions& options = {});

/// Thread-safe memo of segment fits keyed by range. One cache per (data, d, eta).
class SegmentCache {
public:
    SegmentCache(const TimeSeries& data, int d, double eta, SegmentSolverOptions options = {});

    SegmentFit fit(SegmentRange range);
    std::size_t size() const;

private:
    const TimeSeries& data_;
    int d_;
    double eta_;
    SegmentSolverOptions options_;
    mutable std::mutex mutex_;
    std::map<SegmentRange, SegmentFit> fits_;
};

struct SubsetEvaluation {
    double L_n = 0.0;
    std::vector<SegmentFit> fits;
};

/// Segments run from s_0 = d to s_{m+1} = T (inclusive). Throws InfeasibleSubset
/// when some segment would have d or fewer rows.
std::vector<SegmentRange> partition(const std::vector<int>& breaks, int d, int T);

SubsetEvaluation evaluate_subset(const std::vector<int>& breaks, int d, int T, SegmentCache& cache);
SubsetEvaluation evaluate_subset(const TimeSeries& data, const std::vector<int>& breaks, int d,
                                 const TuningSchedule& schedule);

enum class SearchStrategy { kBackward, kExhaustive };

std::string strategy_name(SearchStrategy s);
SearchStrategy strategy_from_name(const std::string& name);

/**
 * Collapses candidates closer than d + 1 to the member with the largest
 * ||theta_i||_inf, then drops candidates that would leave a boundary segment
 * with d or fewer rows. Input times must be increasing.
 */
std::vector<int> merge_candidates(const std::vector<int>& times, const std::vector<double>& magnitudes, int d,
                                  int T);

struct TraceEntry {
    std::vector<int> subset;
    double ic = 0.0;
};

struct ScreeningResult {
    std::vector<int> searched;  ///< candidates after merging
    std::vector<int> breaks;
    double L_n = 0.0;
    double ic = 0.0;
    double omega_n = 0.0;
    double eta_n = 0.0;
    SearchStrategy strategy = SearchStrategy::kBackward;
    std::vector<SegmentFit> fits;
    std::vector<TraceEntry> trace;

    std::size_t m_final() const { return breaks.size(); }
};

struct ScreeningOptions {
    SearchStrategy strategy = SearchStrategy::kBackward;
    int exhaustive_cap = 12;
    SegmentSolverOptions solver;
};

/**
 * Minimizes IC(s) = L_n(s) + |s| omega_n over subsets of the merged candidates.
 *
 * Exhaustive enumerates every subset and needs |candidates| <= exhaustive_cap;
 * above the cap the backward search runs instead and the result says so.
 * Backward starts from the full set and drops the candidate whose removal
 * lowers IC the most until no removal helps; the empty set is always scored.
 * Ties prefer fewer breaks, then the lexicographically smaller vector.
 */
ScreeningResult select_breaks(const TimeSeries& data, const CandidateSet& candidates, int d,
                              const TuningSchedule& schedule, const ScreeningOptions& options = {});

/// Same search over an explicit, already feasible candidate list.
ScreeningResult select_breaks(const TimeSeries& data, const std::vector<int>& candidates, int d,
                              const TuningSchedule& schedule, const ScreeningOptions& options = {});

nlohmann::json screening_to_json(const ScreeningResult& result);

} // namespace varseg
