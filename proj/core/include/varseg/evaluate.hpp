#pragma once

#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "varseg/pipeline.hpp"
#include "varseg/simulate.hpp"

namespace varseg {

/// max over b in estimate of the distance to the nearest a in reference.
/// 0 when estimate is empty; +infinity when only reference is empty.
double hausdorff(const std::vector<int>& reference, const std::vector<int>& estimate);

/// |candidates| >= |truth| and every true break has a candidate within radius.
bool stage1_coverage_check(const std::vector<int>& candidates, const std::vector<int>& truth, int radius);

/// ceil(n * gamma_n), the localization radius implied by a schedule.
int coverage_radius(const TuningSchedule& schedule);

struct ReplicateRecord {
    std::uint64_t seed = 0;
    bool failed = false;
    std::string error;
    std::vector<int> candidates;  ///< stage-1 candidate times before merging
    std::vector<int> searched;    ///< after merging
    std::vector<int> final_breaks;
    bool stage1_covered = false;
    double stage1_hausdorff = 0.0;  ///< d_H(A_n, truth)
    double final_hausdorff = 0.0;   ///< d_H(final, truth)
    bool stage1_converged = false;
};

struct BreakStats {
    int truth = 0;
    double truth_rel = 0.0;
    double mean_rel = std::numeric_limits<double>::quiet_NaN();
    double std_rel = std::numeric_limits<double>::quiet_NaN();
    double selection_rate = 0.0;
    int located = 0;  ///< replicates with a final break nearest this truth
};

struct ReplicateSummary {
    std::string scenario;
    int replicates = 0;
    int T = 0;
    std::vector<int> truth;
    std::vector<BreakStats> breaks;
    double exact_count_rate = 0.0;
    double failure_rate = 0.0;
    double stage1_hausdorff_mean = 0.0;
    double stage1_hausdorff_max = 0.0;
    double final_hausdorff_mean = 0.0;
    double final_hausdorff_max = 0.0;
    std::vector<ReplicateRecord> records;
};

struct ReplicateOptions {
    ScheduleParams schedule;
    DetectOptions detect;
    /// A true break counts as detected when a final break lies within
    /// selection_window * T of it.
    double selection_window = 0.02;
    int jobs = 1;
};

/**
 * Aggregates replicate records against the truth. Each final break is
 * attributed to its nearest true break; mean/std use the closest attributed
 * break per replicate, selection uses the window. Std is the population std.
 */
ReplicateSummary summarize(const std::vector<ReplicateRecord>& records, const std::vector<int>& truth, int T,
                           double selection_window);

/// Replicate r simulates make_scenario(preset, base_seed + r) and runs detect.
ReplicateSummary run_replicates(Scenario preset, int R, std::uint64_t base_seed,
                                const ReplicateOptions& options = {});

/// Same harness for an arbitrary model (e.g. a single-regime null model).
ReplicateSummary run_replicates(const SegmentedVarModel& model, const std::string& label, int R,
                                std::uint64_t base_seed, const ReplicateOptions& options = {});

nlohmann::json summary_to_json(const ReplicateSummary& summary);

/// Columns break_index,truth_rel,mean_rel,std_rel,selection_rate.
void write_summary_csv(std::ostream& out, const ReplicateSummary& summary);

} // namespace varseg
