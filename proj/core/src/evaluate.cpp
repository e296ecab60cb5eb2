#include "varseg/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <thread>

#include <spdlog/spdlog.h>

namespace varseg {

double hausdorff(const std::vector<int>& reference, const std::vector<int>& estimate)
{
    if (estimate.empty()) return 0.0;
    if (reference.empty()) return std::numeric_limits<double>::infinity();
    int worst = 0;
    for (int b : estimate) {
        int nearest = std::numeric_limits<int>::max();
        for (int a : reference) nearest = std::min(nearest, std::abs(b - a));
        worst = std::max(worst, nearest);
    }
    return worst;
}

bool stage1_coverage_check(const std::vector<int>& candidates, const std::vector<int>& truth, int radius)
{
    if (candidates.size() < truth.size()) return false;
    return hausdorff(candidates, truth) <= radius;
}

int coverage_radius(const TuningSchedule& schedule)
{
    return static_cast<int>(std::ceil(schedule.n * schedule.gamma_n));
}

ReplicateSummary summarize(const std::vector<ReplicateRecord>& records, const std::vector<int>& truth, int T,
                           double selection_window)
{
    ReplicateSummary s;
    s.replicates = static_cast<int>(records.size());
    s.T = T;
    s.truth = truth;
    s.records = records;
    if (records.empty()) return s;

    const double window = selection_window * T;
    const auto R = static_cast<double>(records.size());
    std::vector<std::vector<double>> located(truth.size());
    std::vector<int> selected(truth.size(), 0);
    int exact = 0, failed = 0;
    for (const auto& rec : records) {
        if (rec.failed) {
            ++failed;
            continue;
        }
        if (rec.final_breaks.size() == truth.size()) ++exact;
        // closest final break per truth, among breaks whose nearest truth is this one
        std::vector<int> best(truth.size(), -1);
        for (int b : rec.final_breaks) {
            std::size_t owner = 0;
            for (std::size_t j = 1; j < truth.size(); ++j) {
                if (std::abs(b - truth[j]) < std::abs(b - truth[owner])) owner = j;
            }
            if (truth.empty()) break;
            if (best[owner] < 0 || std::abs(b - truth[owner]) < std::abs(best[owner] - truth[owner])) best[owner] = b;
        }
        for (std::size_t j = 0; j < truth.size(); ++j) {
            if (best[j] < 0) continue;
            located[j].push_back(static_cast<double>(best[j]) / T);
            if (std::abs(best[j] - truth[j]) <= window) ++selected[j];
        }
    }
    s.exact_count_rate = exact / R;
    s.failure_rate = failed / R;

    for (std::size_t j = 0; j < truth.size(); ++j) {
        BreakStats b;
        b.truth = truth[j];
        b.truth_rel = static_cast<double>(truth[j]) / T;
        b.selection_rate = selected[j] / R;
        b.located = static_cast<int>(located[j].size());
        if (!located[j].empty()) {
            double mean = 0.0;
            for (double v : located[j]) mean += v;
            mean /= static_cast<double>(located[j].size());
            double var = 0.0;
            for (double v : located[j]) var += (v - mean) * (v - mean);
            b.mean_rel = mean;
            b.std_rel = std::sqrt(var / static_cast<double>(located[j].size()));
        }
        s.breaks.push_back(b);
    }

    double h1 = 0.0, h2 = 0.0;
    int ok = 0;
    for (const auto& rec : records) {
        if (rec.failed) continue;
        ++ok;
        h1 += rec.stage1_hausdorff;
        h2 += rec.final_hausdorff;
        s.stage1_hausdorff_max = std::max(s.stage1_hausdorff_max, rec.stage1_hausdorff);
        s.final_hausdorff_max = std::max(s.final_hausdorff_max, rec.final_hausdorff);
    }
    if (ok) {
        s.stage1_hausdorff_mean = h1 / ok;
        s.final_hausdorff_mean = h2 / ok;
    }
    return s;
}

namespace {

ReplicateRecord run_one(const SimulationConfig& config, const ReplicateOptions& opt)
{
    const auto& m = config.model;
    ReplicateRecord rec;
    rec.seed = config.seed;
    try {
        const TimeSeries data = simulate(config);
        const TuningSchedule schedule = detection_schedule(m.T, m.p, m.d, opt.schedule);
        const DetectionResult res = detect(data, m.d, schedule, opt.detect);
        rec.candidates = res.stage1.times;
        rec.searched = res.stage2.searched;
        rec.final_breaks = res.final_breaks;
        rec.stage1_converged = res.stage1_estimate.converged;
        rec.stage1_covered = stage1_coverage_check(rec.candidates, m.breaks, coverage_radius(schedule));
        rec.stage1_hausdorff = hausdorff(rec.candidates, m.breaks);
        rec.final_hausdorff = hausdorff(rec.final_breaks, m.breaks);
    } catch (const std::exception& e) {
        rec.failed = true;
        rec.error = e.what();
        spdlog::warn("replicate seed {} failed: {}", config.seed, e.what());
    }
    return rec;
}

template <class MakeConfig>
std::vector<ReplicateRecord> run_all(int R, std::uint64_t base_seed, const ReplicateOptions& opt, MakeConfig make)
{
    if (R < 1) throw InvalidArgument("run_replicates: R must be >= 1");
    std::vector<ReplicateRecord> records(static_cast<std::size_t>(R));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int r = next++; r < R; r = next++) {
            records[static_cast<std::size_t>(r)] = run_one(make(base_seed + static_cast<std::uint64_t>(r)), opt);
        }
    };
    const int jobs = std::clamp(opt.jobs, 1, R);
    std::vector<std::thread> pool;
    for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return records;
}

} // namespace

ReplicateSummary run_replicates(Scenario preset, int R, std::uint64_t base_seed, const ReplicateOptions& options)
{
    auto records = run_all(R, base_seed, options, [&](std::uint64_t seed) { return make_scenario(preset, seed); });
    const auto p = scenario_preset(preset);
    auto s = summarize(records, p.breaks, p.T, options.selection_window);
    s.scenario = scenario_name(preset);
    return s;
}

ReplicateSummary run_replicates(const SegmentedVarModel& model, const std::string& label, int R,
                                std::uint64_t base_seed, const ReplicateOptions& options)
{
    require_valid(model);
    auto records = run_all(R, base_seed, options, [&](std::uint64_t seed) {
        SimulationConfig c;
        c.model = model;
        c.seed = seed;
        return c;
    });
    auto s = summarize(records, model.breaks, model.T, options.selection_window);
    s.scenario = label;
    return s;
}

namespace {

nlohmann::json finite_or_null(double v)
{
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

} // namespace

nlohmann::json summary_to_json(const ReplicateSummary& s)
{
    nlohmann::json breaks = nlohmann::json::array();
    for (std::size_t j = 0; j < s.breaks.size(); ++j) {
        const auto& b = s.breaks[j];
        breaks.push_back({{"break_index", j + 1},
                          {"truth", b.truth},
                          {"truth_rel", b.truth_rel},
                          {"mean_rel", finite_or_null(b.mean_rel)},
                          {"std_rel", finite_or_null(b.std_rel)},
                          {"selection_rate", b.selection_rate},
                          {"located", b.located}});
    }
    nlohmann::json reps = nlohmann::json::array();
    for (const auto& r : s.records) {
        nlohmann::json rec = {{"seed", r.seed},
                              {"failed", r.failed},
                              {"candidates", r.candidates},
                              {"searched", r.searched},
                              {"final_breaks", r.final_breaks},
                              {"stage1_covered", r.stage1_covered},
                              {"stage1_converged", r.stage1_converged},
                              {"stage1_hausdorff", finite_or_null(r.stage1_hausdorff)},
                              {"final_hausdorff", finite_or_null(r.final_hausdorff)}};
        if (r.failed) rec["error"] = r.error;
        reps.push_back(std::move(rec));
    }
    return {{"scenario", s.scenario},
            {"replicates", s.replicates},
            {"T", s.T},
            {"truth", s.truth},
            {"breaks", std::move(breaks)},
            {"exact_count_rate", s.exact_count_rate},
            {"failure_rate", s.failure_rate},
            {"hausdorff",
             {{"stage1_mean", finite_or_null(s.stage1_hausdorff_mean)},
              {"stage1_max", finite_or_null(s.stage1_hausdorff_max)},
              {"final_mean", finite_or_null(s.final_hausdorff_mean)},
              {"final_max", finite_or_null(s.final_hausdorff_max)}}},
            {"records", std::move(reps)}};
}

void write_summary_csv(std::ostream& out, const ReplicateSummary& s)
{
    const auto old_flags = out.flags();
    const auto old_precision = out.precision();
    out << "break_index,truth_rel,mean_rel,std_rel,selection_rate\n";
    out << std::setprecision(6);
    for (std::size_t j = 0; j < s.breaks.size(); ++j) {
        const auto& b = s.breaks[j];
        out << (j + 1) << ',' << b.truth_rel << ',' << b.mean_rel << ',' << b.std_rel << ',' << b.selection_rate
            << '\n';
    }
    out.flags(old_flags);
    out.precision(old_precision);
}

} // namespace varseg
