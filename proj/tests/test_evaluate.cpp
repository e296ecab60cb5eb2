#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "varseg/evaluate.hpp"

using namespace varseg;

TEST(Hausdorff, Examples)
{
    EXPECT_EQ(hausdorff({100, 200}, {95, 210}), 10.0);
    EXPECT_EQ(hausdorff({100, 200}, {100, 200}), 0.0);
    EXPECT_EQ(hausdorff({100, 200}, {}), 0.0);
    EXPECT_TRUE(std::isinf(hausdorff({}, {5})));
    // one-sided: points of the reference far from the estimate do not count
    EXPECT_EQ(hausdorff({10, 500}, {12}), 2.0);
}

TEST(Hausdorff, OrderInvariantAndMonotoneInEstimate)
{
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<int> a, b;
        for (int k = 0; k < 5; ++k) a.push_back(static_cast<int>(rng() % 300));
        for (int k = 0; k < 4; ++k) b.push_back(static_cast<int>(rng() % 300));
        auto a2 = a, b2 = b;
        std::shuffle(a2.begin(), a2.end(), rng);
        std::shuffle(b2.begin(), b2.end(), rng);
        EXPECT_EQ(hausdorff(a, b), hausdorff(a2, b2));
        auto bigger = b;
        bigger.push_back(static_cast<int>(rng() % 300));
        EXPECT_GE(hausdorff(a, bigger), hausdorff(a, b));
    }
}

TEST(Coverage, Examples)
{
    EXPECT_TRUE(stage1_coverage_check({98, 103, 150, 201}, {100, 200}, 3));
    EXPECT_FALSE(stage1_coverage_check({98, 103, 150, 210}, {100, 200}, 3));
    EXPECT_FALSE(stage1_coverage_check({100}, {100, 200}, 1000));
    EXPECT_TRUE(stage1_coverage_check({}, {}, 0));
}

TEST(Coverage, RadiusFromSchedule)
{
    const auto s = default_schedule(296.0, 20, 1, 1.0, 0.5);
    EXPECT_EQ(coverage_radius(s), static_cast<int>(std::ceil(296.0 * s.gamma_n)));
    EXPECT_EQ(coverage_radius(s), 18);
}

namespace {

ReplicateRecord record(std::vector<int> final_breaks)
{
    ReplicateRecord r;
    r.final_breaks = std::move(final_breaks);
    return r;
}

} // namespace

TEST(Summarize, SingleReplicateHasZeroStd)
{
    const auto s = summarize({record({102, 199})}, {100, 200}, 300, 0.02);
    ASSERT_EQ(s.breaks.size(), 2u);
    EXPECT_DOUBLE_EQ(s.breaks[0].mean_rel, 102.0 / 300);
    EXPECT_EQ(s.breaks[0].std_rel, 0.0);
    EXPECT_EQ(s.breaks[1].selection_rate, 1.0);
    EXPECT_EQ(s.exact_count_rate, 1.0);
}

TEST(Summarize, SelectionWindowAndMissedBreaks)
{
    const auto s = summarize({record({100}), record({110, 200}), record({})}, {100, 200}, 300, 0.02);
    EXPECT_NEAR(s.breaks[0].selection_rate, 1.0 / 3, 1e-15);  // 110 is 10 > 6 away
    EXPECT_NEAR(s.breaks[1].selection_rate, 1.0 / 3, 1e-15);
    EXPECT_EQ(s.breaks[0].located, 2);
    EXPECT_NEAR(s.exact_count_rate, 1.0 / 3, 1e-15);
}

TEST(Summarize, FailedRecordsCountAsFailures)
{
    ReplicateRecord bad;
    bad.failed = true;
    bad.error = "boom";
    const auto s = summarize({bad, record({100})}, {100}, 300, 0.02);
    EXPECT_EQ(s.failure_rate, 0.5);
    EXPECT_EQ(s.breaks[0].selection_rate, 0.5);
}

TEST(Summarize, InvariantToRecordOrder)
{
    std::vector<ReplicateRecord> recs{record({97, 203}), record({101}), record({99, 150, 198}), record({})};
    const auto a = summarize(recs, {100, 200}, 300, 0.02);
    std::reverse(recs.begin(), recs.end());
    const auto b = summarize(recs, {100, 200}, 300, 0.02);
    for (std::size_t j = 0; j < 2; ++j) {
        EXPECT_NEAR(a.breaks[j].mean_rel, b.breaks[j].mean_rel, 1e-15);
        EXPECT_NEAR(a.breaks[j].std_rel, b.breaks[j].std_rel, 1e-15);
        EXPECT_EQ(a.breaks[j].selection_rate, b.breaks[j].selection_rate);
    }
    EXPECT_EQ(a.exact_count_rate, b.exact_count_rate);
}

TEST(SummaryCsv, HeaderAndRows)
{
    auto s = summarize({record({100, 200})}, {100, 200}, 300, 0.02);
    std::ostringstream out;
    write_summary_csv(out, s);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "break_index,truth_rel,mean_rel,std_rel,selection_rate");
    int rows = 0;
    while (std::getline(in, line)) rows += !line.empty();
    EXPECT_EQ(rows, 2);
}

TEST(SummaryJson, NanBecomesNull)
{
    const auto s = summarize({record({})}, {100}, 300, 0.02);
    const auto doc = summary_to_json(s);
    EXPECT_TRUE(doc["breaks"][0]["mean_rel"].is_null());
    EXPECT_FALSE(nlohmann::json::parse(doc.dump()).is_discarded());
}

TEST(RunReplicates, JobsDoNotChangeResults)
{
    SegmentedVarModel m;
    m.p = 2;
    m.d = 1;
    m.T = 120;
    m.breaks = {60};
    Matrix a(2, 2), b(2, 2);
    a << 0.7, 0.0, 0.0, 0.7;
    b << -0.7, 0.0, 0.0, -0.7;
    m.segments = {a, b};
    m.noise_cov = Matrix::Identity(2, 2);
    ReplicateOptions one;
    ReplicateOptions three;
    three.jobs = 3;
    const auto s1 = run_replicates(m, "toy", 4, 10, one);
    const auto s3 = run_replicates(m, "toy", 4, 10, three);
    EXPECT_EQ(summary_to_json(s1).dump(), summary_to_json(s3).dump());
    ASSERT_EQ(s1.records.size(), 4u);
    EXPECT_EQ(s1.records[2].seed, 12u);
    EXPECT_EQ(s1.scenario, "toy");
}
