#pragma once

#include <optional>
#include <vector>

#include "varseg/model.hpp"
#include "varseg/stage1.hpp"
#include "varseg/stage2.hpp"

namespace varseg {

/// Constants feeding default_schedule.
struct ScheduleParams {
    double lambda_constant = 0.5;
    double omega_v = 0.9;
    double eta_constant = 0.5;  // eta_n = eta_constant * gamma_n
};

/// default_schedule at n = T - d + 1 for a T x p series.
TuningSchedule detection_schedule(int T, int p, int d, const ScheduleParams& params = {});

/// Global divisor applied to the series before both stages. A global rescaling
/// leaves VAR coefficients and break locations unchanged.
enum class Scaling {
    kNone,
    kRms,       ///< root mean square of all entries
    kResidual,  ///< residual RMS of one pooled least-squares VAR(d) fit
};

struct DetectOptions {
    Scaling scaling = Scaling::kRms;
    BcdOptions bcd;
    ScreeningOptions screening;
    std::optional<double> zero_tol;  ///< default_zero_tol() when unset
};

struct StageTimings {
    double stage1_seconds = 0.0;
    double stage2_seconds = 0.0;
};

struct DetectionResult {
    int d = 0;
    int T = 0;
    double scale = 1.0;  ///< divisor applied when normalizing
    TuningSchedule schedule;
    ThetaEstimate stage1_estimate;
    CandidateSet stage1;
    ScreeningResult stage2;
    std::vector<int> final_breaks;
    std::vector<Matrix> final_models;  ///< p x pd per final segment
    StageTimings timings;
};

/// build_stage1 -> bcd_solve -> extract_candidates -> select_breaks.
DetectionResult detect(const TimeSeries& data, int d, const TuningSchedule& schedule,
                       const DetectOptions& options = {});

/// Root mean square of all entries, or 1 for an all-zero series.
double rms_scale(const TimeSeries& data);

/// sqrt(SSE / ((T - d - pd) p)) of a pooled VAR(d) least-squares fit without
/// intercept. Falls back to rms_scale when T - d <= 2pd.
double residual_scale(const TimeSeries& data, int d);

double data_scale(const TimeSeries& data, int d, Scaling scaling);

/// Serialized result. Timings are left out so identical runs serialize identically.
nlohmann::json detection_to_json(const DetectionResult& result);

} // namespace varseg
