#include "varseg/pipeline.hpp"

#include <chrono>
#include <cmath>

#include <spdlog/spdlog.h>

namespace varseg {

namespace {

template <class Fn>
auto in_stage(const char* stage, Fn&& fn) -> decltype(fn())
{
    try {
        return fn();
    } catch (const InfeasibleSubset& e) {
        throw InfeasibleSubset(std::string(stage) + ": " + e.what());
    } catch (const InvalidArgument& e) {
        throw InvalidArgument(std::string(stage) + ": " + e.what());
    } catch (const SolverError& e) {
        throw SolverError(std::string(stage) + ": " + e.what(), e.block());
    } catch (const ParseError& e) {
        throw ParseError(std::string(stage) + ": " + e.what());
    }
}

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

} // namespace

TuningSchedule detection_schedule(int T, int p, int d, const ScheduleParams& params)
{
    return default_schedule(effective_sample_size(T, d), p, d, params.lambda_constant, params.omega_v,
                            params.eta_constant);
}

double rms_scale(const TimeSeries& data)
{
    if (data.size() == 0) return 1.0;
    const double rms = std::sqrt(data.squaredNorm() / static_cast<double>(data.size()));
    return rms > 0.0 && std::isfinite(rms) ? rms : 1.0;
}

double residual_scale(const TimeSeries& data, int d)
{
    const auto T = static_cast<int>(data.rows());
    const auto p = static_cast<int>(data.cols());
    const int rows = T - d, k = p * d;
    if (d < 1 || rows <= 2 * k) return rms_scale(data);
    Matrix x(rows, k);
    for (int lag = 1; lag <= d; ++lag) x.middleCols((lag - 1) * p, p) = data.middleRows(d - lag, rows);
    const Matrix y = data.bottomRows(rows);
    const Matrix beta = x.completeOrthogonalDecomposition().solve(y);
    const double sse = (y - x * beta).squaredNorm();
    const double s = std::sqrt(sse / (static_cast<double>(rows - k) * p));
    return s > 0.0 && std::isfinite(s) ? s : rms_scale(data);
}

double data_scale(const TimeSeries& data, int d, Scaling scaling)
{
    switch (scaling) {
    case Scaling::kRms: return rms_scale(data);
    case Scaling::kResidual: return residual_scale(data, d);
    case Scaling::kNone: break;
    }
    return 1.0;
}

DetectionResult detect(const TimeSeries& data, int d, const TuningSchedule& schedule, const DetectOptions& options)
{
    if (d < 1) throw InvalidArgument("detect: d must be >= 1");
    if (data.rows() <= 3 * d) {
        throw InvalidArgument("detect: series of length " + std::to_string(data.rows()) +
                              " is too short for lag order " + std::to_string(d) + " (need T > 3d)");
    }
    if (!data.allFinite()) throw InvalidArgument("detect: series has non-finite entries");

    DetectionResult res;
    res.d = d;
    res.T = static_cast<int>(data.rows());
    res.schedule = schedule;
    res.scale = data_scale(data, d, options.scaling);
    const TimeSeries scaled = data / res.scale;

    auto start = std::chrono::steady_clock::now();
    in_stage("stage1", [&] {
        const Stage1Problem problem = build_stage1(scaled, d);
        res.stage1_estimate = bcd_solve(problem, schedule.lambda_n, options.bcd);
        const double zero_tol = options.zero_tol.value_or(default_zero_tol(res.stage1_estimate));
        res.stage1 = extract_candidates(res.stage1_estimate, zero_tol, d);
        return 0;
    });
    res.timings.stage1_seconds = seconds_since(start);
    spdlog::debug("stage1: {} sweeps (converged={}), {} candidates", res.stage1_estimate.iterations,
                  res.stage1_estimate.converged, res.stage1.m_hat());

    start = std::chrono::steady_clock::now();
    res.stage2 = in_stage("stage2", [&] { return select_breaks(scaled, res.stage1, d, schedule, options.screening); });
    res.timings.stage2_seconds = seconds_since(start);
    spdlog::debug("stage2: {} merged candidates, {} breaks kept, IC={}", res.stage2.searched.size(),
                  res.stage2.m_final(), res.stage2.ic);

    res.final_breaks = res.stage2.breaks;
    for (const auto& fit : res.stage2.fits) res.final_models.push_back(fit.theta);
    return res;
}

nlohmann::json detection_to_json(const DetectionResult& res)
{
    nlohmann::json models = nlohmann::json::array();
    for (const auto& m : res.final_models) models.push_back(matrix_to_json(m));
    return {{"d", res.d},
            {"T", res.T},
            {"scale", res.scale},
            {"schedule", schedule_to_json(res.schedule)},
            {"stage1", stage1_to_json(res.stage1_estimate, res.stage1)},
            {"stage2", screening_to_json(res.stage2)},
            {"final_breaks", res.final_breaks},
            {"final_models", std::move(models)}};
}

} // namespace varseg
