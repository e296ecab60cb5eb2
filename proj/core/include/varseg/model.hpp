#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "varseg/errors.hpp"

namespace varseg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Observed multivariate series: T rows (time points 1..T), p columns.
using TimeSeries = Eigen::MatrixXd;

/**
 * Piecewise VAR(d) model.
 *
 * Segment j (0-based) governs time points t with
 * breaks[j-1] <= t < breaks[j], where the first segment starts at t = 1 and
 * the last runs through t = T. Each segment block is p x (p*d) laid out as
 * [Phi_1 ... Phi_d], so y_t = sum_k Phi_k y_{t-k} + eps_t.
 */
struct SegmentedVarModel {
    int p = 0;
    int d = 0;
    int T = 0;
    std::vector<int> breaks;
    std::vector<Matrix> segments;
    Matrix noise_cov;

    std::size_t segment_count() const { return segments.size(); }

    /// Index of the segment that generates time point t (1-based).
    std::size_t segment_at(int t) const;
};

struct ValidationIssue {
    std::string code;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;

    bool ok() const { return issues.empty(); }
    bool has(const std::string& code) const;
    std::string summary() const;
};

/// Reports every violated model invariant; never throws.
ValidationReport validate_model(const SegmentedVarModel& model);

/// Throws ValidationError listing all issues when the model is invalid.
void require_valid(const SegmentedVarModel& model);

/// Models with spectral radius above this are reported nonstationary.
inline constexpr double kStationarityBound = 1.0 - 1e-8;

/// Spectral radius of the (p*d) x (p*d) companion matrix of one segment block.
double companion_spectral_radius(const Matrix& segment, int p, int d);

/// Tuning parameters for both stages.
struct TuningSchedule {
    double n = 0.0;             ///< effective sample size T - d + 1
    double lambda_constant = 0.0;
    double v_exponent = 0.0;
    double eta_constant = 1.0;  ///< eta_n = eta_constant * gamma_n
    double lambda_n = 0.0;
    double gamma_n = 0.0;
    double eta_n = 0.0;
    double omega_n = 0.0;
};

/**
 * Default rates:
 *   lambda_n = 2C sqrt((log n + 2 log p + log d) / n)
 *   gamma_n  = log n log p / n,  eta_n = eta_constant * gamma_n
 *   omega_n  = (log n log p)^(1 + v)
 *
 * With p = 1 the log p factor vanishes, so gamma_n, eta_n and omega_n are zero;
 * override them explicitly for univariate series.
 */
TuningSchedule default_schedule(double n, int p, int d, double C, double v,
                                double eta_constant = 1.0);

/// Effective sample size of the stacked regression for a length-T series.
inline int effective_sample_size(int T, int d) { return T - d + 1; }

nlohmann::json model_to_json(const SegmentedVarModel& model);
SegmentedVarModel model_from_json(const nlohmann::json& doc);

nlohmann::json schedule_to_json(const TuningSchedule& schedule);

/// Row-major nested array helpers shared by all serializers.
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& doc);

} // namespace varseg
