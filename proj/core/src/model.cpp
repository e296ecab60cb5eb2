#include "varseg/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace varseg {

std::size_t SegmentedVarModel::segment_at(int t) const
{
    auto it = std::upper_bound(breaks.begin(), breaks.end(), t);
    return static_cast<std::size_t>(it - breaks.begin());
}

bool ValidationReport::has(const std::string& code) const
{
    return std::any_of(issues.begin(), issues.end(),
                       [&](const ValidationIssue& i) { return i.code == code; });
}

std::string ValidationReport::summary() const
{
    std::ostringstream out;
    for (std::size_t i = 0; i < issues.size(); ++i) {
        if (i) out << "; ";
        out << issues[i].message;
    }
    return out.str();
}

double companion_spectral_radius(const Matrix& segment, int p, int d)
{
    if (p <= 0 || d <= 0) throw InvalidArgument("companion_spectral_radius: p and d must be positive");
    if (segment.rows() != p || segment.cols() != static_cast<Eigen::Index>(p) * d) {
        throw InvalidArgument("companion_spectral_radius: expected a " + std::to_string(p) + "x" +
                              std::to_string(p * d) + " block, got " + std::to_string(segment.rows()) +
                              "x" + std::to_string(segment.cols()));
    }
    const Eigen::Index k = static_cast<Eigen::Index>(p) * d;
    Matrix companion = Matrix::Zero(k, k);
    companion.topRows(p) = segment;
    if (d > 1) companion.bottomLeftCorner(k - p, k - p).setIdentity();
    if (!companion.allFinite()) return std::numeric_limits<double>::infinity();
    Eigen::EigenSolver<Matrix> solver(companion, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw SolverError("companion_spectral_radius: eigenvalue iteration failed");
    }
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

ValidationReport validate_model(const SegmentedVarModel& model)
{
    ValidationReport report;
    auto add = [&](std::string code, std::string msg) {
        report.issues.push_back({std::move(code), std::move(msg)});
    };

    if (model.p <= 0 || model.d <= 0 || model.T <= 0) {
        add("dimensions", "p, d and T must be positive");
        return report;
    }

    for (std::size_t i = 1; i < model.breaks.size(); ++i) {
        if (model.breaks[i] <= model.breaks[i - 1]) {
            add("breaks_not_increasing", "breaks not increasing");
            break;
        }
    }
    for (int b : model.breaks) {
        if (b <= model.d || b > model.T) {
            add("break_out_of_range", "break " + std::to_string(b) + " outside (d, T]");
        }
    }

    if (model.segments.size() != model.breaks.size() + 1) {
        add("segment_count", "expected " + std::to_string(model.breaks.size() + 1) +
                                 " segments, got " + std::to_string(model.segments.size()));
    }
    for (std::size_t j = 0; j < model.segments.size(); ++j) {
        const Matrix& phi = model.segments[j];
        const std::string label = "segment " + std::to_string(j + 1);
        if (phi.rows() != model.p || phi.cols() != static_cast<Eigen::Index>(model.p) * model.d) {
            add("segment_shape", label + " has shape " + std::to_string(phi.rows()) + "x" +
                                     std::to_string(phi.cols()));
            continue;
        }
        if (!phi.allFinite()) {
            add("non_finite", label + " has non-finite entries");
            continue;
        }
        if (companion_spectral_radius(phi, model.p, model.d) >= kStationarityBound) {
            add("nonstationary", label + " nonstationary");
        }
    }

    const Matrix& cov = model.noise_cov;
    if (cov.rows() != model.p || cov.cols() != model.p) {
        add("noise_cov_shape", "noise covariance must be p x p");
    } else if (!cov.allFinite()) {
        add("non_finite", "noise covariance has non-finite entries");
    } else {
        if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
            add("noise_cov_asymmetric", "noise covariance not symmetric");
        }
        Eigen::LLT<Matrix> llt(cov.selfadjointView<Eigen::Lower>());
        if (llt.info() != Eigen::Success) {
            add("noise_cov_not_pd", "noise covariance not positive definite");
        }
    }
    return report;
}

void require_valid(const SegmentedVarModel& model)
{
    auto report = validate_model(model);
    if (!report.ok()) throw ValidationError("invalid model: " + report.summary());
}

TuningSchedule default_schedule(double n, int p, int d, double C, double v, double eta_constant)
{
    if (!(n > std::max(2.0, static_cast<double>(d)))) {
        throw InvalidArgument("default_schedule: n must exceed max(2, d)");
    }
    if (p < 1 || d < 1) throw InvalidArgument("default_schedule: p and d must be >= 1");
    if (!(C > 0.0) || !(v > 0.0) || !(eta_constant > 0.0)) {
        throw InvalidArgument("default_schedule: C, v and eta constant must be positive");
    }
    const double log_n = std::log(n);
    const double log_p = std::log(static_cast<double>(p));
    const double log_d = std::log(static_cast<double>(d));

    TuningSchedule s;
    s.n = n;
    s.lambda_constant = C;
    s.v_exponent = v;
    s.eta_constant = eta_constant;
    s.lambda_n = 2.0 * C * std::sqrt((log_n + 2.0 * log_p + log_d) / n);
    s.gamma_n = log_n * log_p / n;
    s.eta_n = eta_constant * s.gamma_n;
    s.omega_n = std::pow(log_n * log_p, 1.0 + v);
    return s;
}

nlohmann::json matrix_to_json(const Matrix& m)
{
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const nlohmann::json& doc)
{
    if (!doc.is_array()) throw ParseError("matrix must be a nested array");
    const auto rows = static_cast<Eigen::Index>(doc.size());
    const auto cols = rows ? static_cast<Eigen::Index>(doc.at(0).size()) : 0;
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = doc.at(static_cast<std::size_t>(r));
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw ParseError("ragged matrix row", static_cast<std::size_t>(r + 1));
        }
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    return m;
}

nlohmann::json model_to_json(const SegmentedVarModel& model)
{
    nlohmann::json segs = nlohmann::json::array();
    for (const auto& s : model.segments) segs.push_back(matrix_to_json(s));
    return {{"p", model.p},
            {"d", model.d},
            {"T", model.T},
            {"breaks", model.breaks},
            {"segments", std::move(segs)},
            {"noise_cov", matrix_to_json(model.noise_cov)}};
}

SegmentedVarModel model_from_json(const nlohmann::json& doc)
{
    try {
        SegmentedVarModel m;
        m.p = doc.at("p").get<int>();
        m.d = doc.at("d").get<int>();
        m.T = doc.at("T").get<int>();
        m.breaks = doc.at("breaks").get<std::vector<int>>();
        for (const auto& s : doc.at("segments")) m.segments.push_back(matrix_from_json(s));
        m.noise_cov = matrix_from_json(doc.at("noise_cov"));
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model JSON: ") + e.what());
    }
}

nlohmann::json schedule_to_json(const TuningSchedule& s)
{
    return {{"n", s.n},
            {"lambda_constant", s.lambda_constant},
            {"v_exponent", s.v_exponent},
            {"eta_constant", s.eta_constant},
            {"lambda_n", s.lambda_n},
            {"gamma_n", s.gamma_n},
            {"eta_n", s.eta_n},
            {"omega_n", s.omega_n}};
}

} // namespace varseg
