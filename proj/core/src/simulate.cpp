#include "varseg/simulate.hpp"

#include <algorithm>
#include <numeric>

namespace varseg {

namespace {

constexpr std::uint64_t kNoiseStream = 0;
constexpr std::uint64_t kBurnInStream = 1;
constexpr std::uint64_t kModelStream = 2;

Matrix noise_factor(const Matrix& cov)
{
    Eigen::LLT<Matrix> llt(cov.selfadjointView<Eigen::Lower>());
    if (llt.info() != Eigen::Success) throw ValidationError("noise covariance not positive definite");
    return llt.matrixL();
}

void draw_noise(std::mt19937_64& engine, const Matrix& factor, Vector& z, Vector& out)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = normal(engine);
    out.noalias() = factor.triangularView<Eigen::Lower>() * z;
}

/// sum_k Phi_k * history[k], history[0] = y_{t-1}.
void apply_segment(const Matrix& phi, int p, int d, const std::vector<Vector>& history, Vector& out)
{
    out.setZero();
    for (int k = 0; k < d; ++k) out.noalias() += phi.middleCols(static_cast<Eigen::Index>(k) * p, p) * history[k];
}

void push_history(std::vector<Vector>& history, const Vector& y)
{
    std::rotate(history.rbegin(), history.rbegin() + 1, history.rend());
    history.front() = y;
}

} // namespace

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

TimeSeries simulate_noise(const SimulationConfig& config)
{
    require_valid(config.model);
    const auto& m = config.model;
    const Matrix factor = noise_factor(m.noise_cov);
    auto engine = make_engine(config.seed, kNoiseStream);
    TimeSeries eps(m.T, m.p);
    Vector z(m.p), e(m.p);
    for (int t = 0; t < m.T; ++t) {
        draw_noise(engine, factor, z, e);
        eps.row(t) = e.transpose();
    }
    return eps;
}

TimeSeries simulate(const SimulationConfig& config)
{
    if (config.burn_in < 0) throw InvalidArgument("simulate: burn_in must be >= 0");
    const auto& m = config.model;
    const TimeSeries eps = simulate_noise(config);
    const Matrix factor = noise_factor(m.noise_cov);

    std::vector<Vector> history(static_cast<std::size_t>(m.d), Vector::Zero(m.p));
    Vector mean(m.p), z(m.p), e(m.p), y(m.p);

    auto burn = make_engine(config.seed, kBurnInStream);
    for (int s = 0; s < config.burn_in; ++s) {
        apply_segment(m.segments.front(), m.p, m.d, history, mean);
        draw_noise(burn, factor, z, e);
        y = mean + e;
        push_history(history, y);
    }

    TimeSeries out(m.T, m.p);
    for (int t = 1; t <= m.T; ++t) {
        apply_segment(m.segments[m.segment_at(t)], m.p, m.d, history, mean);
        y = mean + eps.row(t - 1).transpose();
        out.row(t - 1) = y.transpose();
        push_history(history, y);
    }
    return out;
}

ScenarioPreset scenario_preset(Scenario id)
{
    ScenarioPreset preset;
    preset.id = id;
    preset.breaks = id == Scenario::kBoundary ? std::vector<int>{30, 250} : std::vector<int>{100, 200};
    return preset;
}

Scenario scenario_from_int(int id)
{
    switch (id) {
    case 1: return Scenario::kCenter;
    case 2: return Scenario::kBoundary;
    case 3: return Scenario::kRandom;
    default: throw InvalidArgument("scenario must be 1, 2 or 3, got " + std::to_string(id));
    }
}

std::string scenario_name(Scenario id)
{
    switch (id) {
    case Scenario::kCenter: return "S1_center";
    case Scenario::kBoundary: return "S2_boundary";
    case Scenario::kRandom: return "S3_random";
    }
    return "unknown";
}

namespace {

Matrix banded_segment(int p, double diagonal, double band)
{
    Matrix phi = Matrix::Zero(p, p);
    phi.diagonal().setConstant(diagonal);
    if (p > 1) phi.diagonal(1).setConstant(band);
    return phi;
}

Matrix random_sparse_segment(int p, double cap, std::mt19937_64& engine)
{
    std::uniform_real_distribution<double> magnitude(0.2, 0.4);
    std::bernoulli_distribution negative(0.5);
    std::vector<int> cols(static_cast<std::size_t>(p));
    const int per_row = std::min(2, p);
    for (;;) {
        Matrix phi = Matrix::Zero(p, p);
        for (int r = 0; r < p; ++r) {
            std::iota(cols.begin(), cols.end(), 0);
            // partial Fisher-Yates for per_row distinct columns
            for (int k = 0; k < per_row; ++k) {
                std::uniform_int_distribution<int> pick(k, p - 1);
                std::swap(cols[static_cast<std::size_t>(k)], cols[static_cast<std::size_t>(pick(engine))]);
                const double v = magnitude(engine);
                phi(r, cols[static_cast<std::size_t>(k)]) = negative(engine) ? -v : v;
            }
        }
        if (companion_spectral_radius(phi, p, 1) <= cap) return phi;
    }
}

} // namespace

SimulationConfig make_scenario(Scenario id, std::uint64_t seed)
{
    const ScenarioPreset preset = scenario_preset(id);
    SimulationConfig config;
    config.seed = seed;
    auto& m = config.model;
    m.p = preset.p;
    m.d = preset.d;
    m.T = preset.T;
    m.breaks = preset.breaks;
    m.noise_cov = preset.noise_scale * Matrix::Identity(preset.p, preset.p);

    if (id == Scenario::kRandom) {
        auto engine = make_engine(seed, kModelStream);
        for (int j = 0; j <= preset.m0; ++j) {
            Matrix phi;
            do {
                phi = random_sparse_segment(preset.p, preset.spectral_cap, engine);
            } while (!m.segments.empty() && phi == m.segments.back());
            m.segments.push_back(std::move(phi));
        }
    } else {
        m.segments = {banded_segment(preset.p, 0.6, 0.1), banded_segment(preset.p, -0.4, -0.1),
                      banded_segment(preset.p, 0.5, 0.1)};
    }
    require_valid(m);
    return config;
}

} // namespace varseg
