#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "varseg/model.hpp"

namespace varseg {

/// Seedable stream source. Each (seed, stream) pair yields an independent
/// mt19937_64 so replicate r never shares generator state with replicate r'.
std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream);

struct SimulationConfig {
    SegmentedVarModel model;
    std::uint64_t seed = 0;
    int burn_in = 200;
};

/**
 * Draws a T x p series from the piecewise recursion.
 *
 * The burn-in runs under the first segment from a zero state and uses its own
 * noise stream, so the innovations for t = 1..T depend on the seed only.
 * At each break the recursion continues from the last d observed values.
 */
TimeSeries simulate(const SimulationConfig& config);

/// The innovations eps_1..eps_T that simulate() feeds into the recursion.
TimeSeries simulate_noise(const SimulationConfig& config);

enum class Scenario { kCenter = 1, kBoundary = 2, kRandom = 3 };

struct ScenarioPreset {
    Scenario id = Scenario::kCenter;
    int T = 300;
    int p = 20;
    int d = 1;
    int m0 = 2;
    double noise_scale = 0.01;
    std::vector<int> breaks;
    double spectral_cap = 0.9;
};

ScenarioPreset scenario_preset(Scenario id);
Scenario scenario_from_int(int id);
std::string scenario_name(Scenario id);

/**
 * Builds a validated simulation config for a preset.
 *
 * Center/boundary: diagonals 0.6, -0.4, 0.5 with a superdiagonal band whose
 * sign alternates (+0.1, -0.1, +0.1). Random: per segment, two nonzeros per
 * row at random columns with values +-U(0.2, 0.4), redrawn until the spectral
 * radius is at most 0.9.
 */
SimulationConfig make_scenario(Scenario id, std::uint64_t seed);

} // namespace varseg
