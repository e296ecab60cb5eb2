#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "varseg/pipeline.hpp"

namespace varseg {

/// Everything needed to draw a detection figure, kept as plain data.
struct PlotBundle {
    TimeSeries series;               ///< T x p
    int d = 1;
    std::vector<int> candidates;     ///< stage-1 markers
    std::vector<int> final_breaks;   ///< stage-2 markers
    std::vector<int> true_breaks;    ///< optional ground truth
    std::vector<Matrix> heatmaps;    ///< p x pd per final segment
};

PlotBundle make_plot_bundle(const TimeSeries& data, const DetectionResult& result,
                            const std::vector<int>& true_breaks = {});

/// Throws InvalidArgument if a marker lies outside [1, T] or a heatmap is not p x pd.
void check_bundle(const PlotBundle& bundle);

/// Series panel with break markers above one coefficient heatmap per segment.
std::string render_svg(const PlotBundle& bundle);

/// kind,time rows for candidate, final and truth markers.
void write_markers_csv(std::ostream& out, const PlotBundle& bundle);

nlohmann::json bundle_to_json(const PlotBundle& bundle);
PlotBundle bundle_from_json(const nlohmann::json& doc);

} // namespace varseg
