#include "varseg/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace varseg {

PlotBundle make_plot_bundle(const TimeSeries& data, const DetectionResult& result, const std::vector<int>& truth)
{
    PlotBundle b;
    b.series = data;
    b.d = result.d;
    b.candidates = result.stage1.times;
    b.final_breaks = result.final_breaks;
    b.true_breaks = truth;
    b.heatmaps = result.final_models;
    check_bundle(b);
    return b;
}

void check_bundle(const PlotBundle& b)
{
    const auto T = static_cast<int>(b.series.rows());
    const auto p = b.series.cols();
    auto check = [&](const std::vector<int>& marks, const char* what) {
        for (int t : marks) {
            if (t < 1 || t > T) throw InvalidArgument(std::string(what) + " marker " + std::to_string(t) + " outside [1, T]");
        }
    };
    check(b.candidates, "candidate");
    check(b.final_breaks, "final");
    check(b.true_breaks, "truth");
    for (const auto& h : b.heatmaps) {
        if (h.rows() != p || h.cols() != p * b.d) throw InvalidArgument("heatmap must be p x pd");
    }
}

namespace {

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string diverging_color(double v, double vmax)
{
    const double x = vmax > 0.0 ? std::clamp(v / vmax, -1.0, 1.0) : 0.0;
    // white at 0, red for positive, blue for negative
    const int fade = static_cast<int>(std::lround(255.0 * (1.0 - std::abs(x))));
    char buf[16];
    if (x >= 0.0) std::snprintf(buf, sizeof buf, "#ff%02x%02x", fade, fade);
    else std::snprintf(buf, sizeof buf, "#%02x%02xff", fade, fade);
    return buf;
}

} // namespace

std::string render_svg(const PlotBundle& b)
{
    check_bundle(b);
    const int T = static_cast<int>(b.series.rows());
    const auto p = b.series.cols();
    const double width = 900.0, panel_h = 320.0, margin = 40.0;
    const double cell = 8.0, heat_gap = 20.0;
    const double heat_top = margin + panel_h + 40.0;
    const double heat_h = b.heatmaps.empty() ? 0.0 : static_cast<double>(p) * cell;
    const double height = heat_top + heat_h + margin;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
        << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    const double plot_w = width - 2 * margin;
    auto x_of = [&](double t) { return margin + (T > 1 ? (t - 1.0) / (T - 1.0) : 0.5) * plot_w; };
    const double vmax = b.series.size() ? std::max(b.series.cwiseAbs().maxCoeff(), 1e-300) : 1.0;
    auto y_of = [&](double v) { return margin + panel_h * 0.5 * (1.0 - v / vmax); };

    svg << "<rect x=\"" << num(margin) << "\" y=\"" << num(margin) << "\" width=\"" << num(plot_w)
        << "\" height=\"" << num(panel_h) << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (Eigen::Index c = 0; c < p; ++c) {
        svg << "<polyline fill=\"none\" stroke=\"#555\" stroke-opacity=\"0.5\" stroke-width=\"0.6\" points=\"";
        for (int t = 1; t <= T; ++t) svg << num(x_of(t)) << ',' << num(y_of(b.series(t - 1, c))) << ' ';
        svg << "\"/>\n";
    }
    auto markers = [&](const std::vector<int>& marks, const char* color, const char* dash, double w) {
        for (int t : marks) {
            svg << "<line x1=\"" << num(x_of(t)) << "\" x2=\"" << num(x_of(t)) << "\" y1=\"" << num(margin)
                << "\" y2=\"" << num(margin + panel_h) << "\" stroke=\"" << color << "\" stroke-width=\"" << num(w)
                << '"';
            if (*dash) svg << " stroke-dasharray=\"" << dash << '"';
            svg << "/>\n";
        }
    };
    markers(b.candidates, "#999999", "3,3", 1.0);
    markers(b.true_breaks, "#2a9d2a", "6,3", 1.5);
    markers(b.final_breaks, "#d62728", "", 2.0);

    double heat_max = 0.0;
    for (const auto& h : b.heatmaps) heat_max = std::max(heat_max, h.size() ? h.cwiseAbs().maxCoeff() : 0.0);
    double left = margin;
    for (std::size_t s = 0; s < b.heatmaps.size(); ++s) {
        const Matrix& h = b.heatmaps[s];
        svg << "<text x=\"" << num(left) << "\" y=\"" << num(heat_top - 6) << "\" font-size=\"11\">segment "
            << (s + 1) << "</text>\n";
        for (Eigen::Index r = 0; r < h.rows(); ++r) {
            for (Eigen::Index c = 0; c < h.cols(); ++c) {
                svg << "<rect x=\"" << num(left + c * cell) << "\" y=\"" << num(heat_top + r * cell)
                    << "\" width=\"" << num(cell) << "\" height=\"" << num(cell) << "\" fill=\""
                    << diverging_color(h(r, c), heat_max) << "\"/>\n";
            }
        }
        left += static_cast<double>(h.cols()) * cell + heat_gap;
    }
    svg << "</svg>\n";
    return svg.str();
}

void write_markers_csv(std::ostream& out, const PlotBundle& b)
{
    out << "kind,time\n";
    for (int t : b.candidates) out << "candidate," << t << '\n';
    for (int t : b.final_breaks) out << "final," << t << '\n';
    for (int t : b.true_breaks) out << "truth," << t << '\n';
}

nlohmann::json bundle_to_json(const PlotBundle& b)
{
    nlohmann::json heat = nlohmann::json::array();
    for (const auto& h : b.heatmaps) heat.push_back(matrix_to_json(h));
    return {{"d", b.d},
            {"series", matrix_to_json(b.series)},
            {"candidates", b.candidates},
            {"final_breaks", b.final_breaks},
            {"true_breaks", b.true_breaks},
            {"heatmaps", std::move(heat)}};
}

PlotBundle bundle_from_json(const nlohmann::json& doc)
{
    try {
        PlotBundle b;
        b.d = doc.at("d").get<int>();
        b.series = matrix_from_json(doc.at("series"));
        b.candidates = doc.at("candidates").get<std::vector<int>>();
        b.final_breaks = doc.at("final_breaks").get<std::vector<int>>();
        b.true_breaks = doc.value("true_breaks", std::vector<int>{});
        for (const auto& h : doc.at("heatmaps")) b.heatmaps.push_back(matrix_from_json(h));
        check_bundle(b);
        return b;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("plot bundle JSON: ") + e.what());
    }
}

} // namespace varseg
