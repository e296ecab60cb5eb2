#include "varseg/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace varseg {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line)
{
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

bool parse_double(std::string_view cell, double& out)
{
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    const auto* first = cell.data();
    const auto* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && !cell.empty();
}

} // namespace

TimeSeries parse_csv(std::istream& in)
{
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t file_row = 0;
    std::size_t width = 0;
    bool drop_first = false;
    bool first_content = true;

    while (std::getline(in, line)) {
        ++file_row;
        if (trim(line).empty()) continue;
        const auto cells = split(line);
        if (first_content) {
            first_content = false;
            double probe;
            bool header = false;
            for (auto c : cells) header = header || !parse_double(c, probe);
            if (header) {
                drop_first = cells.front() == "t";
                width = cells.size();
                continue;
            }
        }
        if (width == 0) width = cells.size();
        if (cells.size() != width) {
            throw ParseError("ragged row: expected " + std::to_string(width) + " cells, got " +
                                 std::to_string(cells.size()),
                             file_row);
        }
        std::vector<double> values;
        values.reserve(width);
        for (std::size_t c = drop_first ? 1 : 0; c < cells.size(); ++c) {
            double v;
            if (!parse_double(cells[c], v)) {
                throw ParseError("non-numeric cell '" + std::string(cells[c]) + "'", file_row, c + 1);
            }
            if (!std::isfinite(v)) throw ParseError("non-finite value", file_row, c + 1);
            values.push_back(v);
        }
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw ParseError("no data rows");
    const std::size_t cols = rows.front().size();
    if (cols == 0) throw ParseError("no data columns");
    TimeSeries out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < cols; ++c) out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
    return out;
}

TimeSeries preprocess(const TimeSeries& data, const IngestOptions& opt)
{
    if (opt.downsample < 1) throw InvalidArgument("downsample factor must be >= 1");
    TimeSeries out = data;
    if (opt.downsample > 1) {
        const Eigen::Index rows = (data.rows() + opt.downsample - 1) / opt.downsample;
        out.resize(rows, data.cols());
        for (Eigen::Index r = 0; r < rows; ++r) out.row(r) = data.row(r * opt.downsample);
    }
    if (opt.difference) {
        if (out.rows() < 2) throw InvalidArgument("differencing needs at least two rows");
        out = (out.bottomRows(out.rows() - 1) - out.topRows(out.rows() - 1)).eval();
    }
    if (opt.center) out.rowwise() -= out.colwise().mean();
    return out;
}

TimeSeries ingest_csv(const std::string& path, const IngestOptions& options)
{
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    return preprocess(parse_csv(in), options);
}

void write_csv(std::ostream& out, const TimeSeries& data)
{
    out << 't';
    for (Eigen::Index c = 0; c < data.cols(); ++c) out << ",y" << (c + 1);
    out << '\n';
    char buf[32];
    for (Eigen::Index r = 0; r < data.rows(); ++r) {
        out << (r + 1);
        for (Eigen::Index c = 0; c < data.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", data(r, c));
            out << ',' << buf;
        }
        out << '\n';
    }
}

void write_csv(const std::string& path, const TimeSeries& data)
{
    std::ostringstream buf;
    write_csv(buf, data);
    write_text(path, buf.str());
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::string read_text(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace varseg
