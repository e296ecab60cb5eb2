#pragma once

#include <istream>
#include <ostream>
#include <string>

#include "varseg/model.hpp"

namespace varseg {

/// Preprocessing applied after parsing, in this order: downsample, difference, center.
struct IngestOptions {
    bool difference = false;  ///< first differences, drops one row
    int downsample = 1;       ///< keep rows 1, 1+k, 1+2k, ...
    bool center = false;      ///< subtract column means
};

/**
 * Parses a numeric CSV. A first row with any non-numeric cell is a header;
 * if its first cell is "t" the first column is a time index and is dropped.
 * Ragged rows, non-numeric cells and non-finite values raise ParseError with
 * the 1-based file row and column.
 */
TimeSeries parse_csv(std::istream& in);
TimeSeries ingest_csv(const std::string& path, const IngestOptions& options = {});
TimeSeries preprocess(const TimeSeries& data, const IngestOptions& options);

/// Header t,y1,...,yp and one row per time point, 17 significant digits.
void write_csv(std::ostream& out, const TimeSeries& data);
void write_csv(const std::string& path, const TimeSeries& data);

/// Writes text to a file, throwing std::runtime_error on failure.
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

} // namespace varseg
