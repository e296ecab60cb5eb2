#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace varseg {

/// Bad parameter values or inconsistent dimensions.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed input data. Row and column are 1-based; 0 means "not applicable".
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t row = 0, std::size_t col = 0)
        : std::runtime_error(format(what, row, col)), row_(row), col_(col) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t col() const noexcept { return col_; }

private:
    static std::string format(const std::string& what, std::size_t row, std::size_t col)
    {
        std::string out = what;
        if (row) out += " (row " + std::to_string(row);
        if (row && col) out += ", column " + std::to_string(col);
        if (row) out += ")";
        return out;
    }

    std::size_t row_;
    std::size_t col_;
};

/// Numerical failure inside a solver, e.g. a singular block Gram.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, std::ptrdiff_t block = -1)
        : std::runtime_error(what), block_(block) {}

    /// Offending block index, or -1.
    std::ptrdiff_t block() const noexcept { return block_; }

private:
    std::ptrdiff_t block_;
};

/// A break subset that leaves some segment with too few rows.
class InfeasibleSubset : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a model that must be valid is not. Message lists every issue.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace varseg
