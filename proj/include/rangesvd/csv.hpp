#pragma once
//
// CSV ingestion for raw streams: comma-separated 64-bit floats, one time
// tick per line, optional header line and optional leading timestamp
// column. Rows are yielded in file order, never buffered whole.
//

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <rangesvd/errors.hpp>
#include <rangesvd/matrix.hpp>

namespace rangesvd {

struct CsvOptions {
    /// Require exactly this many value columns (after any timestamp drop).
    std::optional<std::size_t> expected_cols;
    /// Discard the first column of every row.
    bool drop_timestamp = false;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const char* ws = " \t\r\f\v";
    const auto  b  = s.find_first_not_of(ws);
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline bool parse_cell(std::string_view cell, double& out) {
    cell = trim(cell);
    if (cell.empty()) {
        return false;
    }
    const char* end = cell.data() + cell.size();
    auto [ptr, ec]  = std::from_chars(cell.data(), end, out);
    return ec == std::errc() && ptr == end;
}

inline void split_line(std::string_view line, std::vector<std::string_view>& cells) {
    cells.clear();
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(line.substr(start));
            return;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

} // namespace detail

/// Streaming row reader. The column count is fixed by expected_cols or by
/// the first data row; later disagreement is a ragged-row parse error.
class CsvReader {
public:
    explicit CsvReader(const std::string& path, CsvOptions options = {})
        : in_(path), options_(options) {
        if (!in_) {
            throw IoError("cannot open '" + path + "' for reading");
        }
    }

    /// Next row, or nullopt at end of input.
    std::optional<std::vector<double>> next() {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_;
            if (detail::trim(line).empty()) {
                continue;
            }
            detail::split_line(line, cells_);

            // A leading line with no numeric cell at all is a header; a
            // partly numeric first line is data with bad cells.
            if (!saw_content_) {
                saw_content_ = true;
                if (none_numeric(cells_)) {
                    continue;
                }
            }

            std::size_t first_cell = 0;
            if (options_.drop_timestamp) {
                if (cells_.size() < 2) {
                    throw ParseError(line_, "row has no value columns after the timestamp");
                }
                first_cell = 1;
            }

            std::vector<double> row;
            row.reserve(cells_.size() - first_cell);
            for (std::size_t i = first_cell; i < cells_.size(); ++i) {
                double value = 0.0;
                if (!detail::parse_cell(cells_[i], value)) {
                    throw ParseError(line_, "cell '" + std::string(detail::trim(cells_[i])) +
                                                "' is not numeric");
                }
                if (!std::isfinite(value)) {
                    throw ParseError(line_, "cell value is not finite");
                }
                row.push_back(value);
            }

            if (cols_ == 0) {
                if (options_.expected_cols && row.size() != *options_.expected_cols) {
                    throw SchemaError("expected " + std::to_string(*options_.expected_cols) +
                                      " columns, file has " + std::to_string(row.size()));
                }
                cols_ = row.size();
            } else if (row.size() != cols_) {
                throw ParseError(line_, "expected " + std::to_string(cols_) + " columns, got " +
                                            std::to_string(row.size()));
            }
            return row;
        }
        return std::nullopt;
    }

    /// Columns per row; 0 until the first data row has been read.
    std::size_t cols() const { return cols_; }

private:
    static bool none_numeric(const std::vector<std::string_view>& cells) {
        double value = 0.0;
        for (std::string_view c : cells) {
            if (detail::parse_cell(c, value)) {
                return false;
            }
        }
        return true;
    }

    std::ifstream                 in_;
    CsvOptions                    options_;
    std::size_t                   line_ = 0;
    std::size_t                   cols_ = 0;
    bool                          saw_content_ = false;
    std::vector<std::string_view> cells_;
};

inline std::vector<std::vector<double>> read_csv_rows(const std::string& path,
                                                      CsvOptions options = {}) {
    CsvReader                        reader(path, options);
    std::vector<std::vector<double>> rows;
    while (auto row = reader.next()) {
        rows.push_back(std::move(*row));
    }
    return rows;
}

/// Whole file as a matrix; errors if the file has no data rows.
inline DenseMatrix read_csv_matrix(const std::string& path, CsvOptions options = {}) {
    const auto rows = read_csv_rows(path, options);
    if (rows.empty()) {
        throw InvalidInputError("'" + path + "' contains no data rows");
    }
    DenseMatrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            m(i, j) = rows[i][j];
        }
    }
    return m;
}

} // namespace rangesvd
