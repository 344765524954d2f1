#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include <rangesvd/errors.hpp>

namespace rangesvd {

/// Dense row-major matrix of 64-bit floats. Entries are checked to be
/// finite whenever a matrix is built from external data.
class DenseMatrix {
public:
    using EigenRowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using ConstMap      = Eigen::Map<const EigenRowMajor>;
    using MutableMap    = Eigen::Map<EigenRowMajor>;

    DenseMatrix() = default;

    /// Zero-filled rows x cols matrix.
    DenseMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    /// Takes ownership of row-major data; rejects wrong length and non-finite entries.
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_) {
            throw InvalidInputError("matrix data length does not match rows x cols");
        }
        if (!all_finite()) {
            throw InvalidInputError("matrix entries must be finite");
        }
    }

    static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        std::vector<double> data;
        std::size_t         nrows = rows.size();
        std::size_t         ncols = nrows == 0 ? 0 : rows.begin()->size();
        data.reserve(nrows * ncols);
        for (const auto& r : rows) {
            if (r.size() != ncols) {
                throw InvalidInputError("from_rows: ragged row lengths");
            }
            data.insert(data.end(), r.begin(), r.end());
        }
        return DenseMatrix(nrows, ncols, std::move(data));
    }

    static DenseMatrix from_row(std::span<const double> row) {
        return DenseMatrix(1, row.size(), std::vector<double>(row.begin(), row.end()));
    }

    /// Evaluates an Eigen expression into a DenseMatrix.
    template <typename Derived>
    static DenseMatrix from_expr(const Eigen::MatrixBase<Derived>& expr) {
        DenseMatrix m(static_cast<std::size_t>(expr.rows()), static_cast<std::size_t>(expr.cols()));
        if (m.size() > 0) {
            m.map() = expr;
            if (!m.all_finite()) {
                throw InvalidInputError("matrix expression produced non-finite entries");
            }
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

    std::span<const double> values() const { return data_; }
    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * cols_, cols_};
    }

    ConstMap map() const {
        return ConstMap(data_.data(), static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
    }
    MutableMap map() {
        return MutableMap(data_.data(), static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
    }

    bool all_finite() const {
        for (double v : data_) {
            if (!std::isfinite(v)) {
                return false;
            }
        }
        return true;
    }

    double frobenius_norm() const {
        double sum = 0.0;
        for (double v : data_) {
            sum += v * v;
        }
        return std::sqrt(sum);
    }

    DenseMatrix left_cols(std::size_t k) const {
        DenseMatrix out(rows_, k);
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                out(i, j) = (*this)(i, j);
            }
        }
        return out;
    }

    DenseMatrix middle_rows(std::size_t first, std::size_t count) const {
        DenseMatrix out(count, cols_);
        std::copy(data_.begin() + static_cast<std::ptrdiff_t>(first * cols_),
                  data_.begin() + static_cast<std::ptrdiff_t>((first + count) * cols_),
                  out.data_.begin());
        return out;
    }

    bool operator==(const DenseMatrix&) const = default;

private:
    std::size_t         rows_ = 0;
    std::size_t         cols_ = 0;
    std::vector<double> data_;
};

} // namespace rangesvd
