#pragma once
//
// Storage phase: rows arrive one at a time, the open block's factor
// triple is updated in place, full blocks are truncated to the energy
// threshold and sealed. Raw rows are never retained.
//

#include <Eigen/Core>
#include <Eigen/QR>

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>

#include <rangesvd/svd.hpp>

namespace rangesvd {

/// Drift repair runs after this many in-place updates of an open block.
inline constexpr std::size_t kReorthCadence = 64;

/// The block currently being filled; u has rows_seen rows.
struct OpenBlock {
    std::size_t index     = 0;
    std::size_t rows_seen = 0;
    SvdFactors  factors;
};

/// A finished block: u has exactly block_size rows and the factors are
/// truncated to the store's energy threshold.
struct SealedBlock {
    std::size_t index = 0;
    SvdFactors  factors;
};

namespace detail {

inline void check_row(std::span<const double> row, std::size_t num_columns) {
    if (row.size() != num_columns) {
        throw InvalidInputError("row has wrong number of columns");
    }
    for (double v : row) {
        if (!std::isfinite(v)) {
            throw InvalidInputError("row entries must be finite");
        }
    }
}

} // namespace detail

/// Starts a block from its first row. A zero row yields rank-0 factors.
inline OpenBlock open_block_from_row(std::size_t index, std::span<const double> row) {
    return OpenBlock{index, 1, thin_svd(DenseMatrix::from_row(row))};
}

/// Folds one new row into an open block's factors: decompose the stack
/// [diag(sigma) V^T ; row], then push the old U down into the new left
/// factor. Only the numerical-rank cutoff is applied here; the energy
/// threshold is applied once, at sealing.
inline OpenBlock incremental_update(const OpenBlock& block, std::span<const double> row,
                                    std::size_t capacity) {
    if (block.rows_seen >= capacity) {
        throw std::logic_error("incremental_update: block is already full");
    }
    const std::size_t cols = block.factors.right_rows();
    detail::check_row(row, cols);

    const std::size_t k = block.factors.rank();

    DenseMatrix stacked(k + 1, cols);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            stacked(i, j) = block.factors.sigma[i] * block.factors.v(j, i);
        }
    }
    for (std::size_t j = 0; j < cols; ++j) {
        stacked(k, j) = row[j];
    }

    const SvdFactors  inner = thin_svd(stacked);
    const std::size_t k_new = inner.rank();

    // [[U 0] [0 1]] * U_inner, evaluated as two bands.
    DenseMatrix u_new(block.rows_seen + 1, k_new);
    if (k_new > 0) {
        u_new.map().topRows(static_cast<Eigen::Index>(block.rows_seen)) =
            block.factors.u.map() * inner.u.map().topRows(static_cast<Eigen::Index>(k));
        u_new.map().row(static_cast<Eigen::Index>(block.rows_seen)) =
            inner.u.map().row(static_cast<Eigen::Index>(k));
    }

    return OpenBlock{block.index, block.rows_seen + 1,
                     SvdFactors{std::move(u_new), inner.sigma, inner.v}};
}

/// Repairs floating-point drift: if U has lost column orthonormality, it
/// is re-factored as Q R and R is absorbed into diag(sigma) V^T through a
/// small thin SVD. Reconstruction is preserved.
inline OpenBlock reorthonormalize(OpenBlock block) {
    const std::size_t k = block.factors.rank();
    if (k == 0 || orthonormality_defect(block.factors.u) <= kOrthonormalityTol) {
        return block;
    }

    const Eigen::MatrixXd              u = block.factors.u.map();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(u);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(
                                                      u.rows(), static_cast<Eigen::Index>(k));
    const Eigen::MatrixXd r = qr.matrixQR()
                                  .topRows(static_cast<Eigen::Index>(k))
                                  .triangularView<Eigen::Upper>();

    const Eigen::Map<const Eigen::VectorXd> sigma(block.factors.sigma.data(),
                                                  static_cast<Eigen::Index>(k));
    const DenseMatrix absorbed =
        DenseMatrix::from_expr(r * sigma.asDiagonal() * block.factors.v.map().transpose());

    const SvdFactors inner = thin_svd(absorbed);
    SvdFactors       fixed;
    fixed.u     = DenseMatrix::from_expr(q * inner.u.map());
    fixed.sigma = inner.sigma;
    fixed.v     = inner.v;
    return OpenBlock{block.index, block.rows_seen, std::move(fixed)};
}

class BlockStore;

/// Immutable view of a store at one instant: a sealed-block count, a copy
/// of the open block and the shared sealed list. Sealed blocks are never
/// mutated after sealing and the deque keeps element references stable, so
/// a snapshot stays valid while a single writer keeps appending.
struct StoreSnapshot {
    std::size_t                   block_size   = 0;
    std::size_t                   num_columns  = 0;
    double                        energy_threshold = 1.0;
    std::size_t                   total_rows   = 0;
    std::size_t                   sealed_count = 0;
    const std::deque<SealedBlock>* sealed      = nullptr;
    std::optional<OpenBlock>      open;

    std::size_t block_count() const { return sealed_count + (open ? 1 : 0); }

    std::size_t block_rows(std::size_t i) const {
        return i < sealed_count ? block_size : open->rows_seen;
    }

    const SvdFactors& block_factors(std::size_t i) const {
        if (i < sealed_count) {
            return (*sealed)[i].factors;
        }
        return open->factors;
    }
};

/// Ordered sealed per-block factors plus one open tail block; the entire
/// state kept for a stream. Single writer; concurrent readers work off
/// snapshot().
class BlockStore {
public:
    BlockStore(std::size_t block_size, std::size_t num_columns, double energy_threshold)
        : block_size_(block_size), num_columns_(num_columns), energy_threshold_(energy_threshold) {
        if (block_size_ < 1 || num_columns_ < 1) {
            throw InvalidParameterError("block size and column count must be at least 1");
        }
        if (!(energy_threshold_ > 0.0) || energy_threshold_ > 1.0) {
            throw InvalidParameterError("energy threshold must lie in (0, 1]");
        }
    }

    std::size_t block_size() const { return block_size_; }
    std::size_t num_columns() const { return num_columns_; }
    double      energy_threshold() const { return energy_threshold_; }
    std::size_t total_rows() const { return total_rows_; }

    const std::deque<SealedBlock>& sealed() const { return sealed_; }
    const std::optional<OpenBlock>& open() const { return open_; }

    /// Consumes one time tick.
    void append(std::span<const double> row) {
        detail::check_row(row, num_columns_);
        if (!open_) {
            open_.emplace(open_block_from_row(sealed_.size(), row));
            updates_since_reorth_ = 0;
        } else {
            *open_ = incremental_update(*open_, row, block_size_);
            if (++updates_since_reorth_ >= kReorthCadence) {
                *open_                = reorthonormalize(std::move(*open_));
                updates_since_reorth_ = 0;
            }
        }
        if (open_->rows_seen == block_size_) {
            seal_open_block();
        }
        ++total_rows_;
    }

    StoreSnapshot snapshot() const {
        return StoreSnapshot{block_size_, num_columns_, energy_threshold_,
                             total_rows_, sealed_.size(), &sealed_, open_};
    }

    /// Rebuilds a store from persisted parts; counts must be consistent.
    static BlockStore from_parts(std::size_t block_size, std::size_t num_columns,
                                 double energy_threshold, std::deque<SealedBlock> sealed,
                                 std::optional<OpenBlock> open) {
        BlockStore store(block_size, num_columns, energy_threshold);
        std::size_t rows = 0;
        for (std::size_t i = 0; i < sealed.size(); ++i) {
            if (sealed[i].index != i || sealed[i].factors.left_rows() != block_size ||
                sealed[i].factors.right_rows() != num_columns) {
                throw InvalidInputError("from_parts: inconsistent sealed block");
            }
            rows += block_size;
        }
        if (open) {
            if (open->index != sealed.size() || open->rows_seen < 1 ||
                open->rows_seen > block_size ||
                open->factors.left_rows() != open->rows_seen ||
                open->factors.right_rows() != num_columns) {
                throw InvalidInputError("from_parts: inconsistent open block");
            }
            rows += open->rows_seen;
        }
        store.sealed_     = std::move(sealed);
        store.open_       = std::move(open);
        store.total_rows_ = rows;
        return store;
    }

private:
    void seal_open_block() {
        OpenBlock block = reorthonormalize(std::move(*open_));
        SvdFactors kept = canonical_sign(truncate_rank(block.factors, energy_threshold_));
        sealed_.push_back(SealedBlock{block.index, std::move(kept)});
        open_.reset();
        updates_since_reorth_ = 0;
    }

    std::size_t              block_size_;
    std::size_t              num_columns_;
    double                   energy_threshold_;
    std::size_t              total_rows_ = 0;
    std::size_t              updates_since_reorth_ = 0;
    std::deque<SealedBlock>  sealed_;
    std::optional<OpenBlock> open_;
};

} // namespace rangesvd
