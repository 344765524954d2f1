#pragma once
//
// Query phase: answer an arbitrary closed row range [first, last] from
// stored factors alone. Boundary blocks are trimmed to the in-range rows
// (the 0/1 elimination matrices are realized as row slices, never
// materialized), then all per-block factors are stitched into one SVD by
// decomposing the stacked diag(sigma) V^T bands and distributing the left
// factor back block by block.
//

#include <cstddef>
#include <vector>

#include <rangesvd/store.hpp>

namespace rangesvd {

/// A closed query interval with its block coordinates.
struct TimeRange {
    std::size_t first_row   = 0; // t_s
    std::size_t last_row    = 0; // t_e, inclusive
    std::size_t start_block = 0;
    std::size_t end_block   = 0;
    std::size_t skip_front  = 0; // rows of the start block before the range
    std::size_t keep_front  = 0; // rows of the start block inside the range
    std::size_t keep_back   = 0; // rows of the end block inside the range
    std::size_t skip_back   = 0; // rows of the end block after the range

    std::size_t length() const { return last_row - first_row + 1; }

    /// Validates bounds against a snapshot and derives block coordinates.
    /// The end block may be the open tail; its row count is then the number
    /// of rows actually present.
    static TimeRange resolve(std::size_t first, std::size_t last, const StoreSnapshot& snap) {
        if (snap.total_rows == 0) {
            throw RangeError("range query on an empty store");
        }
        if (last < first || last >= snap.total_rows) {
            throw RangeError("time range out of bounds");
        }
        TimeRange r;
        r.first_row   = first;
        r.last_row    = last;
        r.start_block = first / snap.block_size;
        r.end_block   = last / snap.block_size;
        r.skip_front  = first - r.start_block * snap.block_size;
        r.keep_front  = snap.block_size - r.skip_front;
        r.keep_back   = last - r.end_block * snap.block_size + 1;
        r.skip_back   = snap.block_rows(r.end_block) - r.keep_back;
        return r;
    }
};

/// Answer to a range query; u has exactly length() rows.
struct RangeSvd {
    SvdFactors factors;

    std::size_t rows() const { return factors.left_rows(); }
    std::size_t rank() const { return factors.rank(); }
};

/// Restricts block factors to rows [keep_from, keep_to]: decomposes the
/// row-sliced U times diag(sigma), truncates at xi, and carries V along.
inline SvdFactors trim_block(const SvdFactors& block, std::size_t keep_from, std::size_t keep_to,
                             double xi) {
    if (!(xi > 0.0) || xi > 1.0) {
        throw InvalidParameterError("trim_block: threshold must lie in (0, 1]");
    }
    if (keep_from > keep_to || keep_to >= block.left_rows()) {
        throw InvalidParameterError("trim_block: empty or out-of-bounds keep range");
    }
    const std::size_t rows = keep_to - keep_from + 1;
    const std::size_t k    = block.rank();
    if (k == 0) {
        return make_empty_factors(rows, block.right_rows());
    }

    const Eigen::Map<const Eigen::VectorXd> sigma(block.sigma.data(), static_cast<Eigen::Index>(k));
    const DenseMatrix sliced = DenseMatrix::from_expr(
        block.u.map().middleRows(static_cast<Eigen::Index>(keep_from), static_cast<Eigen::Index>(rows)) *
        sigma.asDiagonal());

    SvdFactors inner = truncate_rank(thin_svd(sliced), xi);
    SvdFactors out;
    out.u     = std::move(inner.u);
    out.sigma = std::move(inner.sigma);
    out.v     = DenseMatrix::from_expr(block.v.map() * inner.v.map());
    return out;
}

namespace detail {

/// Stitch over borrowed parts; used by range_query to avoid copying the
/// factors of interior blocks.
inline SvdFactors stitch_parts(const std::vector<const SvdFactors*>& parts, double xi) {
    if (parts.empty()) {
        throw InvalidParameterError("stitch: part list must be non-empty");
    }
    const std::size_t cols = parts.front()->right_rows();
    std::size_t       total_rank = 0;
    std::size_t       total_rows = 0;
    for (const SvdFactors* p : parts) {
        if (p->right_rows() != cols) {
            throw InvalidInputError("stitch: parts disagree on column count");
        }
        total_rank += p->rank();
        total_rows += p->left_rows();
    }
    if (total_rank == 0) {
        return make_empty_factors(total_rows, cols);
    }

    // Stack the diag(sigma) V^T bands of all parts.
    DenseMatrix stacked(total_rank, cols);
    std::size_t band = 0;
    for (const SvdFactors* p : parts) {
        for (std::size_t i = 0; i < p->rank(); ++i, ++band) {
            for (std::size_t j = 0; j < cols; ++j) {
                stacked(band, j) = p->sigma[i] * p->v(j, i);
            }
        }
    }

    const SvdFactors  inner = truncate_rank(thin_svd(stacked), xi);
    const std::size_t k_out = inner.rank();

    // Distribute the stacked left factor: each part contributes the band
    // U_part * U_inner[band]; rank-0 parts contribute zero rows.
    DenseMatrix u_out(total_rows, k_out);
    std::size_t row_offset  = 0;
    std::size_t rank_offset = 0;
    for (const SvdFactors* p : parts) {
        if (p->rank() > 0 && k_out > 0) {
            u_out.map().middleRows(static_cast<Eigen::Index>(row_offset),
                                   static_cast<Eigen::Index>(p->left_rows())) =
                p->u.map() * inner.u.map().middleRows(static_cast<Eigen::Index>(rank_offset),
                                                      static_cast<Eigen::Index>(p->rank()));
        }
        row_offset += p->left_rows();
        rank_offset += p->rank();
    }

    return SvdFactors{std::move(u_out), inner.sigma, inner.v};
}

} // namespace detail

/// Combines consecutive per-block factors into the SVD of their vertical
/// concatenation, truncated at xi.
inline SvdFactors stitch(const std::vector<SvdFactors>& parts, double xi) {
    std::vector<const SvdFactors*> refs;
    refs.reserve(parts.size());
    for (const SvdFactors& p : parts) {
        refs.push_back(&p);
    }
    return detail::stitch_parts(refs, xi);
}

/// SVD of the stored stream restricted to rows [first, last], computed
/// from sealed factors only: both-sided trim for a single-block range,
/// otherwise trimmed boundary blocks stitched with the untouched interior
/// blocks. The result is sign-canonicalized.
inline RangeSvd range_query(const StoreSnapshot& snap, std::size_t first, std::size_t last,
                            double xi) {
    if (!(xi > 0.0) || xi > 1.0) {
        throw InvalidParameterError("range_query: threshold must lie in (0, 1]");
    }
    const TimeRange range = TimeRange::resolve(first, last, snap);

    SvdFactors answer;
    if (range.start_block == range.end_block) {
        const std::size_t base = range.start_block * snap.block_size;
        answer = trim_block(snap.block_factors(range.start_block), first - base, last - base, xi);
    } else {
        SvdFactors head = trim_block(snap.block_factors(range.start_block), range.skip_front,
                                     snap.block_size - 1, xi);
        SvdFactors tail =
            trim_block(snap.block_factors(range.end_block), 0, range.keep_back - 1, xi);

        std::vector<const SvdFactors*> parts;
        parts.reserve(range.end_block - range.start_block + 1);
        parts.push_back(&head);
        for (std::size_t i = range.start_block + 1; i < range.end_block; ++i) {
            parts.push_back(&snap.block_factors(i));
        }
        parts.push_back(&tail);
        answer = detail::stitch_parts(parts, xi);
    }

    return RangeSvd{canonical_sign(std::move(answer))};
}

inline RangeSvd range_query(const BlockStore& store, std::size_t first, std::size_t last,
                            double xi) {
    return range_query(store.snapshot(), first, last, xi);
}

/// Defaults the query threshold to the store's storage threshold.
inline RangeSvd range_query(const BlockStore& store, std::size_t first, std::size_t last) {
    return range_query(store.snapshot(), first, last, store.energy_threshold());
}

} // namespace rangesvd
