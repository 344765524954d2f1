#pragma once
//
// Verification metrics, ground-truth comparators and the sliding-window
// similar-pattern search.
//

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <rangesvd/query.hpp>

namespace rangesvd {

/// Relative squared Frobenius distance ||X - U S V^T||_F^2 / ||X||_F^2.
/// All-zero raw data against non-zero factors returns +infinity, the
/// degenerate-denominator sentinel.
inline double reconstruction_error(const DenseMatrix& raw, const SvdFactors& f) {
    if (raw.rows() != f.left_rows() || raw.cols() != f.right_rows()) {
        throw InvalidInputError("reconstruction_error: shape mismatch");
    }
    const DenseMatrix rec = reconstruct(f);
    double            num = 0.0;
    double            den = 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const double x = raw.values()[i];
        const double d = x - rec.values()[i];
        num += d * d;
        den += x * x;
    }
    if (den == 0.0) {
        return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return num / den;
}

/// Ground truth for query tests: thin SVD of the raw row slice.
inline SvdFactors oracle_range_svd(const DenseMatrix& raw, std::size_t first, std::size_t last) {
    if (last < first || last >= raw.rows()) {
        throw RangeError("oracle_range_svd: range out of bounds");
    }
    return thin_svd(raw.middle_rows(first, last - first + 1));
}

/// The baseline a stitched query competes with: rebuild the raw rows of
/// the range from stored factors, then decompose them from scratch.
inline SvdFactors naive_range_svd(const StoreSnapshot& snap, std::size_t first, std::size_t last) {
    const TimeRange range = TimeRange::resolve(first, last, snap);

    DenseMatrix data(range.length(), snap.num_columns);
    std::size_t out_row = 0;
    for (std::size_t b = range.start_block; b <= range.end_block; ++b) {
        const DenseMatrix block = reconstruct(snap.block_factors(b));
        const std::size_t lo    = b == range.start_block ? range.skip_front : 0;
        const std::size_t hi    = b == range.end_block ? range.keep_back - 1
                                                       : snap.block_rows(b) - 1;
        for (std::size_t i = lo; i <= hi; ++i, ++out_row) {
            for (std::size_t j = 0; j < snap.num_columns; ++j) {
                data(out_row, j) = block(i, j);
            }
        }
    }
    return thin_svd(data);
}

/// One candidate window and its pattern similarity to the base range.
struct SearchHit {
    std::size_t window_start = 0;
    double      similarity   = 0.0; // |cosine| of leading left singular vectors, in [0, 1]
};

namespace detail {

/// |cos angle| between leading left singular vectors; 0 when either side
/// has no pattern (rank 0).
inline double leading_vector_similarity(const SvdFactors& a, const SvdFactors& b) {
    if (a.rank() == 0 || b.rank() == 0) {
        return 0.0;
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.left_rows(); ++i) {
        const double x = a.u(i, 0);
        const double y = b.u(i, 0);
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    return std::fabs(dot) / (std::sqrt(na) * std::sqrt(nb));
}

} // namespace detail

/// Scores every fully-past window [w, w + L - 1], w = 0, stride, 2*stride,
/// ... against the base range of length L and returns the top_n highest
/// scores, ties broken towards the earlier window. The sign of a singular
/// vector is arbitrary, so the absolute cosine is used. A rank-0 base has
/// no pattern to match and yields no hits.
inline std::vector<SearchHit> similar_range_search(const StoreSnapshot& snap,
                                                   std::size_t base_first, std::size_t base_last,
                                                   std::size_t stride, std::size_t top_n,
                                                   double xi) {
    if (base_last < base_first || base_last - base_first + 1 < 2) {
        throw InvalidParameterError("similar_range_search: base must span at least 2 rows");
    }
    if (stride < 1) {
        throw InvalidParameterError("similar_range_search: stride must be at least 1");
    }
    const std::size_t length = base_last - base_first + 1;
    const SvdFactors  base   = range_query(snap, base_first, base_last, xi).factors;
    if (base.rank() == 0) {
        return {};
    }

    std::vector<SearchHit> hits;
    for (std::size_t w = 0; w + length <= base_first; w += stride) {
        const SvdFactors window = range_query(snap, w, w + length - 1, xi).factors;
        hits.push_back(SearchHit{w, detail::leading_vector_similarity(base, window)});
    }

    std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.similarity != b.similarity) {
            return a.similarity > b.similarity;
        }
        return a.window_start < b.window_start;
    });
    if (hits.size() > top_n) {
        hits.resize(top_n);
    }
    return hits;
}

inline std::vector<SearchHit> similar_range_search(const BlockStore& store, std::size_t base_first,
                                                   std::size_t base_last, std::size_t stride,
                                                   std::size_t top_n, double xi) {
    return similar_range_search(store.snapshot(), base_first, base_last, stride, top_n, xi);
}

inline std::vector<SearchHit> similar_range_search(const BlockStore& store, std::size_t base_first,
                                                   std::size_t base_last, std::size_t stride,
                                                   std::size_t top_n) {
    return similar_range_search(store.snapshot(), base_first, base_last, stride, top_n,
                                store.energy_threshold());
}

} // namespace rangesvd
