#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <rangesvd/analysis.hpp>
#include <rangesvd/query.hpp>

#include "test_util.hpp"

using namespace rangesvd;
using testutil::latent_factor_stream;
using testutil::random_matrix;
using testutil::rank_limited_matrix;
using testutil::rel_fro_error;
using testutil::store_from_matrix;

namespace {

DenseMatrix vstack(const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix out(a.rows() + b.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            out(i, j) = a(i, j);
        }
    }
    for (std::size_t i = 0; i < b.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            out(a.rows() + i, j) = b(i, j);
        }
    }
    return out;
}

double row_norm(const DenseMatrix& m, std::size_t i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
        sum += m(i, j) * m(i, j);
    }
    return std::sqrt(sum);
}

} // namespace

TEST(TrimBlock, NoEliminationPreservesReconstruction) {
    std::mt19937 rng(83);
    const auto   block   = thin_svd(random_matrix(8, 4, rng));
    const auto   trimmed = trim_block(block, 0, 7, 1.0);
    EXPECT_LE(rel_fro_error(reconstruct(block), reconstruct(trimmed)), 1e-10);
    EXPECT_EQ(trimmed.left_rows(), 8u);
}

TEST(TrimBlock, SingleRowKeepsRowNorm) {
    std::mt19937 rng(89);
    const auto   block = thin_svd(random_matrix(8, 4, rng));
    const auto   rec   = reconstruct(block);
    for (std::size_t j : {0u, 3u, 7u}) {
        const auto trimmed = trim_block(block, j, j, 1.0);
        ASSERT_EQ(trimmed.rank(), 1u);
        EXPECT_NEAR(trimmed.sigma[0], row_norm(rec, j), 1e-10);
    }
}

TEST(TrimBlock, SecondHalfOfRankTwoBlockMatchesSlicedReconstruction) {
    std::mt19937 rng(97);
    const auto   raw   = rank_limited_matrix(12, 5, 2, rng);
    const auto   block = thin_svd(raw);
    ASSERT_EQ(block.rank(), 2u);

    const auto trimmed = trim_block(block, 6, 11, 1.0);
    const auto oracle  = reconstruct(block).middle_rows(6, 6);
    EXPECT_LE(rel_fro_error(oracle, reconstruct(trimmed)), 1e-9);
}

TEST(TrimBlock, EmptyOrOutOfBoundsKeepRangeIsRejected) {
    std::mt19937 rng(101);
    const auto   block = thin_svd(random_matrix(6, 3, rng));
    EXPECT_THROW(trim_block(block, 3, 2, 1.0), InvalidParameterError);
    EXPECT_THROW(trim_block(block, 0, 6, 1.0), InvalidParameterError);
    EXPECT_THROW(trim_block(block, 0, 5, 0.0), InvalidParameterError);
}

TEST(TrimBlock, RankZeroBlockStaysEmpty) {
    const auto trimmed = trim_block(make_empty_factors(6, 3), 1, 4, 1.0);
    EXPECT_EQ(trimmed.rank(), 0u);
    EXPECT_EQ(trimmed.left_rows(), 4u);
    EXPECT_EQ(trimmed.right_rows(), 3u);
}

TEST(Stitch, SinglePartIsARedecomposition) {
    std::mt19937 rng(103);
    const auto   part     = thin_svd(random_matrix(7, 4, rng));
    const auto   stitched = stitch({part}, 1.0);
    EXPECT_LE(rel_fro_error(reconstruct(part), reconstruct(stitched)), 1e-10);
}

TEST(Stitch, TwoExactPartsMatchConcatenatedRawData) {
    std::mt19937 rng(107);
    const auto   b1 = random_matrix(6, 4, rng);
    const auto   b2 = random_matrix(5, 4, rng);

    const auto stitched = stitch({thin_svd(b1), thin_svd(b2)}, 1.0);
    const auto raw      = vstack(b1, b2);
    EXPECT_LE(rel_fro_error(raw, reconstruct(stitched)), 1e-8);
    EXPECT_LE(orthonormality_defect(stitched.u), 1e-10);
    EXPECT_LE(orthonormality_defect(stitched.v), 1e-10);

    // Same singular values as decomposing the raw concatenation directly.
    const auto oracle = thin_svd(raw);
    ASSERT_EQ(stitched.rank(), oracle.rank());
    for (std::size_t i = 0; i < oracle.rank(); ++i) {
        EXPECT_NEAR(stitched.sigma[i], oracle.sigma[i], 1e-8 * oracle.sigma[0]);
    }
}

TEST(Stitch, ZeroBlockContributesZeroRows) {
    std::mt19937 rng(109);
    const auto   b1       = random_matrix(5, 3, rng);
    const auto   stitched = stitch({thin_svd(b1), make_empty_factors(4, 3)}, 1.0);
    const auto   rec      = reconstruct(stitched);
    ASSERT_EQ(rec.rows(), 9u);
    EXPECT_LE(rel_fro_error(b1, rec.middle_rows(0, 5)), 1e-9);
    for (std::size_t i = 5; i < 9; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            EXPECT_NEAR(rec(i, j), 0.0, 1e-12);
        }
    }
}

TEST(Stitch, AllZeroPartsGiveRankZero) {
    const auto stitched = stitch({make_empty_factors(3, 2), make_empty_factors(4, 2)}, 1.0);
    EXPECT_EQ(stitched.rank(), 0u);
    EXPECT_EQ(stitched.left_rows(), 7u);
}

TEST(Stitch, RejectsMismatchedColumnCounts) {
    std::mt19937 rng(113);
    const auto   p1 = thin_svd(random_matrix(4, 3, rng));
    const auto   p2 = thin_svd(random_matrix(4, 2, rng));
    EXPECT_THROW(stitch({p1, p2}, 1.0), InvalidInputError);
    EXPECT_THROW(stitch({}, 1.0), InvalidParameterError);
}

TEST(RangeQuery, FullRangeMatchesRawData) {
    std::mt19937 rng(127);
    const auto   raw   = random_matrix(20, 4, rng);
    const auto   store = store_from_matrix(raw, 5, 1.0);

    const auto answer = range_query(store, 0, 19, 1.0);
    EXPECT_EQ(answer.rows(), 20u);
    EXPECT_LE(rel_fro_error(raw, reconstruct(answer.factors)), 1e-6);
}

TEST(RangeQuery, BlockAlignedRangeEqualsDirectStitchOfSealedBlocks) {
    std::mt19937 rng(131);
    const auto   raw   = random_matrix(16, 3, rng);
    const auto   store = store_from_matrix(raw, 4, 1.0);

    const auto answer = range_query(store, 4, 11, 1.0);
    const auto direct = stitch({store.sealed()[1].factors, store.sealed()[2].factors}, 1.0);
    EXPECT_LE(rel_fro_error(reconstruct(direct), reconstruct(answer.factors)), 1e-9);
}

TEST(RangeQuery, SingleRowRangeKeepsRowNorm) {
    std::mt19937 rng(137);
    const auto   raw   = random_matrix(12, 4, rng);
    const auto   store = store_from_matrix(raw, 4, 1.0);

    for (std::size_t j : {0u, 3u, 5u, 11u}) {
        const auto answer = range_query(store, j, j, 1.0);
        ASSERT_EQ(answer.rows(), 1u);
        ASSERT_EQ(answer.rank(), 1u);
        EXPECT_NEAR(answer.factors.sigma.at(0), row_norm(raw, j), 1e-8);
    }
}

TEST(RangeQuery, RejectsBadRangesAndThresholds) {
    std::mt19937 rng(139);
    const auto   raw   = random_matrix(8, 3, rng);
    const auto   store = store_from_matrix(raw, 4, 1.0);

    EXPECT_THROW(range_query(store, 3, 2, 1.0), RangeError);
    EXPECT_THROW(range_query(store, 0, 8, 1.0), RangeError);
    EXPECT_THROW(range_query(store, 0, 3, 0.0), InvalidParameterError);

    BlockStore empty(4, 3, 1.0);
    EXPECT_THROW(range_query(empty, 0, 0, 1.0), RangeError);
}

// Every range over a small multi-block store, including ranges that end in
// the open tail, must match the direct SVD of the raw slice in the exact
// regime.
TEST(RangeQuery, ExhaustiveOracleEquivalenceWithOpenTail) {
    std::mt19937 rng(149);
    const auto   raw   = random_matrix(14, 3, rng);
    const auto   store = store_from_matrix(raw, 4, 1.0);
    ASSERT_TRUE(store.open().has_value());

    for (std::size_t s = 0; s < raw.rows(); ++s) {
        for (std::size_t e = s; e < raw.rows(); ++e) {
            const auto answer = range_query(store, s, e, 1.0);
            const auto slice  = raw.middle_rows(s, e - s + 1);
            ASSERT_EQ(answer.rows(), e - s + 1);
            EXPECT_LE(rel_fro_error(slice, reconstruct(answer.factors)), 1e-6)
                << "range [" << s << ", " << e << "]";

            const auto oracle = oracle_range_svd(raw, s, e);
            ASSERT_EQ(answer.rank(), oracle.rank()) << "range [" << s << ", " << e << "]";
            for (std::size_t i = 0; i < oracle.rank(); ++i) {
                EXPECT_NEAR(answer.factors.sigma[i], oracle.sigma[i], 1e-6 * oracle.sigma[0]);
            }
        }
    }
}

TEST(RangeQuery, LossyBudgetHoldsOnSampledRanges) {
    std::mt19937 rng(151);
    const auto   raw   = latent_factor_stream(200, 6, 2, rng, 0.05);
    const double xis[] = {0.95, 0.99};
    for (double xi : xis) {
        const auto store = store_from_matrix(raw, 20, xi);
        std::uniform_int_distribution<std::size_t> pick(0, raw.rows() - 1);
        for (int trial = 0; trial < 40; ++trial) {
            std::size_t a = pick(rng);
            std::size_t b = pick(rng);
            if (a > b) {
                std::swap(a, b);
            }
            const auto answer = range_query(store, a, b, xi);
            const auto slice  = raw.middle_rows(a, b - a + 1);
            EXPECT_LE(reconstruction_error(slice, answer.factors),
                      (1.0 - xi) + (1.0 - xi) + 1e-6);
        }
    }
}

TEST(RangeQuery, OutputFactorsAreOrthonormalAndSigned) {
    std::mt19937 rng(157);
    const auto   raw   = latent_factor_stream(60, 5, 3, rng, 0.1);
    const auto   store = store_from_matrix(raw, 8, 0.98);

    std::uniform_int_distribution<std::size_t> pick(0, raw.rows() - 1);
    for (int trial = 0; trial < 30; ++trial) {
        std::size_t a = pick(rng);
        std::size_t b = pick(rng);
        if (a > b) {
            std::swap(a, b);
        }
        const auto answer = range_query(store, a, b, 0.98);
        EXPECT_LE(orthonormality_defect(answer.factors.u), 1e-8);
        EXPECT_LE(orthonormality_defect(answer.factors.v), 1e-8);
        for (std::size_t i = 0; i + 1 < answer.rank(); ++i) {
            EXPECT_GE(answer.factors.sigma[i], answer.factors.sigma[i + 1]);
        }
        // Canonical sign: the dominant entry of every V column is positive.
        for (std::size_t j = 0; j < answer.rank(); ++j) {
            double      best  = -1.0;
            std::size_t pivot = 0;
            for (std::size_t i = 0; i < answer.factors.v.rows(); ++i) {
                if (std::fabs(answer.factors.v(i, j)) > best) {
                    best  = std::fabs(answer.factors.v(i, j));
                    pivot = i;
                }
            }
            EXPECT_GE(answer.factors.v(pivot, j), 0.0);
        }
    }
}

TEST(TimeRangeResolve, DerivesBlockCoordinates) {
    std::mt19937 rng(163);
    const auto   raw   = random_matrix(14, 3, rng);
    const auto   store = store_from_matrix(raw, 4, 1.0);
    const auto   snap  = store.snapshot();

    const auto r = TimeRange::resolve(5, 13, snap);
    EXPECT_EQ(r.start_block, 1u);
    EXPECT_EQ(r.end_block, 3u);
    EXPECT_EQ(r.skip_front, 1u);
    EXPECT_EQ(r.keep_front, 3u);
    EXPECT_EQ(r.keep_back, 2u);
    // End block is the open tail with 2 rows present, so nothing is cut.
    EXPECT_EQ(r.skip_back, 0u);
    EXPECT_EQ(r.length(), 9u);
}
