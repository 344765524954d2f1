#pragma once
//
// Thin SVD and low-rank utilities that the block store and the range
// query machinery are built on. All routines are pure functions on
// immutable inputs and safe to call concurrently.
//

#include <Eigen/Core>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include <rangesvd/errors.hpp>
#include <rangesvd/matrix.hpp>

namespace rangesvd {

/// Singular values below cutoff * sigma_max are treated as numerically zero.
inline constexpr double kNumericalRankCutoff = 1e-12;

/// Column-orthonormality tolerance required of factor matrices.
inline constexpr double kOrthonormalityTol = 1e-10;

/// Rank-k factor triple U * diag(sigma) * V^T with column-orthonormal U, V
/// and non-increasing, non-negative sigma. k == 0 represents the zero matrix
/// of shape u.rows() x v.rows().
struct SvdFactors {
    DenseMatrix         u;     // m x k
    std::vector<double> sigma; // k values, non-increasing
    DenseMatrix         v;     // n x k

    std::size_t rank() const { return sigma.size(); }
    std::size_t left_rows() const { return u.rows(); }
    std::size_t right_rows() const { return v.rows(); }

    bool operator==(const SvdFactors&) const = default;
};

/// Rank-0 factors for an m x n zero matrix.
inline SvdFactors make_empty_factors(std::size_t rows, std::size_t cols) {
    return SvdFactors{DenseMatrix(rows, 0), {}, DenseMatrix(cols, 0)};
}

/// max |M^T M - I|; 0 for a matrix with no columns.
inline double orthonormality_defect(const DenseMatrix& m) {
    if (m.rows() < m.cols()) {
        throw InvalidInputError("orthonormality_defect: matrix must be tall (rows >= cols)");
    }
    if (m.cols() == 0) {
        return 0.0;
    }
    Eigen::MatrixXd gram = m.map().transpose() * m.map();
    gram.diagonal().array() -= 1.0;
    return gram.cwiseAbs().maxCoeff();
}

/// Throws InvalidInputError unless f satisfies the SvdFactors invariants
/// (orthonormal columns within defect_tol, sorted non-negative sigma,
/// rank bounded by both dimensions).
inline void validate_factors(const SvdFactors& f, double defect_tol = kOrthonormalityTol) {
    const std::size_t k = f.rank();
    if (f.u.cols() != k || f.v.cols() != k) {
        throw InvalidInputError("factors: rank mismatch between u, sigma and v");
    }
    if (k > std::min(f.u.rows(), f.v.rows())) {
        throw InvalidInputError("factors: rank exceeds matrix dimensions");
    }
    for (std::size_t i = 0; i < k; ++i) {
        if (!std::isfinite(f.sigma[i]) || f.sigma[i] < 0.0) {
            throw InvalidInputError("factors: singular values must be finite and non-negative");
        }
        if (i + 1 < k && f.sigma[i] < f.sigma[i + 1]) {
            throw InvalidInputError("factors: singular values must be non-increasing");
        }
    }
    if (!f.u.all_finite() || !f.v.all_finite()) {
        throw InvalidInputError("factors: non-finite entries");
    }
    if (orthonormality_defect(f.u) > defect_tol || orthonormality_defect(f.v) > defect_tol) {
        throw InvalidInputError("factors: singular vectors are not orthonormal");
    }
}

/// Thin SVD with numerical-rank truncation: singular values below
/// kNumericalRankCutoff * sigma_max are dropped, so an all-zero input
/// yields rank 0.
inline SvdFactors thin_svd(const DenseMatrix& a) {
    if (a.rows() < 1 || a.cols() < 1) {
        throw InvalidInputError("thin_svd: matrix must have at least one row and one column");
    }
    if (!a.all_finite()) {
        throw InvalidInputError("thin_svd: non-finite entries");
    }

    const Eigen::MatrixXd m = a.map();
    Eigen::MatrixXd       u_thin;
    Eigen::MatrixXd       v_thin;
    Eigen::VectorXd       sv;

    // Jacobi is the accuracy workhorse for the small decompositions the
    // streaming path produces; divide-and-conquer takes over for the large
    // matrices seen by oracles and baselines.
    if (std::min(m.rows(), m.cols()) <= 16) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        u_thin = svd.matrixU();
        v_thin = svd.matrixV();
        sv     = svd.singularValues();
    } else {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        u_thin = svd.matrixU();
        v_thin = svd.matrixV();
        sv     = svd.singularValues();
    }

    const double sigma_max = sv.size() > 0 ? sv(0) : 0.0;
    const double cutoff    = kNumericalRankCutoff * sigma_max;
    std::size_t  k         = 0;
    while (k < static_cast<std::size_t>(sv.size()) && sv(static_cast<Eigen::Index>(k)) > 0.0 &&
           sv(static_cast<Eigen::Index>(k)) >= cutoff) {
        ++k;
    }

    SvdFactors out;
    out.u = DenseMatrix::from_expr(u_thin.leftCols(static_cast<Eigen::Index>(k)));
    out.v = DenseMatrix::from_expr(v_thin.leftCols(static_cast<Eigen::Index>(k)));
    out.sigma.assign(sv.data(), sv.data() + k);
    return out;
}

/// Keeps the smallest leading rank k whose cumulative squared singular
/// values reach the energy fraction xi. Zero total energy yields rank 0.
inline SvdFactors truncate_rank(const SvdFactors& f, double xi) {
    if (!(xi > 0.0) || xi > 1.0) {
        throw InvalidParameterError("truncate_rank: threshold must lie in (0, 1]");
    }
    const std::size_t r     = f.rank();
    double            total = 0.0;
    for (double s : f.sigma) {
        total += s * s;
    }
    if (total == 0.0) {
        return make_empty_factors(f.left_rows(), f.right_rows());
    }
    std::size_t keep = r;
    double      cum  = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
        cum += f.sigma[i] * f.sigma[i];
        if (cum / total >= xi) {
            keep = i + 1;
            break;
        }
    }
    if (keep == r) {
        return f;
    }
    SvdFactors out;
    out.u = f.u.left_cols(keep);
    out.v = f.v.left_cols(keep);
    out.sigma.assign(f.sigma.begin(), f.sigma.begin() + static_cast<std::ptrdiff_t>(keep));
    return out;
}

/// U * diag(sigma) * V^T; rank 0 gives the zero matrix.
inline DenseMatrix reconstruct(const SvdFactors& f) {
    if (f.rank() == 0) {
        return DenseMatrix(f.left_rows(), f.right_rows());
    }
    const Eigen::Map<const Eigen::VectorXd> sigma(f.sigma.data(),
                                                  static_cast<Eigen::Index>(f.sigma.size()));
    return DenseMatrix::from_expr(f.u.map() * sigma.asDiagonal() * f.v.map().transpose());
}

/// Fixes the sign indeterminacy of singular vector pairs: whenever the
/// largest-magnitude entry of a V column is negative, that column of both
/// U and V is negated. Reconstruction is unchanged bit for bit.
inline SvdFactors canonical_sign(SvdFactors f) {
    const std::size_t k = f.rank();
    const std::size_t n = f.v.rows();
    const std::size_t m = f.u.rows();
    for (std::size_t j = 0; j < k; ++j) {
        std::size_t pivot = 0;
        double      best  = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double mag = std::fabs(f.v(i, j));
            if (mag > best) {
                best  = mag;
                pivot = i;
            }
        }
        if (f.v(pivot, j) < 0.0) {
            for (std::size_t i = 0; i < n; ++i) {
                f.v(i, j) = -f.v(i, j);
            }
            for (std::size_t i = 0; i < m; ++i) {
                f.u(i, j) = -f.u(i, j);
            }
        }
    }
    return f;
}

} // namespace rangesvd
