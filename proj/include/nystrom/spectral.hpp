#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <string>

#include "nystrom/errors.hpp"
#include "nystrom/matrix.hpp"

namespace nystrom {

/**
 * Thin singular value decomposition m = u * diag(sigma) * v'.
 *
 * u is rows(m) x p, v is cols(m) x p with p = min(rows, cols); sigma holds
 * all p singular values in non-increasing order. `rank` counts the values
 * above rankTol * sigma(0) (0 for a zero matrix).
 */
struct ThinSVD {
    Matrix u;
    Vector sigma;
    Matrix v;
    Index rank = 0;
};

namespace detail {

inline Index count_above(const Vector& sigma, double rank_tol) {
    if (sigma.size() == 0) return 0;
    const double cutoff = rank_tol * sigma(0);
    Index r = 0;
    while (r < sigma.size() && sigma(r) > cutoff && sigma(r) > 0.0) ++r;
    return r;
}

}  // namespace detail

/** Thin SVD of a general dense matrix (divide-and-conquer bidiagonal). */
inline ThinSVD thin_svd(const Matrix& m, double rank_tol = Defaults::rank_tol) {
    detail::require_finite(m, "thin_svd");
    detail::require_arg(m.rows() > 0 && m.cols() > 0, "thin_svd: empty matrix");
    detail::require_arg(rank_tol >= 0.0, "thin_svd: rankTol must be non-negative");
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    detail::require(svd.info() == Eigen::Success, ErrorKind::numerical,
                    "thin_svd: decomposition failed to converge");
    ThinSVD out;
    out.u = svd.matrixU();
    out.sigma = svd.singularValues();
    out.v = svd.matrixV();
    out.rank = detail::count_above(out.sigma, rank_tol);
    return out;
}

/**
 * Thin SVD of a symmetric positive semi-definite matrix via its
 * eigendecomposition (for SPSD input the two factorizations coincide, with
 * u = v up to signs of null-space columns). Eigenvalues are clamped at zero
 * and reported in non-increasing order. Roughly an order of magnitude
 * faster than the general path and exactly symmetric in its treatment of
 * the two factors, which the experiment loops rely on.
 */
inline ThinSVD thin_svd(const GramMatrix& g, double rank_tol = Defaults::rank_tol) {
    detail::require_arg(rank_tol >= 0.0, "thin_svd: rankTol must be non-negative");
    Eigen::SelfAdjointEigenSolver<Matrix> es(g.mat());
    detail::require(es.info() == Eigen::Success, ErrorKind::numerical,
                    "thin_svd: eigendecomposition failed to converge");
    const Index n = g.size();
    ThinSVD out;
    out.u.resize(n, n);
    out.sigma.resize(n);
    // SelfAdjointEigenSolver returns ascending order; reverse and clamp.
    for (Index i = 0; i < n; ++i) {
        const Index src = n - 1 - i;
        out.sigma(i) = std::max(es.eigenvalues()(src), 0.0);
        out.u.col(i) = es.eigenvectors().col(src);
    }
    out.v = out.u;
    out.rank = detail::count_above(out.sigma, rank_tol);
    return out;
}

/**
 * Moore-Penrose pseudo-inverse: v_r * diag(1/sigma_1..1/sigma_r) * u_r',
 * truncating at rankTol * sigma_max.
 */
inline Matrix pseudo_inverse(const Matrix& m, double rank_tol = Defaults::rank_tol) {
    const ThinSVD svd = thin_svd(m, rank_tol);
    Matrix out = Matrix::Zero(m.cols(), m.rows());
    for (Index t = 0; t < svd.rank; ++t) {
        out.noalias() += (1.0 / svd.sigma(t)) * svd.v.col(t) * svd.u.col(t).transpose();
    }
    return out;
}

/** Pseudo-inverse of an SPSD matrix via the symmetric fast path. */
inline Matrix pseudo_inverse(const GramMatrix& g, double rank_tol = Defaults::rank_tol) {
    const ThinSVD svd = thin_svd(g, rank_tol);
    Matrix out = Matrix::Zero(g.size(), g.size());
    for (Index t = 0; t < svd.rank; ++t) {
        out.noalias() += (1.0 / svd.sigma(t)) * svd.u.col(t) * svd.u.col(t).transpose();
    }
    return out;
}

/**
 * Best rank-k approximation (truncated SVD). k larger than min(rows, cols)
 * is an error; k larger than the numerical rank returns the rank-truncated
 * reconstruction (trailing numerically-zero directions are dropped).
 */
inline Matrix best_rank_k(const Matrix& m, Index k, double rank_tol = Defaults::rank_tol) {
    detail::require_arg(k >= 0, "best_rank_k: k must be non-negative");
    detail::require_arg(k <= std::min(m.rows(), m.cols()),
                        "best_rank_k: k exceeds min(rows, cols)");
    const ThinSVD svd = thin_svd(m, rank_tol);
    const Index t = std::min(k, svd.rank);
    Matrix out = Matrix::Zero(m.rows(), m.cols());
    if (t > 0) {
        out.noalias() = svd.u.leftCols(t) * svd.sigma.head(t).asDiagonal() *
                        svd.v.leftCols(t).transpose();
    }
    return out;
}

/** Best rank-k approximation of an SPSD matrix; the result stays SPSD. */
inline GramMatrix best_rank_k(const GramMatrix& g, Index k,
                              double rank_tol = Defaults::rank_tol) {
    detail::require_arg(k >= 0, "best_rank_k: k must be non-negative");
    detail::require_arg(k <= g.size(), "best_rank_k: k exceeds matrix size");
    const ThinSVD svd = thin_svd(g, rank_tol);
    const Index t = std::min(k, svd.rank);
    Matrix out = Matrix::Zero(g.size(), g.size());
    if (t > 0) {
        const Matrix a =
            svd.u.leftCols(t) * svd.sigma.head(t).cwiseSqrt().asDiagonal();
        out.selfadjointView<Eigen::Lower>().rankUpdate(a);
        out.triangularView<Eigen::StrictlyUpper>() = out.transpose();
    }
    return GramMatrix(std::move(out));
}

/** Number of singular values above rankTol * sigma_max. */
inline Index numerical_rank(const Matrix& m, double rank_tol = Defaults::rank_tol) {
    detail::require_finite(m, "numerical_rank");
    if (m.rows() == 0 || m.cols() == 0) return 0;
    Eigen::BDCSVD<Matrix> svd(m);
    detail::require(svd.info() == Eigen::Success, ErrorKind::numerical,
                    "numerical_rank: decomposition failed");
    return detail::count_above(svd.singularValues(), rank_tol);
}

/** Numerical rank of an SPSD matrix via eigenvalues (clamped at zero). */
inline Index numerical_rank(const GramMatrix& g, double rank_tol = Defaults::rank_tol) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(g.mat(), Eigen::EigenvaluesOnly);
    detail::require(es.info() == Eigen::Success, ErrorKind::numerical,
                    "numerical_rank: eigendecomposition failed");
    const Index n = g.size();
    Vector sigma(n);
    for (Index i = 0; i < n; ++i) sigma(i) = std::max(es.eigenvalues()(n - 1 - i), 0.0);
    return detail::count_above(sigma, rank_tol);
}

}  // namespace nystrom
