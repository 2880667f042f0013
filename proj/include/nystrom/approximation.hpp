#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "nystrom/errors.hpp"
#include "nystrom/matrix.hpp"
#include "nystrom/rng.hpp"
#include "nystrom/spectral.hpp"

namespace nystrom {

/** Column indices drawn for one approximation (duplicates preserved). */
struct ColumnSample {
    Index n = 0;                       // ambient dimension sampled from
    std::vector<std::size_t> indices;  // size l, each in [0, n)
    bool with_replacement = true;
};

/**
 * Draw l column indices uniformly at random, with replacement, from [0, n).
 * Duplicates are kept: the pseudo-inverse of W absorbs the rank deficiency
 * they induce, and dropping them would bias the sampled distribution.
 */
inline ColumnSample sample_columns(Index n, Index l, std::uint64_t seed) {
    detail::require_arg(n >= 1, "sample_columns: n must be >= 1");
    detail::require_arg(l >= 1, "sample_columns: l must be >= 1");
    Rng rng(seed);
    ColumnSample out;
    out.n = n;
    out.indices = rng.sample_with_replacement(static_cast<std::size_t>(n),
                                              static_cast<std::size_t>(l));
    return out;
}

/** The pieces of a column-sampled approximation: C (n x l) and W (l x l). */
struct NystromFactors {
    ColumnSample sample;
    Matrix c;      // sampled columns of G, duplicates included
    GramMatrix w;  // intersection block G(S, S)
    Index k;       // truncation rank, 1 <= k <= l
};

/**
 * Assemble C and W for a sample. k defaults to l (no extra truncation
 * beyond what the rank of W forces).
 */
inline NystromFactors build_factors(const GramMatrix& g, const ColumnSample& sample,
                                    Index k = -1) {
    const Index n = g.size();
    detail::require_arg(sample.n == n,
                        "build_factors: sample was drawn for a different n");
    const Index l = static_cast<Index>(sample.indices.size());
    detail::require_arg(l >= 1, "build_factors: empty sample");
    if (k < 0) k = l;
    detail::require_arg(k >= 1 && k <= l, "build_factors: k must be in [1, l]");

    Matrix c(n, l);
    for (Index j = 0; j < l; ++j) {
        const std::size_t idx = sample.indices[static_cast<std::size_t>(j)];
        detail::require_arg(idx < static_cast<std::size_t>(n),
                            "build_factors: column index out of range");
        c.col(j) = g.mat().col(static_cast<Index>(idx));
    }
    return NystromFactors{sample, std::move(c),
                          GramMatrix(principal_submatrix(g.mat(), sample.indices)),
                          k};
}

/**
 * Dense column-sampled approximation: C * pinv(W_k) * C' with W_k the best
 * rank-k approximation of W. Materializes the full n x n result; use
 * approximate_factored for large n.
 */
inline GramMatrix approximate(const NystromFactors& factors,
                              double rank_tol = Defaults::rank_tol) {
    const GramMatrix wk = best_rank_k(factors.w, factors.k, rank_tol);
    const Matrix winv = pseudo_inverse(wk, rank_tol);
    Matrix approx = factors.c * winv * factors.c.transpose();
    approx = 0.5 * (approx + approx.transpose()).eval();
    return GramMatrix(std::move(approx));
}

/** Factored approximation plus the numerical rank of W it was built from. */
struct FactoredApproximation {
    Matrix l_factor;  // n x t, with L L' the approximation
    Index w_rank = 0;
};

/**
 * Factored form of the same approximation: L (n x t) with
 * L L' = C * pinv(W_k) * C', where t = min(k, numerical rank of W).
 * Never materializes an n x n intermediate.
 */
inline FactoredApproximation factored_approximation(const NystromFactors& factors,
                                                    double rank_tol = Defaults::rank_tol) {
    const ThinSVD eig = thin_svd(factors.w, rank_tol);
    const Index t = std::min(factors.k, eig.rank);
    if (t == 0) {
        // W is numerically zero: the approximation is the zero matrix.
        return FactoredApproximation{Matrix::Zero(factors.c.rows(), 1), 0};
    }
    Matrix scaled = eig.u.leftCols(t);
    for (Index j = 0; j < t; ++j) {
        scaled.col(j) /= std::sqrt(eig.sigma(j));
    }
    return FactoredApproximation{factors.c * scaled, eig.rank};
}

/** Convenience wrapper returning only the factor. */
inline Matrix approximate_factored(const NystromFactors& factors,
                                   double rank_tol = Defaults::rank_tol) {
    return factored_approximation(factors, rank_tol).l_factor;
}

/** Absolute and relative (percent) Frobenius approximation error. */
struct ApproximationError {
    double frobenius = 0.0;
    double percent = 0.0;  // 100 * frobenius / ||G||_F
};

/** Error of a dense approximation against the original matrix. */
inline ApproximationError approximation_error(const GramMatrix& g,
                                              const GramMatrix& approx) {
    detail::require_arg(g.size() == approx.size(),
                        "approximation_error: dimension mismatch");
    const double ref = g.mat().norm();
    detail::require_arg(ref > 0.0, "approximation_error: zero reference matrix");
    ApproximationError out;
    out.frobenius = (g.mat() - approx.mat()).norm();
    out.percent = 100.0 * out.frobenius / ref;
    return out;
}

/**
 * Error of a factored approximation L L' against G, via
 * ||G - LL'||_F^2 = ||G||_F^2 - 2 tr(L' G L) + ||L'L||_F^2,
 * evaluated without forming any n x n intermediate. Agrees with the dense
 * route to rounding (the subtraction can cancel catastrophically only when
 * the error is itself at rounding scale, where both routes return ~0).
 */
inline ApproximationError approximation_error_factored(const GramMatrix& g,
                                                       const Matrix& l_factor) {
    detail::require_arg(l_factor.rows() == g.size(),
                        "approximation_error_factored: dimension mismatch");
    const double ref2 = g.mat().squaredNorm();
    detail::require_arg(ref2 > 0.0,
                        "approximation_error_factored: zero reference matrix");
    const Matrix gl = g.mat() * l_factor;                     // n x t
    const double cross = (l_factor.array() * gl.array()).sum();
    const Matrix ltl = l_factor.transpose() * l_factor;       // t x t
    const double err2 = std::max(ref2 - 2.0 * cross + ltl.squaredNorm(), 0.0);
    ApproximationError out;
    out.frobenius = std::sqrt(err2);
    out.percent = 100.0 * out.frobenius / std::sqrt(ref2);
    return out;
}

}  // namespace nystrom
