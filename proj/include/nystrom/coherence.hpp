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

/**
 * Column-orthonormal matrix wrapper (n x r, r <= n). Construction verifies
 * max-abs(V'V - I) <= orthoTol.
 */
class OrthonormalBasis {
public:
    explicit OrthonormalBasis(Matrix v, double ortho_tol = Defaults::ortho_tol) {
        detail::require_input(v.rows() > 0 && v.cols() > 0,
                              "OrthonormalBasis: empty matrix");
        detail::require_input(v.cols() <= v.rows(),
                              "OrthonormalBasis: more columns than rows");
        detail::require_finite(v, "OrthonormalBasis");
        const Matrix gram = v.transpose() * v;
        const double defect =
            (gram - Matrix::Identity(v.cols(), v.cols())).cwiseAbs().maxCoeff();
        detail::require_input(defect <= ortho_tol,
                              "OrthonormalBasis: columns not orthonormal (defect " +
                                  std::to_string(defect) + ")");
        mat_ = std::move(v);
    }

    Index rows() const { return mat_.rows(); }
    Index cols() const { return mat_.cols(); }
    const Matrix& mat() const { return mat_; }

private:
    Matrix mat_;
};

/** Result of a coherence measurement. */
struct CoherenceReport {
    Index n = 0;           // ambient dimension
    Index r = 0;           // basis size
    double mu = 0.0;       // sqrt(n) * max |V(i,j)|, in [1, sqrt(n)]
    Index argmax_row = 0;  // first maximizing entry, row-major order
    Index argmax_col = 0;
    bool degenerate = false;  // top-r eigenspace not well separated from zero
};

/**
 * Coherence of an orthonormal basis: sqrt(n) times the largest entry
 * magnitude. Ties resolve to the smallest (row, col) in lexicographic order.
 */
inline CoherenceReport coherence(const OrthonormalBasis& basis) {
    const Matrix& v = basis.mat();
    CoherenceReport rep;
    rep.n = v.rows();
    rep.r = v.cols();
    double best = -1.0;
    for (Index i = 0; i < v.rows(); ++i) {
        for (Index j = 0; j < v.cols(); ++j) {
            const double a = std::abs(v(i, j));
            if (a > best) {
                best = a;
                rep.argmax_row = i;
                rep.argmax_col = j;
            }
        }
    }
    rep.mu = std::sqrt(static_cast<double>(v.rows())) * best;
    return rep;
}

/**
 * Coherence of the top-r eigenvector basis of an SPSD matrix.
 *
 * The degenerate flag is set when r exceeds the numerical rank, i.e. the
 * requested basis extends into the (numerically) zero eigenspace; the
 * returned value is then an artifact of the eigensolver's choice of basis
 * rather than a property of the matrix. The same caveat applies whenever
 * the spectrum is flat across the r-th position, which the flag cannot
 * detect in general.
 */
inline CoherenceReport top_r_coherence(const GramMatrix& g, Index r,
                                       double rank_tol = Defaults::rank_tol) {
    detail::require_arg(r >= 1, "top_r_coherence: r must be >= 1");
    detail::require_arg(r <= g.size(), "top_r_coherence: r exceeds matrix size");
    const ThinSVD eig = thin_svd(g, rank_tol);
    OrthonormalBasis basis(eig.u.leftCols(r));
    CoherenceReport rep = coherence(basis);
    rep.degenerate = (r > eig.rank);
    return rep;
}

/**
 * Spectral-norm distance of the rescaled sampled rows from orthonormality:
 * || (n/l) * V_S' V_S - I ||_2 for the row subset S (|S| = l, duplicates
 * allowed). Zero when S is every row exactly once.
 */
inline double subset_orthogonality_defect(const OrthonormalBasis& basis,
                                          const std::vector<std::size_t>& rows) {
    detail::require_arg(!rows.empty(), "subset_orthogonality_defect: empty subset");
    const Matrix& v = basis.mat();
    const Index n = v.rows();
    const Index r = v.cols();
    for (std::size_t idx : rows) {
        detail::require_arg(idx < static_cast<std::size_t>(n),
                            "subset_orthogonality_defect: row index out of range");
    }
    Matrix gram = Matrix::Zero(r, r);
    for (std::size_t idx : rows) {
        gram.selfadjointView<Eigen::Lower>().rankUpdate(
            v.row(static_cast<Index>(idx)).transpose());
    }
    gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
    const double scale = static_cast<double>(n) / static_cast<double>(rows.size());
    Matrix d = scale * gram - Matrix::Identity(r, r);
    Eigen::SelfAdjointEigenSolver<Matrix> es(d, Eigen::EigenvaluesOnly);
    detail::require(es.info() == Eigen::Success, ErrorKind::numerical,
                    "subset_orthogonality_defect: eigendecomposition failed");
    return std::max(std::abs(es.eigenvalues()(0)),
                    std::abs(es.eigenvalues()(r - 1)));
}

/** Mean measured coherence of random principal submatrices, per size. */
struct GrowthProfile {
    Index n = 0;
    Index r = 0;
    Index trials = 0;
    std::vector<Index> sizes;      // ascending
    std::vector<double> mean_mu;   // aligned with sizes
};

/**
 * Measure how top-r coherence of uniformly sampled principal submatrices
 * grows with submatrix size. Indices are drawn without replacement; the
 * full-size case is the matrix's own coherence and is computed once.
 * Per-cell stream: derive_seed(seed, {size, trial}).
 */
inline GrowthProfile growth_profile(const GramMatrix& g, std::vector<Index> sizes,
                                    Index r, Index trials, std::uint64_t seed,
                                    double rank_tol = Defaults::rank_tol) {
    detail::require_arg(!sizes.empty(), "growth_profile: no sizes");
    detail::require_arg(trials >= 1, "growth_profile: trials must be >= 1");
    std::sort(sizes.begin(), sizes.end());
    detail::require_arg(sizes.front() >= r,
                        "growth_profile: smallest size is below r");
    detail::require_arg(sizes.back() <= g.size(),
                        "growth_profile: size exceeds matrix dimension");

    GrowthProfile out;
    out.n = g.size();
    out.r = r;
    out.trials = trials;
    out.sizes = sizes;
    out.mean_mu.reserve(sizes.size());

    for (Index m : sizes) {
        if (m == g.size()) {
            // Sampling without replacement at full size is the identity.
            out.mean_mu.push_back(top_r_coherence(g, r, rank_tol).mu);
            continue;
        }
        double acc = 0.0;
        for (Index t = 0; t < trials; ++t) {
            Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(m),
                                       static_cast<std::uint64_t>(t)}));
            const auto rows = rng.sample_without_replacement(
                static_cast<std::size_t>(g.size()), static_cast<std::size_t>(m));
            GramMatrix sub(principal_submatrix(g.mat(), rows));
            acc += top_r_coherence(sub, r, rank_tol).mu;
        }
        out.mean_mu.push_back(acc / static_cast<double>(trials));
    }
    return out;
}

}  // namespace nystrom
