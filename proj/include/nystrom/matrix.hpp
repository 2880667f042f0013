#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "nystrom/errors.hpp"

namespace nystrom {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/** Default tolerances shared across the library. */
struct Defaults {
    static constexpr double rank_tol = 1e-10;  // relative singular-value cutoff
    static constexpr double sym_tol = 1e-8;    // relative asymmetry bound
    static constexpr double psd_tol = 1e-8;    // relative negative-eigenvalue slack
    static constexpr double ortho_tol = 1e-8;  // max-abs bound on V'V - I
};

namespace detail {

inline bool is_finite(const Matrix& m) {
    return m.allFinite();
}

inline void require_finite(const Matrix& m, const std::string& what) {
    require_input(m.allFinite(), what + ": matrix contains NaN or Inf");
}

}  // namespace detail

/**
 * Symmetric positive semi-definite matrix wrapper.
 *
 * Construction enforces finiteness and symmetry (relative asymmetry at most
 * symTol times the largest entry magnitude) and stores the exactly
 * symmetrized matrix (G + G') / 2. Positive semi-definiteness is a separate,
 * O(n^3) check (`validate_spsd`), run at data ingestion boundaries rather
 * than on every construction.
 */
class GramMatrix {
public:
    explicit GramMatrix(Matrix g, double sym_tol = Defaults::sym_tol) {
        detail::require_input(g.rows() == g.cols(),
                              "GramMatrix: matrix must be square, got " +
                                  std::to_string(g.rows()) + "x" +
                                  std::to_string(g.cols()));
        detail::require_input(g.rows() > 0, "GramMatrix: matrix must be non-empty");
        detail::require_finite(g, "GramMatrix");
        const double max_abs = g.cwiseAbs().maxCoeff();
        const double asym = (g - g.transpose()).cwiseAbs().maxCoeff();
        detail::require_input(asym <= sym_tol * std::max(max_abs, 1e-300),
                              "GramMatrix: asymmetry " + std::to_string(asym) +
                                  " exceeds tolerance");
        mat_ = 0.5 * (g + g.transpose());
    }

    Index size() const { return mat_.rows(); }
    const Matrix& mat() const { return mat_; }

    double operator()(Index i, Index j) const { return mat_(i, j); }

private:
    Matrix mat_;
};

/** Norm selector for matrix_norm. */
enum class NormKind { frobenius, spectral };

/** Frobenius or spectral (largest singular value) norm of a dense matrix. */
inline double matrix_norm(const Matrix& m, NormKind kind) {
    detail::require_finite(m, "matrix_norm");
    switch (kind) {
        case NormKind::frobenius:
            return m.norm();
        case NormKind::spectral: {
            if (m.rows() == 0 || m.cols() == 0) return 0.0;
            Eigen::BDCSVD<Matrix> svd(m);
            return svd.singularValues()(0);
        }
    }
    throw InvalidArgumentError("matrix_norm: unknown norm kind");
}

/**
 * Check positive semi-definiteness: smallest eigenvalue of the (symmetrized)
 * matrix must be >= -psdTol * max(|lambda|). Throws InvalidInputError on
 * violation; returns the smallest eigenvalue otherwise.
 */
inline double validate_spsd(const GramMatrix& g, double psd_tol = Defaults::psd_tol) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(g.mat(), Eigen::EigenvaluesOnly);
    detail::require(es.info() == Eigen::Success, ErrorKind::numerical,
                    "validate_spsd: eigenvalue computation failed");
    const auto& ev = es.eigenvalues();
    const double lo = ev(0);
    const double scale = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
    detail::require_input(lo >= -psd_tol * std::max(scale, 1e-300),
                          "validate_spsd: matrix has negative eigenvalue " +
                              std::to_string(lo));
    return lo;
}

/** Principal submatrix G(rows, rows); rows must be in-range and non-empty. */
inline Matrix principal_submatrix(const Matrix& g, const std::vector<std::size_t>& rows) {
    detail::require_arg(!rows.empty(), "principal_submatrix: empty index set");
    const Index n = g.rows();
    for (std::size_t idx : rows) {
        detail::require_arg(idx < static_cast<std::size_t>(n),
                            "principal_submatrix: index out of range");
    }
    Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(rows.size()));
    for (std::size_t a = 0; a < rows.size(); ++a) {
        for (std::size_t b = 0; b < rows.size(); ++b) {
            out(static_cast<Index>(a), static_cast<Index>(b)) =
                g(static_cast<Index>(rows[a]), static_cast<Index>(rows[b]));
        }
    }
    return out;
}

}  // namespace nystrom
