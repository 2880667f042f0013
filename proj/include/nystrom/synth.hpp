#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "nystrom/coherence.hpp"
#include "nystrom/errors.hpp"
#include "nystrom/matrix.hpp"
#include "nystrom/rng.hpp"

namespace nystrom {

enum class SpectrumKind { exponential_decay, rank_r_flat, explicit_values };

/**
 * Eigenvalue profile of a synthetic matrix.
 *
 * exponential_decay: sigma_i = exp(-i * eta), i = 1..n.
 * rank_r_flat:       sigma_i = 1 for i <= r, 0 otherwise.
 * explicit_values:   caller-supplied, non-negative and non-increasing.
 */
struct SpectrumSpec {
    SpectrumKind kind = SpectrumKind::rank_r_flat;
    Index n = 0;
    Index r = 0;                 // rank_r_flat only
    double eta = 0.0;            // exponential_decay only
    std::vector<double> values;  // explicit_values only, length n
};

inline SpectrumSpec exponential_spectrum(Index n, double eta) {
    return SpectrumSpec{SpectrumKind::exponential_decay, n, 0, eta, {}};
}

inline SpectrumSpec flat_spectrum(Index n, Index r) {
    return SpectrumSpec{SpectrumKind::rank_r_flat, n, r, 0.0, {}};
}

inline SpectrumSpec explicit_spectrum(Index n, std::vector<double> values) {
    return SpectrumSpec{SpectrumKind::explicit_values, n, 0, 0.0, std::move(values)};
}

/** Materialize the full length-n eigenvalue vector of a SpectrumSpec. */
inline Vector spectrum(const SpectrumSpec& spec) {
    detail::require_arg(spec.n >= 1, "spectrum: n must be >= 1");
    Vector sigma(spec.n);
    switch (spec.kind) {
        case SpectrumKind::exponential_decay: {
            detail::require_arg(spec.eta > 0.0, "spectrum: eta must be positive");
            for (Index i = 0; i < spec.n; ++i) {
                sigma(i) = std::exp(-static_cast<double>(i + 1) * spec.eta);
            }
            break;
        }
        case SpectrumKind::rank_r_flat: {
            detail::require_arg(spec.r >= 1 && spec.r <= spec.n,
                                "spectrum: r must be in [1, n]");
            sigma.setZero();
            sigma.head(spec.r).setOnes();
            break;
        }
        case SpectrumKind::explicit_values: {
            detail::require_arg(
                static_cast<Index>(spec.values.size()) == spec.n,
                "spectrum: explicit values must have length n");
            detail::require_arg(!spec.values.empty() && spec.values.front() > 0.0,
                                "spectrum: leading eigenvalue must be positive");
            for (Index i = 0; i < spec.n; ++i) {
                const double v = spec.values[static_cast<std::size_t>(i)];
                detail::require_arg(v >= 0.0,
                                    "spectrum: eigenvalues must be non-negative");
                if (i > 0) {
                    detail::require_arg(
                        v <= spec.values[static_cast<std::size_t>(i - 1)],
                        "spectrum: eigenvalues must be non-increasing");
                }
                sigma(i) = v;
            }
            break;
        }
    }
    return sigma;
}

/**
 * Percentage of the spectrum's mass captured by the k largest values:
 * 100 * sum(sigma_1..sigma_k) / sum(sigma). sigma must be non-negative,
 * non-increasing and not identically zero.
 */
inline double percent_of_spectrum(const Vector& sigma, Index k) {
    detail::require_arg(sigma.size() >= 1, "percent_of_spectrum: empty spectrum");
    detail::require_arg(k >= 1 && k <= sigma.size(),
                        "percent_of_spectrum: k must be in [1, n]");
    double head = 0.0, total = 0.0;
    for (Index i = 0; i < sigma.size(); ++i) {
        const double v = sigma(i);
        detail::require_arg(v >= 0.0, "percent_of_spectrum: negative value");
        detail::require_arg(i == 0 || v <= sigma(i - 1),
                            "percent_of_spectrum: values must be non-increasing");
        total += v;
        if (i < k) head += v;
    }
    detail::require_arg(total > 0.0, "percent_of_spectrum: zero spectrum");
    return 100.0 * head / total;
}

enum class CoherenceKind { random_orthogonal, forced_first_vector };

/** Coherence model for the eigenbasis of a synthetic matrix. */
struct CoherenceTarget {
    CoherenceKind kind = CoherenceKind::random_orthogonal;
    double target_mu = 0.0;  // forced_first_vector only, in [1, sqrt(n)]
};

inline CoherenceTarget random_target() {
    return CoherenceTarget{CoherenceKind::random_orthogonal, 0.0};
}

inline CoherenceTarget forced_target(double mu) {
    return CoherenceTarget{CoherenceKind::forced_first_vector, mu};
}

namespace detail {

/** First column of a forced-coherence basis: mass target_mu/sqrt(n) on
 *  entry 0, the remainder spread evenly (unit norm by construction). */
inline Vector forced_first_column(Index n, double target_mu) {
    const double root_n = std::sqrt(static_cast<double>(n));
    require_arg(target_mu >= 1.0 && target_mu <= root_n,
                "orthonormal_basis: targetMu must lie in [1, sqrt(n)]");
    Vector v(n);
    v(0) = target_mu / root_n;
    if (n > 1) {
        const double tail = std::sqrt(
            std::max(1.0 - (target_mu * target_mu) / static_cast<double>(n), 0.0) /
            static_cast<double>(n - 1));
        for (Index i = 1; i < n; ++i) v(i) = tail;
    }
    return v;
}

/** Thin Q of a QR factorization, columns sign-fixed so diag(R) >= 0. */
inline Matrix thin_q_sign_fixed(const Matrix& m) {
    Eigen::HouseholderQR<Matrix> qr(m);
    Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
    for (Index j = 0; j < m.cols(); ++j) {
        if (qr.matrixQR()(j, j) < 0.0) q.col(j) = -q.col(j);
    }
    return q;
}

}  // namespace detail

/**
 * Deterministic orthonormal basis (n x m) under a coherence model.
 *
 * random_orthogonal: QR of an i.i.d. standard normal matrix (entries drawn
 * column-major), sign-fixed so the distribution is Haar on the orthogonal
 * frame and independent of QR convention.
 *
 * forced_first_vector: column 0 is exactly the forced vector (entry 0 gets
 * targetMu/sqrt(n) of the mass, the tail is uniform); remaining columns
 * complete it with a sign-fixed QR of random normals and column 0 is
 * re-planted verbatim after the factorization.
 */
inline OrthonormalBasis orthonormal_basis(const CoherenceTarget& target, Index n,
                                          Index m, std::uint64_t seed) {
    detail::require_arg(n >= 1, "orthonormal_basis: n must be >= 1");
    detail::require_arg(m >= 1 && m <= n, "orthonormal_basis: m must be in [1, n]");
    Rng rng(seed);
    Matrix raw(n, m);
    switch (target.kind) {
        case CoherenceKind::random_orthogonal: {
            for (Index j = 0; j < m; ++j) {
                for (Index i = 0; i < n; ++i) raw(i, j) = rng.normal();
            }
            return OrthonormalBasis(detail::thin_q_sign_fixed(raw));
        }
        case CoherenceKind::forced_first_vector: {
            const Vector v1 = detail::forced_first_column(n, target.target_mu);
            raw.col(0) = v1;
            for (Index j = 1; j < m; ++j) {
                for (Index i = 0; i < n; ++i) raw(i, j) = rng.normal();
            }
            Matrix q = detail::thin_q_sign_fixed(raw);
            q.col(0) = v1;  // re-plant exactly (QR reproduces it only to rounding)
            return OrthonormalBasis(std::move(q));
        }
    }
    throw InvalidArgumentError("orthonormal_basis: unknown coherence kind");
}

/** A generated SPSD matrix together with its planted structure. */
struct SynthReport {
    GramMatrix g;
    OrthonormalBasis planted;          // first r basis columns
    Vector sigma;                      // full length-n spectrum
    double realized_mu = 0.0;          // coherence of the planted basis
    std::optional<double> target_mu;   // absent for random_orthogonal
};

/**
 * Synthesize G = V diag(sigma) V' with a planted rank-r leading basis.
 *
 * Only basis directions with sigma_i > 1e-18 * sigma_1 are materialized
 * (columns below that threshold cannot move any entry of G at double
 * precision); at least r directions are always generated so the planted
 * basis is well-defined.
 */
inline SynthReport synth_spsd(const SpectrumSpec& spec, const CoherenceTarget& target,
                              Index r, std::uint64_t seed) {
    const Index n = spec.n;
    detail::require_arg(r >= 1 && r <= n, "synth_spsd: r must be in [1, n]");
    const Vector sigma = spectrum(spec);
    detail::require_arg(sigma(0) > 0.0, "synth_spsd: zero spectrum");

    Index m_eff = 0;
    const double cutoff = 1e-18 * sigma(0);
    while (m_eff < n && sigma(m_eff) > cutoff) ++m_eff;
    const Index m = std::max(m_eff, r);

    OrthonormalBasis basis = orthonormal_basis(target, n, m, seed);

    Matrix a = basis.mat().leftCols(m_eff);
    for (Index j = 0; j < m_eff; ++j) a.col(j) *= std::sqrt(sigma(j));
    Matrix g = Matrix::Zero(n, n);
    g.selfadjointView<Eigen::Lower>().rankUpdate(a);
    g.triangularView<Eigen::StrictlyUpper>() = g.transpose();

    OrthonormalBasis planted(basis.mat().leftCols(r));
    const double realized = coherence(planted).mu;
    std::optional<double> target_mu;
    if (target.kind == CoherenceKind::forced_first_vector) {
        target_mu = target.target_mu;
    }
    return SynthReport{GramMatrix(std::move(g)), std::move(planted), sigma,
                       realized, target_mu};
}

/**
 * Rank-r diagonal pathology: G = diag(1, ..., 1, 0, ..., 0). Its columns
 * are informative only on the r-point support, so uniform column sampling
 * misses everything with probability ((n-r)/n)^l.
 */
inline GramMatrix pathological_diag(Index n, Index r) {
    detail::require_arg(n >= 1, "pathological_diag: n must be >= 1");
    detail::require_arg(r >= 1 && r <= n, "pathological_diag: r must be in [1, n]");
    Matrix g = Matrix::Zero(n, n);
    for (Index i = 0; i < r; ++i) g(i, i) = 1.0;
    return GramMatrix(std::move(g));
}

/**
 * High-coherence test matrix: flat rank-r spectrum with a forced first
 * eigenvector. targetMu defaults to 0.9 * sqrt(n).
 */
inline SynthReport artificial_highmu(Index n, Index r, std::uint64_t seed,
                                     double target_mu = -1.0) {
    if (target_mu < 0.0) target_mu = 0.9 * std::sqrt(static_cast<double>(n));
    return synth_spsd(flat_spectrum(n, r), forced_target(target_mu), r, seed);
}

}  // namespace nystrom
