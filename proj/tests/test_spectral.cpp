#include <cmath>

#include "catch2/catch_amalgamated.hpp"
#include "nystrom/rng.hpp"
#include "nystrom/spectral.hpp"

using nystrom::GramMatrix;
using nystrom::Index;
using nystrom::Matrix;
using nystrom::Rng;
using nystrom::ThinSVD;

namespace {

Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
    }
    return m;
}

GramMatrix random_spd(Index n, std::uint64_t seed) {
    const Matrix a = random_matrix(n, n, seed);
    Matrix g = a * a.transpose() + Matrix::Identity(n, n);
    return GramMatrix(0.5 * (g + g.transpose()));
}

}  // namespace

TEST_CASE("thin_svd reconstructs and orders") {
    const Matrix m = random_matrix(8, 8, 11);
    const ThinSVD svd = nystrom::thin_svd(m);
    const Matrix recon = svd.u * svd.sigma.asDiagonal() * svd.v.transpose();
    REQUIRE((m - recon).norm() <= 1e-10 * m.norm());
    for (Index i = 1; i < svd.sigma.size(); ++i) {
        REQUIRE(svd.sigma(i) <= svd.sigma(i - 1));
    }
    REQUIRE((svd.u.transpose() * svd.u - Matrix::Identity(8, 8)).norm() < 1e-10);
    REQUIRE((svd.v.transpose() * svd.v - Matrix::Identity(8, 8)).norm() < 1e-10);
    REQUIRE(svd.rank == 8);
}

TEST_CASE("thin_svd handles rectangular input") {
    const Matrix m = random_matrix(9, 4, 12);
    const ThinSVD svd = nystrom::thin_svd(m);
    REQUIRE(svd.u.rows() == 9);
    REQUIRE(svd.u.cols() == 4);
    REQUIRE(svd.sigma.size() == 4);
    const Matrix recon = svd.u * svd.sigma.asDiagonal() * svd.v.transpose();
    REQUIRE((m - recon).norm() <= 1e-10 * m.norm());
}

TEST_CASE("thin_svd SPSD overload agrees with the general path") {
    const GramMatrix g = random_spd(10, 13);
    const ThinSVD a = nystrom::thin_svd(g);
    const ThinSVD b = nystrom::thin_svd(g.mat());
    REQUIRE(a.sigma.size() == b.sigma.size());
    for (Index i = 0; i < a.sigma.size(); ++i) {
        REQUIRE(a.sigma(i) == Catch::Approx(b.sigma(i)).epsilon(1e-10));
    }
    const Matrix recon = a.u * a.sigma.asDiagonal() * a.v.transpose();
    REQUIRE((g.mat() - recon).norm() <= 1e-10 * g.mat().norm());
}

TEST_CASE("pseudo_inverse inverts diag(2, 0) to diag(0.5, 0)") {
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 2.0;
    const Matrix p = nystrom::pseudo_inverse(d);
    REQUIRE(p(0, 0) == Catch::Approx(0.5).margin(1e-14));
    REQUIRE(std::abs(p(0, 1)) < 1e-14);
    REQUIRE(std::abs(p(1, 0)) < 1e-14);
    REQUIRE(std::abs(p(1, 1)) < 1e-14);
}

TEST_CASE("pseudo_inverse satisfies the Moore-Penrose identities") {
    // Rank-3 5x5 via an explicit low-rank product.
    const Matrix b = random_matrix(5, 3, 21);
    const Matrix m = b * random_matrix(3, 5, 22);
    const Matrix p = nystrom::pseudo_inverse(m);
    const double scale = m.norm();
    REQUIRE((m * p * m - m).norm() <= 1e-8 * scale);
    REQUIRE((p * m * p - p).norm() <= 1e-8 * p.norm());
    REQUIRE(((m * p) - (m * p).transpose()).norm() <= 1e-8);
    REQUIRE(((p * m) - (p * m).transpose()).norm() <= 1e-8);

    SECTION("SPSD overload gives the same result") {
        const GramMatrix g = random_spd(6, 23);
        const Matrix p1 = nystrom::pseudo_inverse(g);
        const Matrix p2 = nystrom::pseudo_inverse(g.mat());
        REQUIRE((p1 - p2).norm() <= 1e-8 * p1.norm());
    }
}

TEST_CASE("best_rank_k error equals the tail norm") {
    const Matrix m = random_matrix(6, 6, 31);
    const ThinSVD svd = nystrom::thin_svd(m);
    const Index k = 2;
    const Matrix mk = nystrom::best_rank_k(m, k);
    double tail = 0.0;
    for (Index i = k; i < svd.sigma.size(); ++i) tail += svd.sigma(i) * svd.sigma(i);
    REQUIRE((m - mk).norm() == Catch::Approx(std::sqrt(tail)).epsilon(1e-10));

    SECTION("k = 0 gives zero, full k reconstructs") {
        REQUIRE(nystrom::best_rank_k(m, 0).norm() == 0.0);
        REQUIRE((m - nystrom::best_rank_k(m, 6)).norm() <= 1e-10 * m.norm());
    }
    SECTION("k beyond min dimension rejected") {
        REQUIRE_THROWS_AS(nystrom::best_rank_k(m, 7),
                          nystrom::InvalidArgumentError);
    }
}

TEST_CASE("best_rank_k on a Gram matrix stays SPSD and optimal") {
    const GramMatrix g = random_spd(7, 41);
    const GramMatrix gk = nystrom::best_rank_k(g, 3);
    REQUIRE_NOTHROW(nystrom::validate_spsd(gk));
    const ThinSVD eig = nystrom::thin_svd(g);
    double tail = 0.0;
    for (Index i = 3; i < eig.sigma.size(); ++i) tail += eig.sigma(i) * eig.sigma(i);
    REQUIRE((g.mat() - gk.mat()).norm() ==
            Catch::Approx(std::sqrt(tail)).epsilon(1e-8));
}

TEST_CASE("numerical_rank applies the relative cutoff") {
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = 1e-14;  // below rankTol * sigma_max = 1e-10
    REQUIRE(nystrom::numerical_rank(d) == 1);
    REQUIRE(nystrom::numerical_rank(Matrix::Identity(3, 3)) == 3);
    REQUIRE(nystrom::numerical_rank(Matrix::Zero(4, 4)) == 0);

    SECTION("rank deficiency from duplicated columns") {
        Matrix m(3, 3);
        m.col(0) = Eigen::Vector3d(1.0, 2.0, 3.0);
        m.col(1) = m.col(0);
        m.col(2) = Eigen::Vector3d(0.0, 1.0, 0.0);
        REQUIRE(nystrom::numerical_rank(m) == 2);
    }
    SECTION("SPSD overload agrees") {
        const GramMatrix g = random_spd(5, 51);
        REQUIRE(nystrom::numerical_rank(g) == nystrom::numerical_rank(g.mat()));
    }
}
