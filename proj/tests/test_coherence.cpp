#include <algorithm>
#include <cmath>
#include <vector>

#include "catch2/catch_amalgamated.hpp"
#include "nystrom/coherence.hpp"
#include "nystrom/synth.hpp"

using nystrom::CoherenceReport;
using nystrom::GramMatrix;
using nystrom::Index;
using nystrom::Matrix;
using nystrom::OrthonormalBasis;

TEST_CASE("OrthonormalBasis validates its columns") {
    REQUIRE_NOTHROW(OrthonormalBasis(Matrix::Identity(4, 2)));
    SECTION("non-orthonormal rejected") {
        Matrix v = Matrix::Identity(4, 2);
        v(0, 1) = 0.5;
        REQUIRE_THROWS_AS(OrthonormalBasis(v), nystrom::InvalidInputError);
    }
    SECTION("wide matrix rejected") {
        REQUIRE_THROWS_AS(OrthonormalBasis(Matrix::Identity(2, 3).eval()),
                          nystrom::InvalidInputError);
    }
}

TEST_CASE("coherence of hand-built bases") {
    SECTION("standard basis vector has maximal coherence") {
        Matrix v = Matrix::Zero(4, 1);
        v(2, 0) = 1.0;
        const CoherenceReport rep = nystrom::coherence(OrthonormalBasis(v));
        REQUIRE(rep.mu == Catch::Approx(2.0));  // sqrt(4) * 1
        REQUIRE(rep.argmax_row == 2);
        REQUIRE(rep.argmax_col == 0);
    }
    SECTION("uniform vector has minimal coherence") {
        Matrix v = Matrix::Constant(4, 1, 0.5);
        const CoherenceReport rep = nystrom::coherence(OrthonormalBasis(v));
        REQUIRE(rep.mu == Catch::Approx(1.0));
        REQUIRE(rep.argmax_row == 0);  // ties resolve to the first entry
    }
    SECTION("ties resolve lexicographically over (row, col)") {
        const CoherenceReport rep =
            nystrom::coherence(OrthonormalBasis(Matrix::Identity(3, 2)));
        REQUIRE(rep.argmax_row == 0);
        REQUIRE(rep.argmax_col == 0);
    }
}

TEST_CASE("coherence respects its bounds and invariances") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const OrthonormalBasis basis =
            nystrom::orthonormal_basis(nystrom::random_target(), 40, 5, seed);
        const double mu = nystrom::coherence(basis).mu;
        REQUIRE(mu >= 1.0 - 1e-12);
        REQUIRE(mu <= std::sqrt(40.0) + 1e-12);

        // Row permutation and column sign flips leave mu unchanged.
        Matrix permuted = basis.mat();
        permuted.row(0).swap(permuted.row(17));
        permuted.col(2) = -permuted.col(2);
        REQUIRE(nystrom::coherence(OrthonormalBasis(permuted)).mu ==
                Catch::Approx(mu));
    }
}

TEST_CASE("top_r_coherence recovers a planted basis under a decaying spectrum") {
    // Strictly decreasing eigenvalues make the top-r eigenspace unique, so
    // the measured basis must match the planted one up to column signs.
    const Index n = 500, r = 20;
    std::vector<double> values(static_cast<std::size_t>(n), 0.0);
    for (Index i = 0; i < r; ++i) {
        values[static_cast<std::size_t>(i)] = std::exp(-0.1 * (i + 1.0));
    }
    const nystrom::SynthReport rep =
        nystrom::synth_spsd(nystrom::explicit_spectrum(n, values),
                            nystrom::forced_target(0.8 * std::sqrt(n)), r, 904);
    const CoherenceReport measured = nystrom::top_r_coherence(rep.g, r);
    REQUIRE(measured.mu == Catch::Approx(rep.realized_mu).margin(1e-6));
    REQUIRE_FALSE(measured.degenerate);
}

TEST_CASE("top_r_coherence flags r beyond the numerical rank") {
    const nystrom::SynthReport rep = nystrom::synth_spsd(
        nystrom::flat_spectrum(30, 5), nystrom::random_target(), 5, 77);
    REQUIRE(nystrom::top_r_coherence(rep.g, 10).degenerate);
    REQUIRE_FALSE(nystrom::top_r_coherence(rep.g, 5).degenerate);
    REQUIRE_THROWS_AS(nystrom::top_r_coherence(rep.g, 31),
                      nystrom::InvalidArgumentError);
    REQUIRE_THROWS_AS(nystrom::top_r_coherence(rep.g, 0),
                      nystrom::InvalidArgumentError);
}

TEST_CASE("subset_orthogonality_defect matches hand values") {
    SECTION("every row once gives zero") {
        const OrthonormalBasis basis =
            nystrom::orthonormal_basis(nystrom::random_target(), 30, 4, 5);
        std::vector<std::size_t> all(30);
        for (std::size_t i = 0; i < 30; ++i) all[i] = i;
        REQUIRE(nystrom::subset_orthogonality_defect(basis, all) < 1e-12);
    }
    SECTION("duplicated informative row, hand oracle") {
        // Basis e_1 in R^2; rows {0, 0}: (n/l) V_S'V_S = (2/2)*2 = 2 -> defect 1.
        Matrix v(2, 1);
        v << 1.0, 0.0;
        REQUIRE(nystrom::subset_orthogonality_defect(OrthonormalBasis(v), {0, 0}) ==
                Catch::Approx(1.0));
        // Rows {1, 1} miss the basis direction entirely: defect is 1 as well.
        REQUIRE(nystrom::subset_orthogonality_defect(OrthonormalBasis(v), {1, 1}) ==
                Catch::Approx(1.0));
    }
    SECTION("errors") {
        const OrthonormalBasis basis(Matrix::Identity(3, 1));
        REQUIRE_THROWS_AS(nystrom::subset_orthogonality_defect(basis, {}),
                          nystrom::InvalidArgumentError);
        REQUIRE_THROWS_AS(nystrom::subset_orthogonality_defect(basis, {3}),
                          nystrom::InvalidArgumentError);
    }
}

TEST_CASE("defect of a large uniform sample is usually below one half") {
    // Incoherent basis, n = 1024, r = 10, l = 400 with replacement.
    int ok = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const OrthonormalBasis basis = nystrom::orthonormal_basis(
            nystrom::random_target(), 1024, 10, 600 + seed);
        nystrom::Rng rng(1700 + seed);
        const auto rows = rng.sample_with_replacement(1024, 400);
        if (nystrom::subset_orthogonality_defect(basis, rows) < 0.5) ++ok;
    }
    REQUIRE(ok >= 9);
}

TEST_CASE("growth_profile full size equals the matrix coherence") {
    const Index n = 64, r = 4;
    std::vector<double> values(static_cast<std::size_t>(n), 0.0);
    for (Index i = 0; i < r; ++i) {
        values[static_cast<std::size_t>(i)] = std::exp(-0.3 * (i + 1.0));
    }
    const nystrom::SynthReport rep = nystrom::synth_spsd(
        nystrom::explicit_spectrum(n, values), nystrom::random_target(), r, 8);
    const nystrom::GrowthProfile profile =
        nystrom::growth_profile(rep.g, {16, 64}, r, 3, 99);
    REQUIRE(profile.sizes.size() == 2);
    REQUIRE(profile.mean_mu[1] ==
            Catch::Approx(nystrom::top_r_coherence(rep.g, r).mu));
    REQUIRE(profile.mean_mu[0] >= 1.0 - 1e-12);
    REQUIRE(profile.mean_mu[0] <= 4.0 + 1e-12);  // sqrt(16)
}

TEST_CASE("growth_profile separates bounded from growing coherence") {
    const Index n = 512, r = 10;
    std::vector<double> values(static_cast<std::size_t>(n), 0.0);
    for (Index i = 0; i < r; ++i) {
        values[static_cast<std::size_t>(i)] = std::exp(-0.1 * (i + 1.0));
    }
    const auto spec = nystrom::explicit_spectrum(n, values);
    const nystrom::SynthReport incoherent =
        nystrom::synth_spsd(spec, nystrom::random_target(), r, 15);
    const nystrom::SynthReport coherent = nystrom::synth_spsd(
        spec, nystrom::forced_target(0.9 * std::sqrt(n)), r, 15);

    const std::vector<Index> sizes{64, 512};
    const auto inc = nystrom::growth_profile(incoherent.g, sizes, r, 4, 31);
    const auto coh = nystrom::growth_profile(coherent.g, sizes, r, 4, 31);
    const double inc_ratio = inc.mean_mu[1] / inc.mean_mu[0];
    const double coh_ratio = coh.mean_mu[1] / coh.mean_mu[0];
    REQUIRE(inc_ratio < 2.0);
    REQUIRE(coh_ratio > inc_ratio + 0.5);
}

TEST_CASE("growth_profile validates sizes") {
    const nystrom::SynthReport rep = nystrom::synth_spsd(
        nystrom::flat_spectrum(20, 3), nystrom::random_target(), 3, 1);
    REQUIRE_THROWS_AS(nystrom::growth_profile(rep.g, {}, 3, 2, 1),
                      nystrom::InvalidArgumentError);
    REQUIRE_THROWS_AS(nystrom::growth_profile(rep.g, {2}, 3, 2, 1),
                      nystrom::InvalidArgumentError);  // below r
    REQUIRE_THROWS_AS(nystrom::growth_profile(rep.g, {25}, 3, 2, 1),
                      nystrom::InvalidArgumentError);  // above n
    REQUIRE_THROWS_AS(nystrom::growth_profile(rep.g, {10}, 3, 0, 1),
                      nystrom::InvalidArgumentError);  // no trials
}
