#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "nystrom/errors.hpp"

namespace nystrom {

namespace detail {

/** splitmix64 finalizer: bijective 64-bit avalanche mix. */
inline std::uint64_t mix64(std::uint64_t z) noexcept {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace detail

/**
 * Derive a child seed from a master seed and a label path.
 *
 * Deterministic, order-sensitive (labels {1,2} and {2,1} give different
 * seeds), and well-mixed, so per-trial streams built from structured label
 * tuples (experiment, matrix, subset, ...) do not collide in practice.
 */
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> labels) {
    std::uint64_t state = detail::mix64(master + detail::kGolden);
    for (std::uint64_t label : labels) {
        state = detail::mix64(state ^ detail::mix64(label + detail::kGolden));
    }
    return state;
}

/**
 * Deterministic random source.
 *
 * Wraps std::mt19937_64 (bit-exact engine per the standard) and implements
 * the variate transforms by hand: the std distribution classes are not
 * bit-specified across standard libraries, and reproducibility of every
 * experiment depends on the exact draw sequence.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /** Raw 64-bit draw. */
    std::uint64_t next_u64() { return engine_(); }

    /** Uniform double in [0, 1) with 53 random bits. */
    double next_double() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /**
     * Uniform integer in [0, n). Rejection sampling on the top of the 64-bit
     * range keeps the draw unbiased for every n.
     */
    std::uint64_t uniform_index(std::uint64_t n) {
        detail::require_arg(n > 0, "uniform_index: n must be positive");
        if ((n & (n - 1)) == 0) {  // power of two: mask is exact
            return engine_() & (n - 1);
        }
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t draw;
        do {
            draw = engine_();
        } while (draw >= limit);
        return draw % n;
    }

    /** Standard normal via Box-Muller (two uniforms per pair, cached). */
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();  // log(0) guard
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    /** l indices drawn uniformly from [0, n), independently (with replacement). */
    std::vector<std::size_t> sample_with_replacement(std::size_t n, std::size_t l) {
        std::vector<std::size_t> out(l);
        for (std::size_t i = 0; i < l; ++i) {
            out[i] = static_cast<std::size_t>(uniform_index(n));
        }
        return out;
    }

    /**
     * m distinct indices from [0, n), uniform over subsets, returned sorted
     * ascending. Partial Fisher-Yates on an explicit index array.
     */
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t m) {
        detail::require_arg(m <= n, "sample_without_replacement: m must be <= n");
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(uniform_index(n - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(m);
        std::sort(idx.begin(), idx.end());
        return idx;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace nystrom
