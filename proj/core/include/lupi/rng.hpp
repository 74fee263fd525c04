#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace lupi {

/// Seeded random stream. The generator (mt19937_64) and every transform here
/// are pinned by this header, so a seed reproduces the same draws bit-for-bit
/// on any platform this library builds on. Gaussians come from Box-Muller on
/// 53-bit uniforms rather than std::normal_distribution, whose output is
/// implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Standard normal draw.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // u1 in (0, 1] keeps the log finite.
        const double u1 = static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    /// Uniform index in [0, n). Fixed-point multiply keeps the mapping pinned.
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>((static_cast<__uint128_t>(gen_()) * n) >> 64);
    }

    /// Fisher-Yates permutation of 0..n-1.
    std::vector<std::size_t> permutation(std::size_t n) {
        std::vector<std::size_t> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = i;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const std::size_t j = i + index(n - i);
            std::swap(p[i], p[j]);
        }
        return p;
    }

    /// First k entries of a partial Fisher-Yates shuffle of 0..n-1,
    /// i.e. a uniform sample without replacement in draw order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
        std::vector<std::size_t> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = i;
        for (std::size_t i = 0; i < k && i + 1 < n; ++i) {
            const std::size_t j = i + index(n - i);
            std::swap(p[i], p[j]);
        }
        p.resize(k);
        return p;
    }

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace lupi
