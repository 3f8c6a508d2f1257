#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace signet {

// Deterministic random source. Built on mt19937_64 which is fully specified
// by the standard; the distribution transforms live here instead of <random>
// because libstdc++/libc++ are free to implement those differently, and the
// pipeline promises bit-identical runs for identical seeds on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 bits of randomness.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller. One draw consumes two engine words and
    // the sine branch is discarded, which keeps the stream position simple.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Uniform integer in [0, n). Modulo bias is below 2^-53 for any n that
    // fits a dataset index, so a plain reduction is used.
    std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

    // Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_index(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    // Derives an independent stream seed, e.g. per image index, so that
    // per-item work can be scheduled in any order without changing results.
    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace signet
