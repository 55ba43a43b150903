#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "liir/errors.hpp"

namespace liir {

// Deterministic random source. All sampling paths go through hand-rolled
// distributions on top of mt19937_64 so that identical seeds give identical
// streams regardless of the standard library's distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed), seed_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1) with 53 random mantissa bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [lo, hi] inclusive.
    int uniform_int(int lo, int hi) {
        if (hi < lo) throw RangeError("uniform_int: empty range");
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        // Rejection sampling to avoid modulo bias.
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t v = gen_();
        while (v >= limit) v = gen_();
        return lo + static_cast<int>(v % span);
    }

    // Standard normal via Box-Muller.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // k distinct integers drawn uniformly from [0, n), ascending order.
    std::vector<int> sample_without_replacement(int n, int k) {
        if (k > n) throw RangeError("sample_without_replacement: k > n");
        // Floyd's algorithm; result sorted for deterministic downstream use.
        std::vector<int> chosen;
        chosen.reserve(static_cast<std::size_t>(k));
        for (int j = n - k; j < n; ++j) {
            const int t = uniform_int(0, j);
            bool seen = false;
            for (int c : chosen) {
                if (c == t) {
                    seen = true;
                    break;
                }
            }
            chosen.push_back(seen ? j : t);
        }
        std::sort(chosen.begin(), chosen.end());
        return chosen;
    }

    // Derived stream: deterministic function of the construction seed and a
    // tag, independent of how much the parent stream has been consumed. Gives
    // parallel batch items thread-count-invariant randomness.
    Rng fork(std::uint64_t tag) const {
        std::uint64_t z = seed_ ^ (tag + 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z = z ^ (z >> 31);
        return Rng(z);
    }

private:
    std::mt19937_64 gen_;
    std::uint64_t seed_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace liir
