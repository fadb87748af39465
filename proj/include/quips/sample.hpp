#pragma once

#include "quips/errors.hpp"
#include "quips/rat.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace quips {

// Constraint evaluated at a candidate point; must come out nonzero.
using AvoidFn = std::function<Rat(const std::vector<Rat>&)>;

// Deterministic PRNG (splitmix64) so sampled points are identical across
// platforms and thread counts.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : s_(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (s_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    // Uniform in [0, n)
    std::uint64_t below(std::uint64_t n) { return next() % n; }

    // Small rational: |num| <= 100, 1 <= den <= 16. Keeps big-integer growth
    // tame in deep matrix products.
    Rat small_rat() {
        long num = static_cast<long>(below(201)) - 100;
        long den = static_cast<long>(below(16)) + 1;
        return Rat(num, den);
    }

private:
    std::uint64_t s_;
};

// Deterministic pseudo-random rational points avoiding the given constraints.
// Resamples the whole tuple until every avoid expression is nonzero; throws
// AvoidanceExhausted after max_tries attempts.
inline std::vector<Rat> sample_point(std::uint64_t seed, std::size_t n_vars,
                                     const std::vector<AvoidFn>& avoid = {},
                                     std::size_t max_tries = 1000) {
    Rng rng(seed);
    for (std::size_t attempt = 0; attempt < max_tries; ++attempt) {
        std::vector<Rat> pt(n_vars);
        for (auto& x : pt) x = rng.small_rat();
        bool ok = true;
        for (const auto& f : avoid) {
            if (f(pt).is_zero()) { ok = false; break; }
        }
        if (ok) return pt;
    }
    throw AvoidanceExhausted("sample_point: no admissible point after " +
                             std::to_string(max_tries) + " tries (degenerate avoid set?)");
}

} // namespace quips
