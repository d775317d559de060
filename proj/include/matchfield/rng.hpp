#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>

namespace matchfield {

/// splitmix64 finalizer; used to spread structured seed tuples.
inline std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Sub-step labels for substream derivation.
enum class Stream : std::uint64_t {
    environment = 1,
    init = 2,
    mutation = 3,
    matching = 4,
    breakup = 5,
    agent_path = 6,
};

/// Independent substream seed for (master, replication, period, stream).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replication, std::uint64_t period,
                                 Stream stream)
{
    std::uint64_t h = mix64(master);
    h = mix64(h ^ replication);
    h = mix64(h ^ (period * 0x2545f4914f6cdd1dULL));
    return mix64(h ^ static_cast<std::uint64_t>(stream));
}

/// mt19937_64 with hand-rolled variates so draws are identical across
/// standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0,1) with 53 random bits.
    double uniform()
    {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform integer on [0, n), n > 0. Rejection keeps it unbiased.
    std::uint64_t below(std::uint64_t n)
    {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max()
                                    - std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// Index drawn from nonnegative weights summing to ~1. Zero-weight
    /// entries are never returned.
    std::size_t categorical(std::span<const double> weights)
    {
        const double u = uniform();
        double cum = 0.0;
        std::size_t last_positive = 0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] <= 0.0)
                continue;
            cum += weights[i];
            last_positive = i;
            if (u < cum)
                return i;
        }
        return last_positive;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace matchfield
