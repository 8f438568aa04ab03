#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

namespace trailmine::detail {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept
{
    return splitmix64(a ^ splitmix64(b));
}

// Library-independent draws so runs are reproducible across standard libraries.
inline double uniform01(std::mt19937_64& rng) noexcept
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::int64_t uniform_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) noexcept
{
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(rng() % span);
}

inline bool bernoulli(std::mt19937_64& rng, double p) noexcept
{
    return uniform01(rng) < p;
}

// Index drawn proportionally to non-negative weights; throws when all are zero.
inline std::size_t pick_weighted(std::mt19937_64& rng, std::span<const double> weights)
{
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw std::logic_error("pick_weighted: no positive weight");
    double x = uniform01(rng) * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (x < weights[i]) return i;
        x -= weights[i];
    }
    for (std::size_t i = weights.size(); i-- > 0;) {
        if (weights[i] > 0.0) return i;
    }
    return 0;
}

template <class T>
void shuffle(std::mt19937_64& rng, std::span<T> v)
{
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(i - 1)));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace trailmine::detail
