#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace germforge {

// Counter-based deterministic random stream. Every draw is a pure function of
// (seed, stream, counter), so results do not depend on evaluation order or on
// how work is split across threads. Not cryptographic; used for sampling only.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : seed_(seed), stream_(stream) {}

    // 64-bit value for draw index `counter` of this stream.
    std::uint64_t bits(std::uint64_t counter) const {
        return mix(seed_ ^ rotate(stream_, 31), counter);
    }

    // Uniform in [0, 1).
    double uniform(std::uint64_t counter) const {
        return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
    }

    // Uniform on the closed disc of radius `radius` (area measure).
    std::complex<double> uniform_disc(std::uint64_t counter, double radius) const {
        const double u = uniform(2 * counter);
        const double v = uniform(2 * counter + 1);
        const double r = radius * std::sqrt(u);
        const double t = 6.283185307179586476925286766559 * v;
        return {r * std::cos(t), r * std::sin(t)};
    }

    CounterRng substream(std::uint64_t index) const {
        return CounterRng(seed_, mix(stream_, index ^ 0x9e3779b97f4a7c15ull));
    }

private:
    static std::uint64_t rotate(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    // splitmix64-style finalizer over a keyed counter.
    static std::uint64_t mix(std::uint64_t key, std::uint64_t counter) {
        std::uint64_t z = key + 0x9e3779b97f4a7c15ull * (counter + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
};

} // namespace germforge
