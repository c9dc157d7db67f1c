#include "therapycert/rng.hpp"

#include <cmath>

namespace therapycert {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, StreamTag tag,
                          std::initializer_list<std::uint64_t> indices) noexcept {
    std::uint64_t state = seed;
    std::uint64_t h = splitmix64(state);
    state = h ^ static_cast<std::uint64_t>(tag);
    h = splitmix64(state);
    for (std::uint64_t idx : indices) {
        state = h ^ (idx + 0x632be59bd9b4e019ULL);
        h = splitmix64(state);
    }
    return h;
}

double RandomStream::uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomStream::uniform(double lo, double hi) {
    const double u = uniform01();
    if (lo == hi) {
        return lo;
    }
    return lo + (hi - lo) * u;
}

double RandomStream::log_uniform(double lo, double hi) {
    const double u = uniform01();
    if (lo == hi) {
        return lo;
    }
    const double llo = std::log(lo);
    const double v = std::exp(llo + (std::log(hi) - llo) * u);
    return v < lo ? lo : (v > hi ? hi : v);
}

std::uint64_t RandomStream::below(std::uint64_t n) {
    // Rejection on the top of the range keeps the draw unbiased.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = engine_();
    while (x >= limit) {
        x = engine_();
    }
    return x % n;
}

} // namespace therapycert
