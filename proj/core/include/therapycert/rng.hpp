#pragma once

// Seeded random streams. Every consumer derives an independent stream from (base seed,
// purpose tag, index...) so results never depend on scheduling or on other rows.

#include <cstdint>
#include <initializer_list>
#include <random>

namespace therapycert {

enum class StreamTag : std::uint64_t {
    ModelParameters = 0x6d6f64656cULL,
    InitialState = 0x7374617465ULL,
    ControlParameters = 0x6374726cULL,
    TrainTestSplit = 0x73706c6974ULL,
    Bootstrap = 0x626f6f74ULL,
    FeatureDraw = 0x66656174ULL,
    Scenario = 0x7363656eULL,
    Validation = 0x76616c6964ULL,
    Simulate = 0x73696dULL,
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Mixes the base seed with the tag and indices into a 64-bit stream seed.
std::uint64_t derive_seed(std::uint64_t seed, StreamTag tag,
                          std::initializer_list<std::uint64_t> indices = {}) noexcept;

/// mt19937_64 engine with distribution code written out here so the sequence is identical
/// across standard library implementations.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
    RandomStream(std::uint64_t seed, StreamTag tag, std::initializer_list<std::uint64_t> indices = {})
        : engine_(derive_seed(seed, tag, indices)) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01();
    /// Uniform on [lo, hi]; returns lo when lo == hi.
    double uniform(double lo, double hi);
    /// exp(uniform(log lo, log hi)); requires 0 < lo <= hi.
    double log_uniform(double lo, double hi);
    /// Uniform integer in [0, n), unbiased; n > 0.
    std::uint64_t below(std::uint64_t n);

private:
    std::mt19937_64 engine_;
};

} // namespace therapycert
