#pragma once

#include <cstdint>
#include <limits>
#include <optional>

namespace nmqkd {

// Counter-based random streams.
//
// Every random draw in a session comes from a RandomStream keyed by
// (master seed, purpose, index). Streams are independent of each other and of
// the order in which they are consumed, so a session gives the same result
// whether its pulses are simulated serially or across threads.
//
// The generator is SplitMix64 (Steele, Lea & Flood 2014): a 64-bit counter
// advanced by the golden-ratio increment and passed through a bijective
// mixer. Normal variates use the Box-Muller transform, consuming exactly two
// uniforms per pair.

enum class StreamPurpose : std::uint64_t {
    Interleave = 1,
    KeyAmplitude = 2,
    Route = 3,
    Measurement = 4,
    Repetition = 5,
};

std::uint64_t splitmix64_mix(std::uint64_t z) noexcept;

// Key for stream `index` of the given purpose under `seed`.
std::uint64_t derive_key(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index) noexcept;

class RandomStream {
public:
    using result_type = std::uint64_t;

    explicit RandomStream(std::uint64_t key) noexcept : state_(key) {}
    RandomStream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index) noexcept
        : state_(derive_key(seed, purpose, index)) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    // Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    // Fair coin.
    bool bernoulli_half() noexcept { return ((*this)() >> 63) != 0; }
    // Standard normal variate.
    double normal() noexcept;
    double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }
    // Uniform integer in [0, bound), bound > 0 (Lemire's multiply-shift with rejection).
    std::uint64_t below(std::uint64_t bound) noexcept;

private:
    std::uint64_t state_;
    std::optional<double> spare_normal_;
};

}  // namespace nmqkd
