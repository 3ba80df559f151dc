#include "nmqkd/random.hpp"

#include <cmath>
#include <numbers>

namespace nmqkd {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_key(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index) noexcept {
    const std::uint64_t domain = splitmix64_mix(seed + kGolden * static_cast<std::uint64_t>(purpose));
    return splitmix64_mix(domain ^ splitmix64_mix(index + kGolden));
}

RandomStream::result_type RandomStream::operator()() noexcept {
    state_ += kGolden;
    return splitmix64_mix(state_);
}

double RandomStream::uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double RandomStream::normal() noexcept {
    if (spare_normal_) {
        const double z = *spare_normal_;
        spare_normal_.reset();
        return z;
    }
    // u1 in (0, 1] keeps the logarithm finite.
    const double u1 = static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_normal_ = radius * std::sin(angle);
    return radius * std::cos(angle);
}

std::uint64_t RandomStream::below(std::uint64_t bound) noexcept {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const unsigned __int128 product = static_cast<unsigned __int128>((*this)()) * bound;
        if (static_cast<std::uint64_t>(product) >= threshold)
            return static_cast<std::uint64_t>(product >> 64);
    }
}

}  // namespace nmqkd
