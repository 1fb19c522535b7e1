#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "rlab/bytes.hpp"

namespace rlab {

/// SplitMix64 finalizer. Also the mixing step of the symmetric keystream.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

/// Seeded SplitMix64 generator. Every random decision in a scenario run
/// (key bytes, primes, overwrite noise, payload filler) is drawn from one
/// of these, so a run is a pure function of its seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        state_ += kGoldenGamma;
        return mix64(state_);
    }

    /// Uniform in [0, bound); bound must be non-zero.
    std::uint64_t uniform(std::uint64_t bound) noexcept;
    bool coin() noexcept { return (next() >> 63) != 0; }

    /// Little-endian octets of successive next() outputs.
    Bytes bytes(std::size_t n);

    /// Serial identifiers ("sk-0001", "kp-0002", ...) unique per generator.
    std::string next_id(std::string_view prefix);

private:
    std::uint64_t state_;
    std::uint32_t serial_ = 0;
};

}  // namespace rlab
