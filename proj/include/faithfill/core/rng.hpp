#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>

namespace faithfill {

/// Seedable generator with output that is identical on every platform.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The std distributions are not portable, so the mapping from raw
/// 64-bit words to uniform, integer and normal variates is done here.
class Rng {
public:
    static constexpr std::string_view kAlgorithm = "mt19937_64";

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1].
    double uniform_open_closed() { return 1.0 - uniform(); }

    /// Uniform integer in [lo, hi], inclusive; rejection sampling, no modulo bias.
    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi);

    /// Standard normal via Box-Muller; the second variate is cached.
    double normal();

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

/// Mixes (seed, stream, index) into an independent child seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0);

}  // namespace faithfill
