#pragma once

#include <cstdint>
#include <string_view>

namespace auctionfda {

/// Counter-based SplitMix64: the i-th draw of a stream is mix(key + i * gamma),
/// so any draw is addressable and streams split by hashing (key, stream id).
class CounterRng {
public:
    static constexpr std::string_view kAlgorithm = "splitmix64-counter";

    explicit CounterRng(std::uint64_t key) : key_(key) {}

    static std::uint64_t mix(std::uint64_t z);

    /// Independent child stream for a given id.
    CounterRng split(std::uint64_t stream) const;

    std::uint64_t next_u64();

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();

    /// Uniform on (0, 1].
    double uniform_pos() { return 1.0 - uniform(); }

    /// Standard normal by Box-Muller; each call consumes two uniforms.
    double normal();

    double exponential(double rate);

    /// Uniform integer in [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace auctionfda
