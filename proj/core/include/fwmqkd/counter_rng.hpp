#pragma once

#include <cstdint>
#include <limits>

namespace fwmqkd {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Random stream keyed by (seed, stream, substream). Pulse k of a run always
/// draws from stream k, so results do not depend on thread count or order.
/// Satisfies UniformRandomBitGenerator.
class CounterRng {
public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    bool coin() noexcept { return ((*this)() >> 63) != 0; }

private:
    std::uint64_t state_;
};

}  // namespace fwmqkd
