#include "fwmqkd/counter_rng.hpp"

namespace fwmqkd {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream) noexcept
    : state_(mix64(mix64(seed + kGolden) ^ mix64(stream * 2 + 1)) ^ mix64(substream * kGolden + 0x632be59bd9b4e019ULL)) {}

CounterRng::result_type CounterRng::operator()() noexcept {
    state_ += kGolden;
    return mix64(state_);
}

double CounterRng::uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

}  // namespace fwmqkd
