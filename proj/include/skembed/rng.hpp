#pragma once

#include <cstdint>
#include <limits>

namespace skembed {

/// Independent random streams of one replica.
enum class Substream : std::uint32_t {
    Forward = 0,
    Backward = 1,
    Auxiliary = 2,
    Bootstrap = 3,
};

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Counter-based generator. The n-th output is a pure function of
/// (master seed, replica, substream, n), so replicas never share state and
/// any replica can be regenerated in isolation.
class CounterRng {
public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t master_seed, std::uint64_t replica, Substream substream) noexcept
        : key_(mix64(mix64(master_seed) ^
                     mix64(replica * 0xD1B54A32D192ED03ULL + static_cast<std::uint64_t>(substream)))) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return mix64(key_ ^ mix64(counter_++)); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n), n > 0.
    std::uint64_t below(std::uint64_t n) noexcept {
        const std::uint64_t limit = max() - max() % n;
        std::uint64_t x;
        do {
            x = (*this)();
        } while (x >= limit);
        return x % n;
    }

    std::uint64_t draws() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace skembed
