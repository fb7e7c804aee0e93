#pragma once

#include "skembed/chain.hpp"
#include "skembed/rng.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace skembed {

/// Closed integer interval [lo, hi].
struct Window {
    std::int64_t lo = 0;
    std::int64_t hi = -1;

    std::int64_t size() const noexcept { return hi >= lo ? hi - lo + 1 : 0; }
    bool contains(std::int64_t n) const noexcept { return lo <= n && n <= hi; }
    bool contains(const Window& w) const noexcept { return w.size() == 0 || (lo <= w.lo && w.hi <= hi); }
    friend bool operator==(const Window&, const Window&) = default;
};

/// Two-sided sample path with X_0 fixed, materialised lazily over [lo, hi].
///
/// The forward part is drawn from the kernel p and the backward part from the
/// dual kernel p*, each from its own substream, so the values at an index do
/// not depend on the order in which the two directions are extended.
/// Materialised values never change.
class Trajectory {
public:
    Trajectory(const ChainSpec& spec, State origin, std::uint64_t seed, std::uint64_t replica);

    /// Path whose window starts as `values`, with `values[origin_index]` at
    /// index 0. Extensions beyond the fixture are sampled as usual. Throws
    /// InvalidFixture if a step of the fixture has zero probability.
    static Trajectory from_fixture(const ChainSpec& spec, std::span<const State> values, std::size_t origin_index,
                                   std::uint64_t seed, std::uint64_t replica);

    const ChainSpec& spec() const noexcept { return *spec_; }
    std::int64_t lo() const noexcept { return -static_cast<std::int64_t>(backward_.size()); }
    std::int64_t hi() const noexcept { return static_cast<std::int64_t>(forward_.size()) - 1; }
    Window window() const noexcept { return {lo(), hi()}; }
    State origin() const noexcept { return forward_.front(); }
    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t replica() const noexcept { return replica_; }

    /// Materialised value; throws WindowNotMaterialized outside [lo, hi].
    State at(std::int64_t n) const;

    /// Value at n, extending the window in either direction as needed.
    State extend_to(std::int64_t n);

    void sample_forward(std::int64_t upto);
    void sample_backward(std::int64_t downto);

private:
    const ChainSpec* spec_;
    std::uint64_t seed_;
    std::uint64_t replica_;
    std::vector<State> forward_;  // X_0, X_1, ...
    std::vector<State> backward_; // X_{-1}, X_{-2}, ...
    CounterRng forward_rng_;
    CounterRng backward_rng_;
};

/// Forward-only path keeping just the last `history` states. Draws exactly
/// the same values as Trajectory for the same (seed, replica), without the
/// O(n) memory, for scans that run to very large caps.
class ForwardWalker {
public:
    ForwardWalker(const ChainSpec& spec, State origin, std::uint64_t seed, std::uint64_t replica,
                  std::size_t history = 1);

    const ChainSpec& spec() const noexcept { return *spec_; }
    std::int64_t hi() const noexcept { return hi_; }
    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t replica() const noexcept { return replica_; }

    /// Requires n > hi() - history; throws WindowNotMaterialized otherwise.
    State extend_to(std::int64_t n);

private:
    const ChainSpec* spec_;
    std::uint64_t seed_;
    std::uint64_t replica_;
    std::vector<State> ring_;
    std::int64_t hi_ = 0;
    CounterRng rng_;
};

} // namespace skembed
