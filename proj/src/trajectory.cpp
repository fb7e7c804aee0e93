#include "skembed/trajectory.hpp"

#include "skembed/error.hpp"

namespace skembed {

Trajectory::Trajectory(const ChainSpec& spec, State origin, std::uint64_t seed, std::uint64_t replica)
    : spec_(&spec),
      seed_(seed),
      replica_(replica),
      forward_{origin},
      forward_rng_(seed, replica, Substream::Forward),
      backward_rng_(seed, replica, Substream::Backward) {
    if (!spec.contains(origin)) throw Error(ErrorCode::UnknownState, "origin state not in chain");
}

Trajectory Trajectory::from_fixture(const ChainSpec& spec, std::span<const State> values, std::size_t origin_index,
                                    std::uint64_t seed, std::uint64_t replica) {
    if (origin_index >= values.size()) throw Error(ErrorCode::InvalidFixture, "origin index outside fixture");
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!spec.contains(values[k])) throw Error(ErrorCode::InvalidFixture, "unknown state in fixture");
        if (k > 0 && spec.transition(values[k - 1], values[k]) == 0) {
            throw Error(ErrorCode::InvalidFixture, "impossible step " + spec.label(values[k - 1]) + " -> " +
                                                       spec.label(values[k]) + " at fixture line " +
                                                       std::to_string(k + 1));
        }
    }
    Trajectory traj(spec, values[origin_index], seed, replica);
    traj.forward_.assign(values.begin() + static_cast<std::ptrdiff_t>(origin_index), values.end());
    for (std::size_t k = origin_index; k-- > 0;) traj.backward_.push_back(values[k]);
    return traj;
}

State Trajectory::at(std::int64_t n) const {
    if (n >= 0) {
        if (n > hi()) throw Error(ErrorCode::WindowNotMaterialized, "index " + std::to_string(n) + " > hi");
        return forward_[static_cast<std::size_t>(n)];
    }
    if (n < lo()) throw Error(ErrorCode::WindowNotMaterialized, "index " + std::to_string(n) + " < lo");
    return backward_[static_cast<std::size_t>(-n - 1)];
}

State Trajectory::extend_to(std::int64_t n) {
    if (n > hi()) sample_forward(n);
    if (n < lo()) sample_backward(n);
    return n >= 0 ? forward_[static_cast<std::size_t>(n)] : backward_[static_cast<std::size_t>(-n - 1)];
}

void Trajectory::sample_forward(std::int64_t upto) {
    if (upto <= hi()) return;
    State s = forward_.back();
    while (hi() < upto) {
        s = spec_->step(s, forward_rng_.uniform());
        forward_.push_back(s);
    }
}

void Trajectory::sample_backward(std::int64_t downto) {
    if (downto >= lo()) return;
    State s = backward_.empty() ? forward_.front() : backward_.back();
    while (lo() > downto) {
        s = spec_->step_dual(s, backward_rng_.uniform());
        backward_.push_back(s);
    }
}

ForwardWalker::ForwardWalker(const ChainSpec& spec, State origin, std::uint64_t seed, std::uint64_t replica,
                             std::size_t history)
    : spec_(&spec),
      seed_(seed),
      replica_(replica),
      ring_(history == 0 ? 1 : history),
      rng_(seed, replica, Substream::Forward) {
    if (!spec.contains(origin)) throw Error(ErrorCode::UnknownState, "origin state not in chain");
    ring_[0] = origin;
}

State ForwardWalker::extend_to(std::int64_t n) {
    const auto size = static_cast<std::int64_t>(ring_.size());
    if (n <= hi_ - size || n < 0) {
        throw Error(ErrorCode::WindowNotMaterialized, "index " + std::to_string(n) + " no longer retained");
    }
    while (hi_ < n) {
        const State next = spec_->step(ring_[static_cast<std::size_t>(hi_ % size)], rng_.uniform());
        ++hi_;
        ring_[static_cast<std::size_t>(hi_ % size)] = next;
    }
    return ring_[static_cast<std::size_t>(n % size)];
}

} // namespace skembed
