#pragma once

#include "skembed/chain.hpp"
#include "skembed/trajectory.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace skembed {

/// Probability measure nu on the states of a chain, finitely supported.
class TargetMeasure {
public:
    TargetMeasure() = default;

    /// Throws UnknownState for labels outside the chain and InvalidMeasure for
    /// negative weights or a total other than 1. With Precision::Float the
    /// total may be off by 1e-12 and is then renormalised exactly.
    static TargetMeasure from_weights(const ChainSpec& spec, std::map<State, Rational> weights,
                                      Precision precision = Precision::Exact);
    static TargetMeasure dirac(const ChainSpec& spec, State s);
    /// nu = m, for finite chains only.
    static TargetMeasure stationary(const ChainSpec& spec);

    Rational weight(State s) const;
    /// States with positive weight, ascending.
    std::vector<State> support() const;
    const std::map<State, Rational>& weights() const noexcept { return weights_; }
    Precision precision() const noexcept { return precision_; }
    bool is_dirac() const noexcept { return weights_.size() == 1; }

    friend bool operator==(const TargetMeasure&, const TargetMeasure&) = default;

private:
    std::map<State, Rational> weights_; // positive entries only
    Precision precision_ = Precision::Exact;
};

/// Visit counts of each state over a window, with L^j = c_j / m_j.
class LocalTimeLedger {
public:
    LocalTimeLedger(const ChainSpec& spec, Window window) : spec_(&spec), window_(window) {}

    Window window() const noexcept { return window_; }
    std::int64_t count(State j) const;
    const std::map<State, std::int64_t>& counts() const noexcept { return counts_; }
    std::int64_t total() const noexcept;
    Rational local_time(State j) const;

    void add_visit(State j, std::int64_t times = 1) { counts_[j] += times; }

    /// Merge with a ledger of a disjoint, adjacent window. Throws
    /// InvalidArgument if the windows overlap or leave a gap.
    LocalTimeLedger& operator+=(const LocalTimeLedger& other);
    friend bool operator==(const LocalTimeLedger& a, const LocalTimeLedger& b) {
        return a.window_ == b.window_ && a.counts_ == b.counts_;
    }

private:
    const ChainSpec* spec_;
    Window window_;
    std::map<State, std::int64_t> counts_;
};

/// Throws WindowNotMaterialized unless `window` lies inside traj.window().
LocalTimeLedger ledger(const Trajectory& traj, Window window);

/// sum_j nu_j L^j over the ledger's window.
Rational weighted_local_time(const LocalTimeLedger& ledger, const TargetMeasure& nu);

/// Per-state ball weights for start i and target nu: one white ball at i,
/// (m_i / m_j) nu_j coloured balls at j. `scale` is the least common
/// denominator q of the ratios, so q * ratio is an integer everywhere and the
/// scanners can run on integers even when the ratios are fractional.
class BallRatios {
public:
    BallRatios(const ChainSpec& spec, State white, const TargetMeasure& nu);

    State white() const noexcept { return white_; }
    std::int64_t scale() const noexcept { return scale_; }
    /// True when every ratio is an integer (then scale() == 1).
    bool integral() const noexcept { return scale_ == 1; }
    const std::map<State, Rational>& ratios() const noexcept { return ratios_; }
    Rational ratio(State j) const;
    /// Coloured ball count at a j-site; requires integral().
    std::int64_t coloured(State j) const;
    /// Roundings applied to float-sourced ratios within 1e-9 of an integer.
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

    /// scale * (1{s = white} - ratio(s)): the change of the scaled deficit
    /// m_i (L^i - L^nu) when the path visits s.
    std::int64_t step(State s) const noexcept {
        if (!dense_.empty()) {
            return s >= 0 && static_cast<std::size_t>(s) < dense_.size() ? dense_[static_cast<std::size_t>(s)] : 0;
        }
        for (const auto& [state, w] : sparse_) {
            if (state == s) return w;
        }
        return 0;
    }

private:
    State white_;
    std::int64_t scale_ = 1;
    std::map<State, Rational> ratios_;
    std::vector<std::string> warnings_;
    std::vector<std::int64_t> dense_;                       // finite chains
    std::vector<std::pair<State, std::int64_t>> sparse_;    // lattices
};

struct BallSite {
    bool white = false;
    std::int64_t coloured = 0;
    State colour = 0;

    /// white - coloured at this site.
    std::int64_t deficit() const noexcept { return (white ? 1 : 0) - coloured; }
    bool occupied() const noexcept { return white || coloured > 0; }
    friend bool operator==(const BallSite&, const BallSite&) = default;
};

/// White / coloured ball view of a window.
class BallConfig {
public:
    BallConfig(Window window, std::vector<BallSite> sites);

    Window window() const noexcept { return window_; }
    const BallSite& at(std::int64_t k) const;
    const std::vector<BallSite>& sites() const noexcept { return sites_; }
    std::int64_t whites() const noexcept;
    std::int64_t coloured() const noexcept;
    friend bool operator==(const BallConfig&, const BallConfig&) = default;

private:
    Window window_;
    std::vector<BallSite> sites_;
};

/// Throws TargetChargesStart if nu_i > 0, NonIntegerBallCount if some ratio
/// is fractional, WindowNotMaterialized if the window is not sampled.
BallConfig balls(const Trajectory& traj, Window window, State i, const TargetMeasure& nu);

} // namespace skembed
