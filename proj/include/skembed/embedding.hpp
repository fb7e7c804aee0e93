#pragma once

#include "skembed/chain.hpp"
#include "skembed/error.hpp"
#include "skembed/local_time.hpp"
#include "skembed/rng.hpp"
#include "skembed/trajectory.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace skembed {

enum class FeasibilityReason { AllInteger, NonIntegerAt, TargetChargesStartRequiresDirac };
std::string_view to_string(FeasibilityReason reason) noexcept;

struct WitnessEntry {
    State state;
    Rational value; // m_i nu_j / m_j
    bool integer;
};

struct FeasibilityVerdict {
    bool feasible = false;
    FeasibilityReason reason = FeasibilityReason::AllInteger;
    std::optional<State> at; // first offending state for NonIntegerAt
    std::vector<WitnessEntry> witness;
    std::vector<std::string> warnings;
};

/// Exact integrality test on m_i nu_j / m_j. When nu_i > 0 the only feasible
/// target is delta_i.
FeasibilityVerdict check_feasibility(const ChainSpec& spec, State i, const TargetMeasure& nu);

/// Start state, target and the derived ball weights, bundled for the solvers.
class EmbeddingProblem {
public:
    EmbeddingProblem(const ChainSpec& spec, State i, TargetMeasure nu);

    const ChainSpec& spec() const noexcept { return *spec_; }
    State start() const noexcept { return start_; }
    const TargetMeasure& target() const noexcept { return nu_; }
    const FeasibilityVerdict& verdict() const noexcept { return verdict_; }
    const BallRatios& ratios() const noexcept { return ratios_; }
    bool charges_start() const { return nu_.weight(start_) > 0; }
    /// nu = delta_i: handled by the r-th visit family.
    bool is_start_dirac() const { return nu_.is_dirac() && charges_start(); }

    /// Ball weights for the same target seen from another start state.
    BallRatios ratios_from(State s) const { return BallRatios(*spec_, s, nu_); }

private:
    const ChainSpec* spec_;
    State start_;
    TargetMeasure nu_;
    FeasibilityVerdict verdict_;
    BallRatios ratios_;
};

enum class SolverKind { TStar, TRand, TVisit, Composite, Mixture, Delayed };

/// Solver selection. Mixture flips a fair auxiliary coin between T* and the
/// composite time; Delayed is the naive "wait one step, then use the rule of
/// the state reached" strategy, kept only as a negative control.
struct SolverSpec {
    SolverKind kind = SolverKind::TStar;
    std::int64_t visits = 1; // r for TVisit

    std::string name() const;
    /// "tstar", "trand", "tvisit", "tvisit:3", "composite", "mixture", "delayed".
    static SolverSpec parse(std::string_view text);
    friend bool operator==(const SolverSpec&, const SolverSpec&) = default;
};

struct StoppingResult {
    std::int64_t time = 0; // equals the cap when censored
    bool censored = false;
    std::string solver;
    std::optional<double> u;      // TRand draw / mixture coin
    std::int64_t steps_scanned = 0;
    std::uint64_t seed = 0;
    std::uint64_t replica = 0;
};

struct ScanOutcome {
    std::int64_t time;
    bool found;
    std::int64_t scanned;
};

/// First n in [start, last] with D([start, n]) <= threshold, where D is the
/// scaled white-minus-coloured ball count. Path needs `State extend_to(n)`.
template <class Path>
ScanOutcome scan_deficit(Path& path, const BallRatios& ratios, std::int64_t start, std::int64_t threshold,
                         std::int64_t last) {
    std::int64_t deficit = 0;
    for (std::int64_t n = start; n <= last; ++n) {
        deficit += ratios.step(path.extend_to(n));
        if (deficit <= threshold) return {n, true, n - start + 1};
    }
    return {last, false, last >= start ? last - start + 1 : 0};
}

/// First n in [start, last] with X_n = s.
template <class Path>
ScanOutcome scan_visit(Path& path, State s, std::int64_t start, std::int64_t last) {
    for (std::int64_t n = start; n <= last; ++n) {
        if (path.extend_to(n) == s) return {n, true, n - start + 1};
    }
    return {last, false, last >= start ? last - start + 1 : 0};
}

namespace detail {

inline void require_tstar(const EmbeddingProblem& pb) {
    if (pb.charges_start()) throw Error(ErrorCode::TargetChargesStart, "T* needs nu_i = 0");
    if (!pb.verdict().feasible) throw Error(ErrorCode::InfeasibleTarget, "integrality condition fails");
}

template <class Path>
StoppingResult finish(const Path& path, std::string solver, const ScanOutcome& s) {
    StoppingResult r;
    r.time = s.time;
    r.censored = !s.found;
    r.solver = std::move(solver);
    r.steps_scanned = s.scanned;
    r.seed = path.seed();
    r.replica = path.replica();
    return r;
}

template <class Path>
StoppingResult composite_from(Path& path, const EmbeddingProblem& pb, std::int64_t cap) {
    const ScanOutcome first = scan_visit(path, pb.start(), 1, cap);
    if (!first.found) return finish(path, "composite", first);
    ScanOutcome second = scan_deficit(path, pb.ratios(), first.time, 0, cap);
    second.scanned += first.scanned;
    return finish(path, "composite", second);
}

} // namespace detail

/// T* = min{n >= 0 : L^i([0,n]) <= L^nu([0,n])}, scanned incrementally.
template <class Path>
StoppingResult solve_tstar(Path& path, const EmbeddingProblem& pb, std::int64_t cap) {
    detail::require_tstar(pb);
    return detail::finish(path, "tstar", scan_deficit(path, pb.ratios(), 0, 0, cap));
}

/// min{n : L^i - L^nu <= u / m_i on [0, n]}. On integral instances any
/// u in (0, 1) gives T*. The comparison is done on integers: with the ratios
/// scaled by q, the condition reads D_q <= floor(u q).
template <class Path>
StoppingResult solve_trand(Path& path, const EmbeddingProblem& pb, double u, std::int64_t cap) {
    if (pb.charges_start()) throw Error(ErrorCode::TargetChargesStart, "T_rand needs nu_i = 0");
    if (!(u >= 0.0 && u < 1.0)) throw Error(ErrorCode::InvalidArgument, "u must lie in [0, 1)");
    // u = k / 2^53 exactly, so floor(u q) is computed without rounding.
    mpz_class k(static_cast<unsigned long>(std::ldexp(u, 53)));
    k *= static_cast<long>(pb.ratios().scale());
    k >>= 53;
    const std::int64_t threshold = k.get_si();
    auto r = detail::finish(path, "trand", scan_deficit(path, pb.ratios(), 0, threshold, cap));
    r.u = u;
    return r;
}

/// Draws u from the replica's auxiliary stream, independent of the path.
template <class Path>
StoppingResult solve_trand(Path& path, const EmbeddingProblem& pb, std::int64_t cap) {
    CounterRng aux(path.seed(), path.replica(), Substream::Auxiliary);
    return solve_trand(path, pb, aux.uniform(), cap);
}

/// Time of the r-th visit to X_0 after time zero.
template <class Path>
StoppingResult solve_tvisit(Path& path, std::int64_t r, std::int64_t cap) {
    if (r < 1) throw Error(ErrorCode::InvalidArgument, "visit index must be positive");
    const State i = path.extend_to(0);
    ScanOutcome s{0, true, 0};
    for (std::int64_t k = 0; k < r && s.found; ++k) {
        const ScanOutcome next = scan_visit(path, i, s.time + 1, cap);
        s = {next.time, next.found, s.scanned + next.scanned};
    }
    return detail::finish(path, r == 1 ? "tvisit" : "tvisit:" + std::to_string(r), s);
}

/// T' = T_1 + T* after re-rooting at the first return T_1 to the start.
template <class Path>
StoppingResult solve_composite(Path& path, const EmbeddingProblem& pb, std::int64_t cap) {
    detail::require_tstar(pb);
    return detail::composite_from(path, pb, cap);
}

/// T* or T' with probability 1/2 each, by an auxiliary coin.
template <class Path>
StoppingResult solve_mixture(Path& path, const EmbeddingProblem& pb, std::int64_t cap) {
    detail::require_tstar(pb);
    CounterRng aux(path.seed(), path.replica(), Substream::Auxiliary);
    const double coin = aux.uniform();
    auto r = coin < 0.5 ? detail::finish(path, "mixture", scan_deficit(path, pb.ratios(), 0, 0, cap))
                        : detail::composite_from(path, pb, cap);
    r.solver = "mixture";
    r.u = coin;
    return r;
}

/// Naive negative control: 1 + (T* of the rule for the state X_1) on the path
/// started at time 1. Not an unbiased shift in general.
template <class Path>
StoppingResult solve_delayed(Path& path, const EmbeddingProblem& pb, std::int64_t cap) {
    detail::require_tstar(pb);
    const State x1 = path.extend_to(1);
    if (pb.target().weight(x1) > 0) return detail::finish(path, "delayed", ScanOutcome{1, true, 2});
    const BallRatios ratios = pb.ratios_from(x1);
    ScanOutcome s = scan_deficit(path, ratios, 1, 0, cap);
    s.scanned += 1;
    return detail::finish(path, "delayed", s);
}

/// Dispatch. T* with nu = delta_i is routed to the first-visit time.
template <class Path>
StoppingResult solve(Path& path, const EmbeddingProblem& pb, const SolverSpec& solver, std::int64_t cap) {
    if (pb.is_start_dirac() && solver.kind != SolverKind::TVisit) {
        return solve_tvisit(path, 1, cap);
    }
    switch (solver.kind) {
    case SolverKind::TStar: return solve_tstar(path, pb, cap);
    case SolverKind::TRand: return solve_trand(path, pb, cap);
    case SolverKind::TVisit:
        if (!pb.is_start_dirac()) throw Error(ErrorCode::InvalidArgument, "tvisit needs the target delta_i");
        return solve_tvisit(path, solver.visits, cap);
    case SolverKind::Composite: return solve_composite(path, pb, cap);
    case SolverKind::Mixture: return solve_mixture(path, pb, cap);
    case SolverKind::Delayed: return solve_delayed(path, pb, cap);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown solver");
}

/// tau(k) for the white sites k of a materialised window; matches beyond
/// the window are listed in the frontier.
struct AllocationView {
    Window window;
    std::map<std::int64_t, std::int64_t> tau;
    std::vector<std::int64_t> frontier;

    friend bool operator==(const AllocationView&, const AllocationView&) = default;
};

/// tau(k) = min{n >= k : L^i([k,n]) <= L^nu([k,n])}, by the T* scanner.
AllocationView allocation_view(const Trajectory& traj, Window window, const EmbeddingProblem& pb);

} // namespace skembed
