#include "skembed/embedding.hpp"

#include <charconv>

namespace skembed {

std::string_view to_string(FeasibilityReason reason) noexcept {
    switch (reason) {
    case FeasibilityReason::AllInteger: return "AllInteger";
    case FeasibilityReason::NonIntegerAt: return "NonIntegerAt";
    case FeasibilityReason::TargetChargesStartRequiresDirac: return "TargetChargesStartRequiresDirac";
    }
    return "Unknown";
}

FeasibilityVerdict check_feasibility(const ChainSpec& spec, State i, const TargetMeasure& nu) {
    if (!spec.contains(i)) throw Error(ErrorCode::UnknownState, "start state not in chain");
    for (const auto& [j, w] : nu.weights()) {
        if (!spec.contains(j)) throw Error(ErrorCode::UnknownState, "target state not in chain");
    }
    const BallRatios ratios(spec, i, nu);
    FeasibilityVerdict v;
    v.warnings = ratios.warnings();
    for (const auto& [j, r] : ratios.ratios()) v.witness.push_back({j, r, is_integer(r)});

    if (nu.weight(i) > 0) {
        // i = j in the integrality condition gives nu_i in Z, so nu_i = 1.
        v.feasible = nu.is_dirac();
        v.reason = v.feasible ? FeasibilityReason::AllInteger : FeasibilityReason::TargetChargesStartRequiresDirac;
        if (!v.feasible) v.at = i;
        return v;
    }
    v.feasible = true;
    for (const auto& w : v.witness) {
        if (!w.integer) {
            v.feasible = false;
            v.reason = FeasibilityReason::NonIntegerAt;
            v.at = w.state;
            break;
        }
    }
    return v;
}

EmbeddingProblem::EmbeddingProblem(const ChainSpec& spec, State i, TargetMeasure nu)
    : spec_(&spec),
      start_(i),
      nu_(std::move(nu)),
      verdict_(check_feasibility(spec, i, nu_)),
      ratios_(spec, i, nu_) {}

std::string SolverSpec::name() const {
    switch (kind) {
    case SolverKind::TStar: return "tstar";
    case SolverKind::TRand: return "trand";
    case SolverKind::TVisit: return visits == 1 ? "tvisit" : "tvisit:" + std::to_string(visits);
    case SolverKind::Composite: return "composite";
    case SolverKind::Mixture: return "mixture";
    case SolverKind::Delayed: return "delayed";
    }
    return "unknown";
}

SolverSpec SolverSpec::parse(std::string_view text) {
    SolverSpec s;
    if (text == "tstar") return s;
    if (text == "trand") return {SolverKind::TRand, 1};
    if (text == "composite") return {SolverKind::Composite, 1};
    if (text == "mixture") return {SolverKind::Mixture, 1};
    if (text == "delayed") return {SolverKind::Delayed, 1};
    if (text.starts_with("tvisit")) {
        s.kind = SolverKind::TVisit;
        if (text.size() == 6) return s;
        if (text[6] == ':') {
            const auto digits = text.substr(7);
            auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), s.visits);
            if (ec == std::errc() && ptr == digits.data() + digits.size() && s.visits >= 1) return s;
        }
    }
    throw Error(ErrorCode::InvalidConfig, "unknown solver '" + std::string(text) + "'");
}

namespace {

// Read-only view so the scanner never samples beyond the window.
struct FixedPath {
    const Trajectory& traj;
    State extend_to(std::int64_t n) const { return traj.at(n); }
};

} // namespace

AllocationView allocation_view(const Trajectory& traj, Window window, const EmbeddingProblem& pb) {
    detail::require_tstar(pb);
    if (!traj.window().contains(window)) throw Error(ErrorCode::WindowNotMaterialized, "allocation window not sampled");
    AllocationView view;
    view.window = window;
    FixedPath path{traj};
    for (std::int64_t k = window.lo; k <= window.hi; ++k) {
        if (traj.at(k) != pb.start()) continue;
        const ScanOutcome s = scan_deficit(path, pb.ratios(), k, 0, window.hi);
        if (s.found) {
            view.tau.emplace(k, s.time);
        } else {
            view.frontier.push_back(k);
        }
    }
    return view;
}

} // namespace skembed
