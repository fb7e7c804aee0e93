#pragma once

#include "skembed/embedding.hpp"
#include "skembed/green.hpp"
#include "skembed/stats.hpp"
#include "skembed/transport.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace skembed {

/// Replica fan-out parameters shared by every estimator.
struct RunOptions {
    std::uint64_t seed = 0;
    std::uint64_t replicas = 1000;
    std::int64_t cap = 100'000;
    int threads = 0;      // 0: OpenMP default
    bool serial = false;  // force the serial reference path
};

struct SampleRecord {
    std::uint64_t replica = 0;
    std::int64_t time = 0;
    State landing = 0; // X_T, meaningless when censored
    bool censored = false;
};

/// One stopping time per replica. Uses the lean forward walker, so the path is
/// never stored.
std::vector<SampleRecord> sample_times(const EmbeddingProblem& pb, const SolverSpec& solver, const RunOptions& run);

/// Stopping time of one replica on a fixture path (for regression inputs).
SampleRecord sample_fixture(const EmbeddingProblem& pb, const SolverSpec& solver, const std::vector<State>& values,
                            std::size_t origin_index, std::uint64_t seed, std::int64_t cap);

// ---------------------------------------------------------------- tails

struct TailOptions {
    std::int64_t fit_lo = 100;
    std::int64_t fit_hi = 0;  // 0: cap / 10
    int per_decade = 10;
    std::size_t blocks = 100;
    std::size_t resamples = 200;
    /// Throw ExcessCensoring when more than this fraction is censored.
    double max_censored = 0.5;
};

struct TailEstimate {
    std::vector<std::int64_t> grid;
    std::vector<double> survival; // P(T > n) on the grid
    std::int64_t fit_lo = 0;
    std::int64_t fit_hi = 0;
    LineFit fit;
    Interval slope_ci;
    std::int64_t cap = 0;
    std::uint64_t replicas = 0;
    std::uint64_t censored = 0;
    std::uint64_t seed = 0;
};

/// Survival curve on a geometric grid and a weighted log-log fit over
/// [fit_lo, fit_hi]; weights are inverse block-bootstrap variances of
/// log P(T > n), and the slope interval is the bootstrap percentile interval.
/// Censored replicas enter with time = cap; the curve stops below the cap.
/// With fewer than two usable fit points the slope and its interval are NaN.
TailEstimate tail_from_times(const std::vector<std::int64_t>& times, std::uint64_t censored, std::int64_t cap,
                             std::uint64_t seed, const TailOptions& options = {});

TailEstimate estimate_tail(const EmbeddingProblem& pb, const SolverSpec& solver, const RunOptions& run,
                           const TailOptions& options = {});

// ------------------------------------------------------- first passage

/// Integer increment law for a skip-free walk.
struct IncrementLaw {
    std::map<std::int64_t, Rational> probabilities;

    static IncrementLaw fair_pm1();
    static IncrementLaw from_strings(const std::map<std::string, std::string>& table);
    /// Throws InvalidArgument unless the law is a probability law.
    void validate() const;
    bool skip_free() const;
    Rational mean() const;
};

/// P(N = n) for n = 1..n_max, N = min{n >= 1 : S_n <= 0}, S_0 = 0, exactly.
std::vector<Rational> first_passage_exact(const IncrementLaw& law, std::int64_t n_max);

/// Monte Carlo first passage of the walk with the given increments.
TailEstimate first_passage_oracle(const IncrementLaw& law, const RunOptions& run, const TailOptions& options = {});

struct ChainPassageReport {
    TailEstimate tail;
    /// Replicas where both N and T* were found and m_i L^i([0, T*]) >= N - 1 held.
    std::uint64_t checked = 0;
};

/// The walk xi_k = 1 - m_i L^nu([T_{k-1}, T_k)) over successive return blocks
/// to the start state. For every replica the ball count bound against T* on
/// the same path is asserted (std::logic_error on violation).
ChainPassageReport first_passage_oracle(const EmbeddingProblem& pb, const RunOptions& run,
                                        const TailOptions& options = {});

// ------------------------------------------------------------- moments

enum class MomentFunctional { RawPower, GreenPower };
std::string_view to_string(MomentFunctional f) noexcept;

struct MomentOptions {
    double growth_threshold = 0.20;
    double stability_threshold = 0.05;
    double max_censored = 0.5;
};

struct MomentEstimate {
    double beta = 0.0;
    MomentFunctional functional = MomentFunctional::RawPower;
    std::vector<std::uint64_t> sizes;  // N/4, N/2, N
    std::vector<double> means;
    std::vector<double> changes;       // relative change between consecutive means
    bool divergent = false;            // every change > growth threshold
    bool finite = false;               // every |change| <= stability threshold
    bool lower_bound = false;          // censored replicas entered at the cap
    std::uint64_t censored = 0;
    std::int64_t cap = 0;
    std::uint64_t seed = 0;
};

/// Running means of f(T) over the first N/4, N/2 and N replicas, with
/// f = T^beta or a(T)^beta (a = a_ii).
MomentEstimate moment_from_times(const std::vector<std::int64_t>& times, std::uint64_t censored, double beta,
                                 MomentFunctional functional, const GreenCurve* green, const MomentOptions& options,
                                 std::int64_t cap, std::uint64_t seed);

std::vector<MomentEstimate> estimate_moments(const EmbeddingProblem& pb, const SolverSpec& solver,
                                             const std::vector<double>& betas, MomentFunctional functional,
                                             const RunOptions& run, const MomentOptions& options = {});

// ------------------------------------------------------- shifted law

struct ShiftedLawOptions {
    std::int64_t lags = 5;
    double alpha = 1e-3;
    double max_censored = 0.5;
};

struct LagTest {
    std::int64_t lag = 0; // positive: forward, negative: backward
    ChiSquareResult result;
};

struct ShiftedLawReport {
    std::string solver;
    std::uint64_t replicas = 0;
    std::uint64_t censored = 0;
    std::int64_t cap = 0;
    std::uint64_t seed = 0;
    std::map<State, std::int64_t> landing_counts;
    ChiSquareResult marginal;
    /// Dirac target: every uncensored X_T is the target state.
    std::optional<bool> marginal_exact;
    std::vector<LagTest> forward;
    std::vector<LagTest> backward;
    ChiSquareResult forward_total;
    ChiSquareResult backward_total;
    double alpha = 1e-3;

    bool marginal_passed() const;
    bool forward_passed() const { return forward_total.p_value > alpha; }
    bool backward_passed() const { return backward_total.p_value > alpha; }
    bool passed() const { return marginal_passed() && forward_passed() && backward_passed(); }
};

/// Tallies X_T and the transitions of (X_{T+n}) for |n| <= K over the
/// replicas, and tests them against nu, p (forward lags) and p* (backward
/// lags) by chi-square; per-lag statistics are summed over lags.
ShiftedLawReport verify_shifted_law(const EmbeddingProblem& pb, const SolverSpec& solver, const RunOptions& run,
                                    const ShiftedLawOptions& options = {});

// ----------------------------------------------------------- optimality

struct CompareOptions {
    bool validate = true;
    ShiftedLawOptions validation;
    std::size_t blocks = 100;
    std::size_t resamples = 1000;
    double level = 0.95;
};

struct CostComparison {
    std::string psi;
    double mean_tstar = 0.0;
    double mean_alternative = 0.0;
    double mean_difference = 0.0;  // alternative - T*
    Interval ci;
    bool consistent = false;        // ci.hi >= 0
    bool excludes_negative = false; // ci.lo >= 0
};

struct ComparisonArm {
    std::string solver;
    std::uint64_t censored = 0;
    std::optional<ShiftedLawReport> validation;
    std::vector<CostComparison> costs;
};

struct ComparisonReport {
    std::uint64_t replicas = 0;
    std::int64_t cap = 0;
    std::uint64_t seed = 0;
    std::uint64_t censored_tstar = 0;
    std::vector<ComparisonArm> arms;
};

/// Paired comparison of E psi(T_alt) against E psi(T*) on the same paths,
/// using min(psi(T), psi(cap)) for both arms. Alternatives are checked with
/// verify_shifted_law first; a failing one raises InvalidAlternative.
ComparisonReport compare_optimality(const EmbeddingProblem& pb, const std::vector<SolverSpec>& alternatives,
                                    const std::vector<CostFunction>& psis, const RunOptions& run,
                                    const CompareOptions& options = {});

} // namespace skembed
