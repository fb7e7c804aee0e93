#pragma once

#include "skembed/embedding.hpp"
#include "skembed/local_time.hpp"
#include "skembed/trajectory.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace skembed {

/// Sparse transport weights theta(x, y) with exact rational entries, for the
/// source rows x in a finite window. Destinations may lie outside the window
/// (frontier); mass whose destination is beyond what has been sampled is kept
/// as "open" mass of its source.
class TransportRule {
public:
    explicit TransportRule(Window window) : window_(window) {}

    /// theta(x, x) = 1 for every x in the window.
    static TransportRule identity(Window window);
    /// Indicator rule of an allocation: white k -> tau(k), frontier whites
    /// open, every other site of the window fixed.
    static TransportRule from_allocation(const AllocationView& view, const BallConfig& balls);

    Window window() const noexcept { return window_; }
    Rational weight(std::int64_t x, std::int64_t y) const;
    /// Sets theta(x, y); zero erases. Requires x in the window.
    void set(std::int64_t x, std::int64_t y, const Rational& w);
    void add(std::int64_t x, std::int64_t y, const Rational& w) { set(x, y, weight(x, y) + w); }
    void set_open(std::int64_t x, const Rational& w);
    Rational open(std::int64_t x) const;

    const std::map<std::int64_t, Rational>& row(std::int64_t x) const;
    /// Sources with positive weight into y, ascending.
    std::vector<std::int64_t> sources(std::int64_t y) const;
    Rational row_sum(std::int64_t x) const;

    /// Some source sends mass outside the window or to an open destination.
    bool has_frontier() const;
    /// theta(x, y) = 0 whenever y < x.
    bool forward_only() const;
    /// Every row in the window sums to 1.
    bool rows_stochastic() const;

    const std::map<std::int64_t, std::map<std::int64_t, Rational>>& rows() const noexcept { return rows_; }
    const std::map<std::int64_t, Rational>& open_mass() const noexcept { return open_; }

    friend bool operator==(const TransportRule& a, const TransportRule& b) {
        return a.window_ == b.window_ && a.rows_ == b.rows_ && a.open_ == b.open_;
    }

private:
    Window window_;
    std::map<std::int64_t, std::map<std::int64_t, Rational>> rows_;
    std::map<std::int64_t, std::map<std::int64_t, Rational>> cols_;
    std::map<std::int64_t, Rational> open_;
};

struct BalanceReport {
    bool balanced = true;
    std::optional<std::int64_t> first_violation;
    Rational received;  // at the violating site, in white-ball units
    Rational expected;
};

/// Checks sum_z theta(z, {y}) L^i(z) = L^nu({y}) at every y of the window,
/// in ball units (m_i times both sides). Throws FrontierMassPresent if some
/// source of the window has mass leaving it.
BalanceReport verify_balance(const TransportRule& theta, const BallConfig& balls);
BalanceReport verify_balance(const TransportRule& theta, const Trajectory& traj, const EmbeddingProblem& pb,
                             Window window);

/// sum_k theta(k, site) L^mu(k). Throws FrontierMassPresent if open mass
/// from a site left of `site` could still land there.
Rational mass_received(const TransportRule& theta, const Trajectory& traj, const TargetMeasure& mu, std::int64_t site);

/// Round-based one-sided stable matching: in each round every white ball whose
/// next occupied site carries coloured balls is matched to it; matched balls
/// are removed and rounds repeat until nothing changes.
AllocationView greedy_match(const BallConfig& balls);

struct Crossing {
    std::int64_t x, u, v, y;
    friend bool operator==(const Crossing&, const Crossing&) = default;
    friend auto operator<=>(const Crossing&, const Crossing&) = default;
};

/// All x < u < v < y with theta(x, v) > 0 and theta(u, y) > 0, sorted.
std::vector<Crossing> find_crossings(const TransportRule& theta);

/// Moves delta = min(theta(x,v), theta(u,y)) onto (x,y) and (u,v).
/// Throws NotACrossing.
TransportRule repair_crossing(const TransportRule& theta, const Crossing& c);

/// Ordered sweep over the coloured sites of A: each coloured ball is paired
/// with the rightmost uncancelled white to its left in A, after repairing
/// every crossing of that pair. Afterwards no pair u, v in A is crossed.
TransportRule repair_all(const TransportRule& theta, const BallConfig& balls, Window a);

struct Excursion {
    Window interval;
    BallConfig balls;
};

/// Excursion [sigma_n, tau_n) around z from the deficit profile seen from z:
/// tau_n is the first white site at or after z where the deficit since z has
/// dropped to -n or below (value d), sigma_n the nearest site at or before z
/// with deficit -d over [sigma_n, z). Trailing empty sites are trimmed.
/// Extends the trajectory as needed; nullopt if more than `cap` sites would be
/// needed on either side.
std::optional<Excursion> find_excursion_around(Trajectory& traj, std::int64_t z, const EmbeddingProblem& pb,
                                               std::int64_t cap, std::int64_t level = 1);

using Real50 = boost::multiprecision::cpp_bin_float_50;

/// Non-negative, non-decreasing, concave psi on the integers, psi(n <= 0) = 0.
class CostFunction {
public:
    enum class Kind { Power, Log1p, CappedLinear };

    static CostFunction power(double beta);
    static CostFunction sqrt() { return power(0.5); }
    static CostFunction log1p();
    static CostFunction capped_linear(std::int64_t cap);
    /// "sqrt", "log1p", "power:0.3", "capped:100", "identity".
    static CostFunction parse(std::string_view text);

    Kind kind() const noexcept { return kind_; }
    std::string name() const;
    double operator()(std::int64_t n) const;
    Real50 precise(std::int64_t n) const;
    /// Exact value where psi is integer-valued (capped linear, power 1).
    std::optional<Rational> exact(std::int64_t n) const;

private:
    Kind kind_ = Kind::Power;
    double beta_ = 0.5;
    std::int64_t cap_ = 0;
};

/// A cost as exact coefficients c_d of psi(d): sum_d c_d psi(d).
struct CostValue {
    std::map<std::int64_t, Rational> coefficients;

    Real50 evaluate(const CostFunction& psi) const;
    friend CostValue operator-(const CostValue& a, const CostValue& b);
};

/// sum_{x in A, y} theta(x,y) psi(y-x) + sum_{x, y in A} theta(x,y) psi(y-x),
/// with psi(n <= 0) = 0. Throws FrontierMassPresent if a source in A has open
/// mass.
CostValue window_cost(const TransportRule& theta, Window a);
double window_cost(const TransportRule& theta, Window a, const CostFunction& psi);

/// Sign of sum_d c_d psi(d): exact when every coefficient vanishes or psi is
/// integer-valued, otherwise decided at 50 significant digits.
int compare_cost(const CostValue& lhs, const CostValue& rhs, const CostFunction& psi);

} // namespace skembed
