#pragma once

#include "skembed/rational.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace skembed {

/// A state of a chain. Finite chains use the row index; SrwZ uses the lattice
/// position; SrwZ2 packs (x, y) with encode_z2.
using State = std::int64_t;

enum class ChainKind { FiniteMatrix, IidCategorical, SrwZ, SrwZ2 };

/// Whether the transition entries were given as exact rationals or as floats.
enum class Precision { Exact, Float };

using TransitionMatrix = std::vector<std::vector<Rational>>;

std::string_view to_string(ChainKind kind) noexcept;

constexpr State encode_z2(std::int32_t x, std::int32_t y) noexcept {
    return static_cast<State>((static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32) |
                              static_cast<std::uint32_t>(y));
}
constexpr std::int32_t z2_x(State s) noexcept { return static_cast<std::int32_t>(s >> 32); }
constexpr std::int32_t z2_y(State s) noexcept {
    return static_cast<std::int32_t>(static_cast<std::uint32_t>(s & 0xFFFFFFFFULL));
}

/// Throws NonStochasticMatrix unless every row is non-negative and sums to 1
/// (exactly, or within 1e-12 for Precision::Float).
void check_row_stochastic(const TransitionMatrix& p, Precision precision);

/// Strong connectivity of the positive-transition digraph.
bool is_irreducible(const TransitionMatrix& p);

/// Normalised stationary vector of an irreducible stochastic matrix, by
/// Gaussian elimination over the rationals.
std::vector<Rational> stationary_measure(const TransitionMatrix& p);

/// p*_ij = (m_j / m_i) p_ji.
TransitionMatrix dual_matrix(const TransitionMatrix& p, const std::vector<Rational>& m);

/// Immutable chain description: kernel, stationary measure and the sampling
/// tables of both the forward and the dual kernel.
class ChainSpec {
public:
    static ChainSpec finite_matrix(std::vector<std::string> labels, TransitionMatrix p,
                                   Precision precision = Precision::Exact);
    static ChainSpec iid_categorical(std::vector<std::string> labels, std::vector<Rational> weights,
                                     Precision precision = Precision::Exact);
    static ChainSpec srw_z();
    static ChainSpec srw_z2();

    /// i.i.d. coin with states {tail, head} and P(head) = p.
    static ChainSpec coin(const Rational& p_head);
    /// Pairs of successive coins: tail/tail, tail/head, head/tail, head/head.
    static ChainSpec coin_pattern(const Rational& p_head);
    /// p12 = p32 = 1, p21 = 1 - p, p23 = p; states labelled "1", "2", "3".
    static ChainSpec three_state(const Rational& p);

    ChainKind kind() const noexcept { return kind_; }
    bool is_finite() const noexcept { return kind_ == ChainKind::FiniteMatrix || kind_ == ChainKind::IidCategorical; }
    bool is_lattice() const noexcept { return !is_finite(); }
    Precision precision() const noexcept { return precision_; }
    std::size_t num_states() const noexcept { return labels_.size(); }

    std::string label(State s) const;
    State state(std::string_view label) const;
    bool contains(State s) const noexcept;
    const std::vector<std::string>& labels() const noexcept { return labels_; }

    /// m_s; identically 1 on the lattices.
    Rational stationary(State s) const;
    const std::vector<Rational>& stationary() const noexcept { return stationary_; }

    const TransitionMatrix& matrix() const noexcept { return matrix_; }
    const std::vector<Rational>& weights() const noexcept { return weights_; }

    Rational transition(State from, State to) const;
    double transition_probability(State from, State to) const;
    double dual_probability(State from, State to) const;

    /// States reachable in one forward (dual) step, in sampling order.
    std::vector<State> successors(State s) const;
    std::vector<State> dual_successors(State s) const;

    /// One draw of the forward (dual) kernel from `from` using u in [0, 1).
    State step(State from, double u) const noexcept;
    State step_dual(State from, double u) const noexcept;

    /// The time-reversed chain, in the same representation as this one.
    ChainSpec dual() const;

    friend bool operator==(const ChainSpec& a, const ChainSpec& b);

private:
    struct SamplingRow {
        std::vector<State> targets;
        std::vector<double> cdf;
    };

    ChainSpec() = default;
    void build_finite(TransitionMatrix p);
    static std::vector<SamplingRow> sampling_rows(const TransitionMatrix& p);
    static State draw(const SamplingRow& row, double u) noexcept;
    State lattice_step(State from, double u) const noexcept;

    ChainKind kind_ = ChainKind::FiniteMatrix;
    Precision precision_ = Precision::Exact;
    std::vector<std::string> labels_;
    TransitionMatrix matrix_;
    TransitionMatrix dual_matrix_;
    std::vector<Rational> weights_;
    std::vector<Rational> stationary_;
    std::vector<SamplingRow> forward_rows_;
    std::vector<SamplingRow> dual_rows_;
};

/// The dual (time-reversed) kernel of `spec` as a chain of the same kind.
inline ChainSpec dual_kernel(const ChainSpec& spec) { return spec.dual(); }

} // namespace skembed
