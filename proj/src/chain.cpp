#include "skembed/chain.hpp"

#include "skembed/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <queue>

namespace skembed {

std::string_view to_string(ChainKind kind) noexcept {
    switch (kind) {
    case ChainKind::FiniteMatrix: return "FiniteMatrix";
    case ChainKind::IidCategorical: return "IidCategorical";
    case ChainKind::SrwZ: return "SrwZ";
    case ChainKind::SrwZ2: return "SrwZ2";
    }
    return "Unknown";
}

void check_row_stochastic(const TransitionMatrix& p, Precision precision) {
    if (p.empty()) throw Error(ErrorCode::NonStochasticMatrix, "empty matrix");
    for (std::size_t r = 0; r < p.size(); ++r) {
        if (p[r].size() != p.size()) {
            throw Error(ErrorCode::NonStochasticMatrix, "row " + std::to_string(r) + " has " +
                                                            std::to_string(p[r].size()) + " entries, expected " +
                                                            std::to_string(p.size()));
        }
        Rational sum = 0;
        for (const auto& x : p[r]) {
            if (x < 0) throw Error(ErrorCode::NonStochasticMatrix, "negative entry in row " + std::to_string(r));
            sum += x;
        }
        const bool ok = precision == Precision::Exact ? sum == 1 : std::abs(to_double(sum - 1)) <= 1e-12;
        if (!ok) {
            throw Error(ErrorCode::NonStochasticMatrix,
                        "row " + std::to_string(r) + " sums to " + to_string(sum));
        }
    }
}

bool is_irreducible(const TransitionMatrix& p) {
    const std::size_t n = p.size();
    auto reaches_all = [&](bool transposed) {
        std::vector<char> seen(n, 0);
        std::queue<std::size_t> queue;
        queue.push(0);
        seen[0] = 1;
        std::size_t count = 1;
        while (!queue.empty()) {
            const std::size_t a = queue.front();
            queue.pop();
            for (std::size_t b = 0; b < n; ++b) {
                const Rational& w = transposed ? p[b][a] : p[a][b];
                if (w > 0 && !seen[b]) {
                    seen[b] = 1;
                    ++count;
                    queue.push(b);
                }
            }
        }
        return count == n;
    };
    return reaches_all(false) && reaches_all(true);
}

std::vector<Rational> stationary_measure(const TransitionMatrix& p) {
    check_row_stochastic(p, Precision::Exact);
    if (!is_irreducible(p)) throw Error(ErrorCode::NotIrreducible, "positive-transition graph is not strongly connected");

    // Solve m (P - I) = 0 with sum(m) = 1: rows of the system are the columns of
    // P - I, the last one replaced by the normalisation.
    const std::size_t n = p.size();
    std::vector<std::vector<Rational>> a(n, std::vector<Rational>(n + 1));
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) a[j][i] = p[i][j] - (i == j ? 1 : 0);
    }
    for (std::size_t i = 0; i < n; ++i) a[n - 1][i] = 1;
    a[n - 1][n] = 1;

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        while (pivot < n && a[pivot][col] == 0) ++pivot;
        if (pivot == n) throw Error(ErrorCode::NotIrreducible, "singular stationarity system");
        std::swap(a[pivot], a[col]);
        const Rational inv = 1 / a[col][col];
        for (std::size_t k = col; k <= n; ++k) a[col][k] *= inv;
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || a[r][col] == 0) continue;
            const Rational f = a[r][col];
            for (std::size_t k = col; k <= n; ++k) a[r][k] -= f * a[col][k];
        }
    }
    std::vector<Rational> m(n);
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = a[i][n];
        if (m[i] <= 0) throw Error(ErrorCode::NotIrreducible, "non-positive stationary weight");
    }
    return m;
}

TransitionMatrix dual_matrix(const TransitionMatrix& p, const std::vector<Rational>& m) {
    const std::size_t n = p.size();
    TransitionMatrix d(n, std::vector<Rational>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) d[i][j] = m[j] / m[i] * p[j][i];
    }
    return d;
}

std::vector<ChainSpec::SamplingRow> ChainSpec::sampling_rows(const TransitionMatrix& p) {
    std::vector<SamplingRow> rows(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        Rational cumulative = 0;
        for (std::size_t j = 0; j < p.size(); ++j) {
            if (p[i][j] == 0) continue;
            cumulative += p[i][j];
            rows[i].targets.push_back(static_cast<State>(j));
            rows[i].cdf.push_back(to_double(cumulative));
        }
        rows[i].cdf.back() = 1.0;
    }
    return rows;
}

State ChainSpec::draw(const SamplingRow& row, double u) noexcept {
    std::size_t k = 0;
    while (u >= row.cdf[k]) ++k;
    return row.targets[k];
}

void ChainSpec::build_finite(TransitionMatrix p) {
    if (labels_.size() != p.size()) {
        throw Error(ErrorCode::NonStochasticMatrix, "label count does not match matrix size");
    }
    check_row_stochastic(p, precision_);
    if (precision_ == Precision::Float) {
        for (auto& row : p) {
            Rational sum = 0;
            for (const auto& x : row) sum += x;
            for (auto& x : row) x /= sum;
        }
    }
    stationary_ = stationary_measure(p);
    dual_matrix_ = dual_matrix(p, stationary_);
    matrix_ = std::move(p);
    forward_rows_ = sampling_rows(matrix_);
    dual_rows_ = sampling_rows(dual_matrix_);
}

ChainSpec ChainSpec::finite_matrix(std::vector<std::string> labels, TransitionMatrix p, Precision precision) {
    ChainSpec spec;
    spec.kind_ = ChainKind::FiniteMatrix;
    spec.precision_ = precision;
    spec.labels_ = std::move(labels);
    spec.build_finite(std::move(p));
    return spec;
}

ChainSpec ChainSpec::iid_categorical(std::vector<std::string> labels, std::vector<Rational> weights,
                                     Precision precision) {
    if (labels.size() != weights.size()) throw Error(ErrorCode::NonStochasticMatrix, "label/weight count mismatch");
    for (const auto& w : weights) {
        if (w <= 0) throw Error(ErrorCode::NotIrreducible, "category weights must be positive");
    }
    ChainSpec spec;
    spec.kind_ = ChainKind::IidCategorical;
    spec.precision_ = precision;
    spec.labels_ = std::move(labels);
    spec.build_finite(TransitionMatrix(weights.size(), weights));
    spec.weights_ = spec.matrix_.front();
    return spec;
}

ChainSpec ChainSpec::srw_z() {
    ChainSpec spec;
    spec.kind_ = ChainKind::SrwZ;
    return spec;
}

ChainSpec ChainSpec::srw_z2() {
    ChainSpec spec;
    spec.kind_ = ChainKind::SrwZ2;
    return spec;
}

ChainSpec ChainSpec::coin(const Rational& p_head) {
    return iid_categorical({"tail", "head"}, {1 - p_head, p_head});
}

ChainSpec ChainSpec::coin_pattern(const Rational& p) {
    const Rational q = 1 - p;
    return finite_matrix({"tail/tail", "tail/head", "head/tail", "head/head"},
                         {{q, p, 0, 0}, {0, 0, q, p}, {q, p, 0, 0}, {0, 0, q, p}});
}

ChainSpec ChainSpec::three_state(const Rational& p) {
    return finite_matrix({"1", "2", "3"}, {{0, 1, 0}, {1 - p, 0, p}, {0, 1, 0}});
}

std::string ChainSpec::label(State s) const {
    switch (kind_) {
    case ChainKind::SrwZ: return std::to_string(s);
    case ChainKind::SrwZ2: return std::to_string(z2_x(s)) + "," + std::to_string(z2_y(s));
    default:
        if (!contains(s)) throw Error(ErrorCode::UnknownState, "state index " + std::to_string(s));
        return labels_[static_cast<std::size_t>(s)];
    }
}

namespace {

bool parse_int(std::string_view text, std::int64_t& out) {
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && ptr == text.data() + text.size() && !text.empty();
}

} // namespace

State ChainSpec::state(std::string_view text) const {
    switch (kind_) {
    case ChainKind::SrwZ: {
        std::int64_t v = 0;
        if (!parse_int(text, v)) throw Error(ErrorCode::UnknownState, "'" + std::string(text) + "' is not a site of Z");
        return v;
    }
    case ChainKind::SrwZ2: {
        const auto comma = text.find(',');
        std::int64_t x = 0;
        std::int64_t y = 0;
        if (comma == std::string_view::npos || !parse_int(text.substr(0, comma), x) ||
            !parse_int(text.substr(comma + 1), y) || x != static_cast<std::int32_t>(x) ||
            y != static_cast<std::int32_t>(y)) {
            throw Error(ErrorCode::UnknownState, "'" + std::string(text) + "' is not a site of Z^2 (expected x,y)");
        }
        return encode_z2(static_cast<std::int32_t>(x), static_cast<std::int32_t>(y));
    }
    default: {
        const auto it = std::find(labels_.begin(), labels_.end(), text);
        if (it == labels_.end()) throw Error(ErrorCode::UnknownState, "no state labelled '" + std::string(text) + "'");
        return static_cast<State>(it - labels_.begin());
    }
    }
}

bool ChainSpec::contains(State s) const noexcept {
    if (is_lattice()) return true;
    return s >= 0 && static_cast<std::size_t>(s) < labels_.size();
}

Rational ChainSpec::stationary(State s) const {
    if (is_lattice()) return 1;
    if (!contains(s)) throw Error(ErrorCode::UnknownState, "state index " + std::to_string(s));
    return stationary_[static_cast<std::size_t>(s)];
}

Rational ChainSpec::transition(State from, State to) const {
    switch (kind_) {
    case ChainKind::SrwZ: return (from - to == 1 || to - from == 1) ? Rational(1, 2) : Rational(0);
    case ChainKind::SrwZ2: {
        const std::int64_t dx = std::int64_t{z2_x(to)} - z2_x(from);
        const std::int64_t dy = std::int64_t{z2_y(to)} - z2_y(from);
        return std::abs(dx) + std::abs(dy) == 1 ? Rational(1, 4) : Rational(0);
    }
    default:
        if (!contains(from) || !contains(to)) throw Error(ErrorCode::UnknownState, "state outside chain");
        return matrix_[static_cast<std::size_t>(from)][static_cast<std::size_t>(to)];
    }
}

double ChainSpec::transition_probability(State from, State to) const { return to_double(transition(from, to)); }

double ChainSpec::dual_probability(State from, State to) const {
    if (is_lattice()) return transition_probability(from, to);
    if (!contains(from) || !contains(to)) throw Error(ErrorCode::UnknownState, "state outside chain");
    return to_double(dual_matrix_[static_cast<std::size_t>(from)][static_cast<std::size_t>(to)]);
}

std::vector<State> ChainSpec::successors(State s) const {
    switch (kind_) {
    case ChainKind::SrwZ: return {s - 1, s + 1};
    case ChainKind::SrwZ2: {
        const auto x = z2_x(s);
        const auto y = z2_y(s);
        return {encode_z2(x + 1, y), encode_z2(x - 1, y), encode_z2(x, y + 1), encode_z2(x, y - 1)};
    }
    default:
        if (!contains(s)) throw Error(ErrorCode::UnknownState, "state index " + std::to_string(s));
        return forward_rows_[static_cast<std::size_t>(s)].targets;
    }
}

std::vector<State> ChainSpec::dual_successors(State s) const {
    if (is_lattice()) return successors(s);
    if (!contains(s)) throw Error(ErrorCode::UnknownState, "state index " + std::to_string(s));
    return dual_rows_[static_cast<std::size_t>(s)].targets;
}

State ChainSpec::lattice_step(State from, double u) const noexcept {
    if (kind_ == ChainKind::SrwZ) return u < 0.5 ? from - 1 : from + 1;
    const auto x = z2_x(from);
    const auto y = z2_y(from);
    if (u < 0.25) return encode_z2(x + 1, y);
    if (u < 0.5) return encode_z2(x - 1, y);
    if (u < 0.75) return encode_z2(x, y + 1);
    return encode_z2(x, y - 1);
}

State ChainSpec::step(State from, double u) const noexcept {
    if (is_lattice()) return lattice_step(from, u);
    return draw(forward_rows_[static_cast<std::size_t>(from)], u);
}

State ChainSpec::step_dual(State from, double u) const noexcept {
    // Both lattice walks are symmetric with m = 1, hence self-dual.
    if (is_lattice()) return lattice_step(from, u);
    return draw(dual_rows_[static_cast<std::size_t>(from)], u);
}

ChainSpec ChainSpec::dual() const {
    ChainSpec d = *this;
    if (is_finite()) {
        std::swap(d.matrix_, d.dual_matrix_);
        std::swap(d.forward_rows_, d.dual_rows_);
        if (kind_ == ChainKind::IidCategorical) d.weights_ = d.matrix_.front();
    }
    return d;
}

bool operator==(const ChainSpec& a, const ChainSpec& b) {
    return a.kind_ == b.kind_ && a.labels_ == b.labels_ && a.matrix_ == b.matrix_ &&
           a.stationary_ == b.stationary_;
}

} // namespace skembed
