#include "skembed/transport.hpp"

#include "skembed/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace skembed {

namespace {

const std::map<std::int64_t, Rational> kEmptyRow;

} // namespace

TransportRule TransportRule::identity(Window window) {
    TransportRule t(window);
    for (std::int64_t x = window.lo; x <= window.hi; ++x) t.set(x, x, 1);
    return t;
}

TransportRule TransportRule::from_allocation(const AllocationView& view, const BallConfig& balls) {
    TransportRule t(balls.window());
    const Window w = balls.window();
    for (std::int64_t x = w.lo; x <= w.hi; ++x) {
        if (!balls.at(x).white) {
            t.set(x, x, 1);
        } else if (const auto it = view.tau.find(x); it != view.tau.end()) {
            t.set(x, it->second, 1);
        } else {
            t.set_open(x, 1);
        }
    }
    return t;
}

Rational TransportRule::weight(std::int64_t x, std::int64_t y) const {
    const auto r = rows_.find(x);
    if (r == rows_.end()) return 0;
    const auto e = r->second.find(y);
    return e == r->second.end() ? Rational(0) : e->second;
}

void TransportRule::set(std::int64_t x, std::int64_t y, const Rational& w) {
    if (!window_.contains(x)) throw Error(ErrorCode::InvalidArgument, "source " + std::to_string(x) + " outside rule window");
    if (w < 0) throw Error(ErrorCode::InvalidArgument, "negative transport weight");
    if (w == 0) {
        if (auto r = rows_.find(x); r != rows_.end()) {
            r->second.erase(y);
            if (r->second.empty()) rows_.erase(r);
        }
        if (auto c = cols_.find(y); c != cols_.end()) {
            c->second.erase(x);
            if (c->second.empty()) cols_.erase(c);
        }
        return;
    }
    rows_[x][y] = w;
    cols_[y][x] = w;
}

void TransportRule::set_open(std::int64_t x, const Rational& w) {
    if (!window_.contains(x)) throw Error(ErrorCode::InvalidArgument, "source outside rule window");
    if (w == 0) {
        open_.erase(x);
    } else {
        open_[x] = w;
    }
}

Rational TransportRule::open(std::int64_t x) const {
    const auto it = open_.find(x);
    return it == open_.end() ? Rational(0) : it->second;
}

const std::map<std::int64_t, Rational>& TransportRule::row(std::int64_t x) const {
    const auto r = rows_.find(x);
    return r == rows_.end() ? kEmptyRow : r->second;
}

std::vector<std::int64_t> TransportRule::sources(std::int64_t y) const {
    std::vector<std::int64_t> out;
    if (const auto c = cols_.find(y); c != cols_.end()) {
        for (const auto& [x, w] : c->second) out.push_back(x);
    }
    return out;
}

Rational TransportRule::row_sum(std::int64_t x) const {
    Rational s = open(x);
    for (const auto& [y, w] : row(x)) s += w;
    return s;
}

bool TransportRule::has_frontier() const {
    if (!open_.empty()) return true;
    for (const auto& [x, r] : rows_) {
        for (const auto& [y, w] : r) {
            if (!window_.contains(y)) return true;
        }
    }
    return false;
}

bool TransportRule::forward_only() const {
    for (const auto& [x, r] : rows_) {
        if (!r.empty() && r.begin()->first < x) return false;
    }
    return true;
}

bool TransportRule::rows_stochastic() const {
    for (std::int64_t x = window_.lo; x <= window_.hi; ++x) {
        if (row_sum(x) != 1) return false;
    }
    return true;
}

BalanceReport verify_balance(const TransportRule& theta, const BallConfig& balls) {
    if (theta.has_frontier()) throw Error(ErrorCode::FrontierMassPresent, "rule sends mass outside its window");
    const Window w = balls.window();
    BalanceReport report;
    for (std::int64_t y = w.lo; y <= w.hi; ++y) {
        Rational received = 0;
        for (const std::int64_t x : theta.sources(y)) {
            if (w.contains(x) && balls.at(x).white) received += theta.weight(x, y);
        }
        const Rational expected(balls.at(y).coloured);
        if (received != expected) {
            report.balanced = false;
            report.first_violation = y;
            report.received = received;
            report.expected = expected;
            return report;
        }
    }
    return report;
}

BalanceReport verify_balance(const TransportRule& theta, const Trajectory& traj, const EmbeddingProblem& pb,
                             Window window) {
    return verify_balance(theta, balls(traj, window, pb.start(), pb.target()));
}

Rational mass_received(const TransportRule& theta, const Trajectory& traj, const TargetMeasure& mu, std::int64_t site) {
    for (const auto& [x, w] : theta.open_mass()) {
        if (x <= site) throw Error(ErrorCode::FrontierMassPresent, "open mass may still reach the site");
    }
    Rational total = 0;
    for (const std::int64_t k : theta.sources(site)) {
        const State s = traj.at(k);
        total += theta.weight(k, site) * mu.weight(s) / traj.spec().stationary(s);
    }
    return total;
}

AllocationView greedy_match(const BallConfig& balls) {
    const Window w = balls.window();
    const auto n = static_cast<std::size_t>(w.size());
    std::vector<char> white(n);
    std::vector<std::int64_t> coloured(n);
    std::vector<std::size_t> occupied;
    for (std::size_t k = 0; k < n; ++k) {
        white[k] = balls.sites()[k].white;
        coloured[k] = balls.sites()[k].coloured;
        if (white[k] || coloured[k] > 0) occupied.push_back(k);
    }

    AllocationView view;
    view.window = w;
    std::vector<std::pair<std::size_t, std::size_t>> matches;
    for (;;) {
        matches.clear();
        for (std::size_t p = 0; p + 1 < occupied.size(); ++p) {
            const std::size_t a = occupied[p];
            const std::size_t b = occupied[p + 1];
            if (white[a] && coloured[b] > 0) matches.emplace_back(a, b);
        }
        if (matches.empty()) break;
        for (const auto& [a, b] : matches) {
            view.tau.emplace(w.lo + static_cast<std::int64_t>(a), w.lo + static_cast<std::int64_t>(b));
            white[a] = 0;
            --coloured[b];
        }
        std::erase_if(occupied, [&](std::size_t k) { return !white[k] && coloured[k] == 0; });
    }
    for (const std::size_t k : occupied) {
        if (white[k]) view.frontier.push_back(w.lo + static_cast<std::int64_t>(k));
    }
    return view;
}

std::vector<Crossing> find_crossings(const TransportRule& theta) {
    struct Edge {
        std::int64_t from, to;
    };
    std::vector<Edge> edges;
    for (const auto& [x, r] : theta.rows()) {
        for (const auto& [y, w] : r) {
            if (y > x) edges.push_back({x, y});
        }
    }
    std::vector<Crossing> out;
    for (const Edge& a : edges) {
        for (const Edge& b : edges) {
            if (a.from < b.from && b.from < a.to && a.to < b.to) out.push_back({a.from, b.from, a.to, b.to});
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

void repair_in_place(TransportRule& t, const Crossing& c) {
    const Rational xv = t.weight(c.x, c.v);
    const Rational uy = t.weight(c.u, c.y);
    const Rational delta = xv < uy ? xv : uy;
    t.add(c.x, c.y, delta);
    t.add(c.u, c.v, delta);
    t.set(c.x, c.v, xv - delta);
    t.set(c.u, c.y, uy - delta);
}

bool is_crossing(const TransportRule& t, const Crossing& c) {
    return c.x < c.u && c.u < c.v && c.v < c.y && t.weight(c.x, c.v) > 0 && t.weight(c.u, c.y) > 0;
}

// Repairs every crossing x < u < v < y of the pair (u, v): sources x of v
// from right to left, and for each the destinations y of u left to right.
void repair_pair(TransportRule& t, std::int64_t u, std::int64_t v) {
    std::vector<std::int64_t> xs = t.sources(v);
    std::erase_if(xs, [&](std::int64_t x) { return x >= u; });
    std::reverse(xs.begin(), xs.end());
    for (const std::int64_t x : xs) {
        std::vector<std::int64_t> ys;
        for (const auto& [y, w] : t.row(u)) {
            if (y > v) ys.push_back(y);
        }
        for (const std::int64_t y : ys) {
            const Crossing c{x, u, v, y};
            if (!is_crossing(t, c)) break;
            repair_in_place(t, c);
        }
    }
}

} // namespace

TransportRule repair_crossing(const TransportRule& theta, const Crossing& c) {
    if (!is_crossing(theta, c)) throw Error(ErrorCode::NotACrossing, "(x, u, v, y) is not a crossing of theta");
    TransportRule out = theta;
    repair_in_place(out, c);
    return out;
}

TransportRule repair_all(const TransportRule& theta, const BallConfig& balls, Window a) {
    if (!balls.window().contains(a)) throw Error(ErrorCode::InvalidArgument, "interval outside the ball window");
    TransportRule t = theta;
    std::vector<std::int64_t> whites; // uncancelled, ascending
    for (std::int64_t k = a.lo; k <= a.hi; ++k) {
        const BallSite& site = balls.at(k);
        if (site.coloured > 0) {
            // whites left of k are exactly the uncancelled ones collected so far
            for (std::int64_t ball = 0; ball < site.coloured && !whites.empty(); ++ball) {
                const std::int64_t u = whites.back();
                repair_pair(t, u, k);
                whites.pop_back();
            }
        }
        if (site.white) whites.push_back(k);
    }
    return t;
}

std::optional<Excursion> find_excursion_around(Trajectory& traj, std::int64_t z, const EmbeddingProblem& pb,
                                               std::int64_t cap, std::int64_t level) {
    detail::require_tstar(pb);
    if (level < 1) throw Error(ErrorCode::InvalidArgument, "excursion level must be positive");
    const BallRatios& r = pb.ratios();
    const State i = pb.start();

    // Forward profile F(x) = D([z, x)).
    std::int64_t f = 0;
    std::int64_t tau = z;
    std::int64_t last_coloured = z - 1;
    for (;; ++tau) {
        if (tau - z > cap) return std::nullopt;
        const State s = traj.extend_to(tau);
        if (s == i && f <= -level) break;
        const std::int64_t step = r.step(s);
        if (step < 0) last_coloured = tau;
        f += step;
    }
    const std::int64_t target = -f; // D([sigma, z)) must equal -d

    std::int64_t g = 0;
    std::int64_t sigma = z;
    while (g != target) {
        if (z - sigma >= cap) return std::nullopt;
        --sigma;
        g += r.step(traj.extend_to(sigma));
    }
    const Window interval{sigma, last_coloured};
    return Excursion{interval, balls(traj, interval, i, pb.target())};
}

CostFunction CostFunction::power(double beta) {
    if (!(beta > 0.0 && beta <= 1.0)) throw Error(ErrorCode::InvalidArgument, "power cost needs 0 < beta <= 1");
    CostFunction c;
    c.kind_ = Kind::Power;
    c.beta_ = beta;
    return c;
}

CostFunction CostFunction::log1p() {
    CostFunction c;
    c.kind_ = Kind::Log1p;
    return c;
}

CostFunction CostFunction::capped_linear(std::int64_t cap) {
    if (cap < 1) throw Error(ErrorCode::InvalidArgument, "capped-linear cost needs c >= 1");
    CostFunction c;
    c.kind_ = Kind::CappedLinear;
    c.cap_ = cap;
    return c;
}

CostFunction CostFunction::parse(std::string_view text) {
    if (text == "sqrt") return sqrt();
    if (text == "log1p") return log1p();
    if (text == "identity") return power(1.0);
    auto number_after = [&](std::string_view prefix, auto& out) {
        if (!text.starts_with(prefix)) return false;
        const auto rest = text.substr(prefix.size());
        auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), out);
        return ec == std::errc() && ptr == rest.data() + rest.size();
    };
    double beta = 0;
    if (number_after("power:", beta)) return power(beta);
    std::int64_t cap = 0;
    if (number_after("capped:", cap)) return capped_linear(cap);
    throw Error(ErrorCode::InvalidConfig, "unknown cost function '" + std::string(text) + "'");
}

std::string CostFunction::name() const {
    switch (kind_) {
    case Kind::Power: {
        if (beta_ == 0.5) return "sqrt";
        if (beta_ == 1.0) return "identity";
        char buf[32];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, beta_);
        return "power:" + std::string(buf, ptr);
    }
    case Kind::Log1p: return "log1p";
    case Kind::CappedLinear: return "capped:" + std::to_string(cap_);
    }
    return "unknown";
}

double CostFunction::operator()(std::int64_t n) const {
    if (n <= 0) return 0.0;
    const auto x = static_cast<double>(n);
    switch (kind_) {
    case Kind::Power: return beta_ == 0.5 ? std::sqrt(x) : std::pow(x, beta_);
    case Kind::Log1p: return std::log1p(x);
    case Kind::CappedLinear: return static_cast<double>(std::min(n, cap_));
    }
    return 0.0;
}

Real50 CostFunction::precise(std::int64_t n) const {
    if (n <= 0) return 0;
    const Real50 x(n);
    switch (kind_) {
    case Kind::Power: return beta_ == 0.5 ? boost::multiprecision::sqrt(x) : boost::multiprecision::pow(x, Real50(beta_));
    case Kind::Log1p: return boost::multiprecision::log(x + 1);
    case Kind::CappedLinear: return Real50(std::min(n, cap_));
    }
    return 0;
}

std::optional<Rational> CostFunction::exact(std::int64_t n) const {
    if (n <= 0) return Rational(0);
    if (kind_ == Kind::CappedLinear) return Rational(static_cast<long>(std::min(n, cap_)));
    if (kind_ == Kind::Power && beta_ == 1.0) return Rational(static_cast<long>(n));
    return std::nullopt;
}

Real50 CostValue::evaluate(const CostFunction& psi) const {
    Real50 sum = 0;
    for (const auto& [d, c] : coefficients) {
        sum += Real50(c.get_num().get_str()) / Real50(c.get_den().get_str()) * psi.precise(d);
    }
    return sum;
}

CostValue operator-(const CostValue& a, const CostValue& b) {
    CostValue out = a;
    for (const auto& [d, c] : b.coefficients) {
        Rational& slot = out.coefficients[d];
        slot -= c;
        if (slot == 0) out.coefficients.erase(d);
    }
    return out;
}

CostValue window_cost(const TransportRule& theta, Window a) {
    CostValue cost;
    auto add = [&](std::int64_t x, std::int64_t y, const Rational& w) {
        if (y > x) cost.coefficients[y - x] += w;
    };
    for (std::int64_t x = a.lo; x <= a.hi; ++x) {
        if (theta.open(x) > 0) throw Error(ErrorCode::FrontierMassPresent, "open mass from a site of the interval");
        for (const auto& [y, w] : theta.row(x)) add(x, y, w);
    }
    for (std::int64_t y = a.lo; y <= a.hi; ++y) {
        for (const std::int64_t x : theta.sources(y)) add(x, y, theta.weight(x, y));
    }
    std::erase_if(cost.coefficients, [](const auto& kv) { return kv.second == 0; });
    return cost;
}

double window_cost(const TransportRule& theta, Window a, const CostFunction& psi) {
    return static_cast<double>(window_cost(theta, a).evaluate(psi));
}

int compare_cost(const CostValue& lhs, const CostValue& rhs, const CostFunction& psi) {
    const CostValue diff = lhs - rhs;
    if (diff.coefficients.empty()) return 0;
    bool all_exact = true;
    Rational exact_sum = 0;
    Real50 scale = 0;
    for (const auto& [d, c] : diff.coefficients) {
        const auto v = psi.exact(d);
        if (v) {
            exact_sum += c * *v;
        } else {
            all_exact = false;
        }
        scale += abs(Real50(c.get_num().get_str()) / Real50(c.get_den().get_str())) * psi.precise(d);
    }
    if (all_exact) return sgn(exact_sum);
    const Real50 value = diff.evaluate(psi);
    if (abs(value) <= scale * Real50("1e-40")) return 0;
    return value > 0 ? 1 : -1;
}

} // namespace skembed
