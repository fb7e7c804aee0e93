#include "skembed/local_time.hpp"

#include "skembed/error.hpp"

#include <cmath>
#include <limits>

namespace skembed {

TargetMeasure TargetMeasure::from_weights(const ChainSpec& spec, std::map<State, Rational> weights,
                                          Precision precision) {
    TargetMeasure nu;
    nu.precision_ = precision;
    Rational total = 0;
    for (auto& [s, w] : weights) {
        if (!spec.contains(s)) throw Error(ErrorCode::UnknownState, "target weight on unknown state " + std::to_string(s));
        if (w < 0) throw Error(ErrorCode::InvalidMeasure, "negative weight on " + spec.label(s));
        w.canonicalize();
        total += w;
        if (w > 0) nu.weights_.emplace(s, w);
    }
    if (total != 1) {
        if (precision == Precision::Exact || std::abs(to_double(total - 1)) > 1e-12) {
            throw Error(ErrorCode::InvalidMeasure, "weights sum to " + to_string(total));
        }
        for (auto& [s, w] : nu.weights_) w /= total;
    }
    return nu;
}

TargetMeasure TargetMeasure::dirac(const ChainSpec& spec, State s) {
    return from_weights(spec, {{s, Rational(1)}});
}

TargetMeasure TargetMeasure::stationary(const ChainSpec& spec) {
    if (!spec.is_finite()) throw Error(ErrorCode::InvalidMeasure, "stationary measure of a lattice walk is not finite");
    std::map<State, Rational> w;
    for (std::size_t s = 0; s < spec.num_states(); ++s) w.emplace(static_cast<State>(s), spec.stationary()[s]);
    return from_weights(spec, std::move(w));
}

Rational TargetMeasure::weight(State s) const {
    const auto it = weights_.find(s);
    return it == weights_.end() ? Rational(0) : it->second;
}

std::vector<State> TargetMeasure::support() const {
    std::vector<State> out;
    out.reserve(weights_.size());
    for (const auto& [s, w] : weights_) out.push_back(s);
    return out;
}

std::int64_t LocalTimeLedger::count(State j) const {
    const auto it = counts_.find(j);
    return it == counts_.end() ? 0 : it->second;
}

std::int64_t LocalTimeLedger::total() const noexcept {
    std::int64_t sum = 0;
    for (const auto& [s, c] : counts_) sum += c;
    return sum;
}

Rational LocalTimeLedger::local_time(State j) const {
    Rational l(count(j));
    l /= spec_->stationary(j);
    return l;
}

LocalTimeLedger& LocalTimeLedger::operator+=(const LocalTimeLedger& other) {
    if (other.window_.size() == 0) return *this;
    if (window_.size() == 0) {
        window_ = other.window_;
    } else if (other.window_.lo == window_.hi + 1) {
        window_.hi = other.window_.hi;
    } else if (other.window_.hi + 1 == window_.lo) {
        window_.lo = other.window_.lo;
    } else {
        throw Error(ErrorCode::InvalidArgument, "ledger windows must be disjoint and adjacent");
    }
    for (const auto& [s, c] : other.counts_) counts_[s] += c;
    return *this;
}

LocalTimeLedger ledger(const Trajectory& traj, Window window) {
    if (!traj.window().contains(window)) {
        throw Error(ErrorCode::WindowNotMaterialized, "ledger window [" + std::to_string(window.lo) + ", " +
                                                          std::to_string(window.hi) + "] not sampled");
    }
    LocalTimeLedger out(traj.spec(), window);
    for (std::int64_t n = window.lo; n <= window.hi; ++n) out.add_visit(traj.at(n));
    return out;
}

Rational weighted_local_time(const LocalTimeLedger& ledger, const TargetMeasure& nu) {
    Rational sum = 0;
    for (const auto& [s, w] : nu.weights()) sum += w * ledger.local_time(s);
    return sum;
}

BallRatios::BallRatios(const ChainSpec& spec, State white, const TargetMeasure& nu) : white_(white) {
    if (!spec.contains(white)) throw Error(ErrorCode::UnknownState, "start state not in chain");
    const bool from_float = spec.precision() == Precision::Float || nu.precision() == Precision::Float;
    const Rational mi = spec.stationary(white);
    mpz_class lcm = 1;
    for (const auto& [j, w] : nu.weights()) {
        Rational r = mi * w / spec.stationary(j);
        r.canonicalize();
        if (from_float && !is_integer(r)) {
            const double x = to_double(r);
            const double nearest = std::round(x);
            if (std::abs(x - nearest) <= 1e-9) {
                warnings_.push_back("ball ratio at " + spec.label(j) + " = " + to_string(r) + " rounded to " +
                                    std::to_string(static_cast<long long>(nearest)));
                r = Rational(static_cast<long>(nearest));
            }
        }
        mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), r.get_den_mpz_t());
        ratios_.emplace(j, r);
    }
    if (!lcm.fits_slong_p() || lcm > (std::numeric_limits<std::int64_t>::max() >> 8)) {
        throw Error(ErrorCode::InvalidArgument, "common denominator of ball ratios too large");
    }
    scale_ = lcm.get_si();

    auto weight = [&](State s) {
        Rational w = (s == white_ ? Rational(scale_) : Rational(0)) - ratio(s) * scale_;
        return to_int64(w);
    };
    if (spec.is_finite()) {
        dense_.resize(spec.num_states());
        for (std::size_t s = 0; s < dense_.size(); ++s) dense_[s] = weight(static_cast<State>(s));
    } else {
        sparse_.emplace_back(white_, weight(white_));
        for (const auto& [j, r] : ratios_) {
            if (j != white_) sparse_.emplace_back(j, weight(j));
        }
    }
}

Rational BallRatios::ratio(State j) const {
    const auto it = ratios_.find(j);
    return it == ratios_.end() ? Rational(0) : it->second;
}

std::int64_t BallRatios::coloured(State j) const {
    const Rational r = ratio(j);
    if (!is_integer(r)) throw Error(ErrorCode::NonIntegerBallCount, "ball count " + to_string(r) + " is not an integer");
    return to_int64(r);
}

BallConfig::BallConfig(Window window, std::vector<BallSite> sites) : window_(window), sites_(std::move(sites)) {
    if (static_cast<std::int64_t>(sites_.size()) != window_.size()) {
        throw Error(ErrorCode::InvalidArgument, "ball config size does not match window");
    }
}

const BallSite& BallConfig::at(std::int64_t k) const {
    if (!window_.contains(k)) throw Error(ErrorCode::WindowNotMaterialized, "site " + std::to_string(k) + " outside balls");
    return sites_[static_cast<std::size_t>(k - window_.lo)];
}

std::int64_t BallConfig::whites() const noexcept {
    std::int64_t n = 0;
    for (const auto& s : sites_) n += s.white ? 1 : 0;
    return n;
}

std::int64_t BallConfig::coloured() const noexcept {
    std::int64_t n = 0;
    for (const auto& s : sites_) n += s.coloured;
    return n;
}

BallConfig balls(const Trajectory& traj, Window window, State i, const TargetMeasure& nu) {
    if (nu.weight(i) > 0) throw Error(ErrorCode::TargetChargesStart, "target charges the start state");
    const BallRatios ratios(traj.spec(), i, nu);
    if (!ratios.integral()) {
        for (const auto& [j, r] : ratios.ratios()) {
            if (!is_integer(r)) {
                throw Error(ErrorCode::NonIntegerBallCount,
                            "m_i nu_j / m_j = " + to_string(r) + " at " + traj.spec().label(j));
            }
        }
    }
    if (!traj.window().contains(window)) throw Error(ErrorCode::WindowNotMaterialized, "ball window not sampled");
    std::vector<BallSite> sites;
    sites.reserve(static_cast<std::size_t>(window.size()));
    for (std::int64_t k = window.lo; k <= window.hi; ++k) {
        const State s = traj.at(k);
        BallSite site;
        site.white = s == i;
        site.colour = s;
        site.coloured = ratios.coloured(s);
        sites.push_back(site);
    }
    return BallConfig(window, std::move(sites));
}

} // namespace skembed
