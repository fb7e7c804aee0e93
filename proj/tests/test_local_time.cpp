#include "generators.hpp"

#include "skembed/error.hpp"
#include "skembed/local_time.hpp"

#include <doctest.h>

using namespace skembed;

namespace {

Rational q(const char* s) { return Rational(s); }

Trajectory coin_path(const ChainSpec& coin, const std::vector<State>& v) {
    return Trajectory::from_fixture(coin, v, 0, 1, 0);
}

constexpr State T = 0, H = 1; // coin labels: tail, head

} // namespace

TEST_CASE("ledger of T,H on a fair coin") {
    const ChainSpec coin = ChainSpec::coin(q("1/2"));
    const Trajectory t = coin_path(coin, {T, H});
    const LocalTimeLedger l = ledger(t, {0, 1});
    CHECK(l.local_time(T) == 2);
    CHECK(l.local_time(H) == 2);
    CHECK(l.total() == 2);
}

TEST_CASE("unvisited state has zero local time") {
    const ChainSpec coin = ChainSpec::coin(q("1/2"));
    const Trajectory t = coin_path(coin, {T, T, T});
    CHECK(ledger(t, {0, 2}).local_time(H) == 0);
    CHECK_THROWS_AS(ledger(t, {0, 3}), Error);
}

TEST_CASE("ledgers of adjacent windows add up") {
    const ChainSpec s = ChainSpec::three_state(q("1/3"));
    Trajectory t(s, 0, 3, 0);
    t.extend_to(7);
    LocalTimeLedger a = ledger(t, {0, 3});
    a += ledger(t, {4, 7});
    CHECK(a == ledger(t, {0, 7}));
    LocalTimeLedger b = ledger(t, {0, 3});
    CHECK_THROWS_AS(b += ledger(t, {5, 7}), Error);
}

TEST_CASE("weighted local time") {
    const ChainSpec coin = ChainSpec::coin(q("1/2"));
    const Trajectory t = coin_path(coin, {T, T, H, H});
    const LocalTimeLedger l = ledger(t, {0, 3});
    CHECK(weighted_local_time(l, TargetMeasure::dirac(coin, H)) == 4);
    const Trajectory th = coin_path(coin, {T, H});
    CHECK(weighted_local_time(ledger(th, {0, 1}), TargetMeasure::from_weights(coin, {{T, q("1/2")}, {H, q("1/2")}})) ==
          2);
    const ChainSpec three = ChainSpec::three_state(q("1/3"));
    Trajectory u = Trajectory::from_fixture(three, std::vector<State>{0, 1, 0}, 0, 1, 0);
    CHECK(weighted_local_time(ledger(u, {0, 2}), TargetMeasure::dirac(three, 2)) == 0);
}

TEST_CASE("target measures validate") {
    const ChainSpec coin = ChainSpec::coin(q("1/2"));
    CHECK_THROWS_AS(TargetMeasure::from_weights(coin, {{T, q("1/2")}}), Error);
    CHECK_THROWS_AS(TargetMeasure::from_weights(coin, {{T, q("3/2")}, {H, q("-1/2")}}), Error);
    CHECK_THROWS_AS(TargetMeasure::from_weights(coin, {{7, 1}}), Error);
    const auto f = TargetMeasure::from_weights(coin, {{T, rational_from_double(0.3)}, {H, rational_from_double(0.7)}},
                                               Precision::Float);
    CHECK(f.weight(T) + f.weight(H) == 1);
}

TEST_CASE("ball configurations") {
    const ChainSpec coin = ChainSpec::coin(q("1/2"));
    const Trajectory t = coin_path(coin, {T, H, T, H});
    const BallConfig b = balls(t, {0, 3}, T, TargetMeasure::dirac(coin, H));
    CHECK(b.at(0).white);
    CHECK(b.at(0).coloured == 0);
    CHECK(!b.at(1).white);
    CHECK(b.at(1).coloured == 1);

    const ChainSpec three = ChainSpec::three_state(q("1/3"));
    const Trajectory u = Trajectory::from_fixture(three, std::vector<State>{0, 1, 2, 1, 0}, 0, 1, 0);
    const BallConfig c = balls(u, {0, 4}, 0, TargetMeasure::dirac(three, 2));
    CHECK(c.at(0).white);
    CHECK(c.at(2).coloured == 2);
    CHECK(c.at(1).coloured == 0);
    CHECK(c.at(4).white);

    // 2/5 coin: (m_tail / m_head) = 3/2 coloured balls is not an integer
    const ChainSpec odd = ChainSpec::coin(q("2/5"));
    const Trajectory o = Trajectory::from_fixture(odd, std::vector<State>{T, H}, 0, 1, 0);
    CHECK_THROWS_AS(balls(o, {0, 1}, T, TargetMeasure::dirac(odd, H)), Error);
    CHECK_THROWS_AS(balls(o, {0, 1}, T, TargetMeasure::dirac(odd, T)), Error);
}

TEST_CASE("ball ratios carry a common scale for fractional weights") {
    const ChainSpec odd = ChainSpec::coin(q("2/5"));
    const BallRatios r(odd, T, TargetMeasure::dirac(odd, H));
    CHECK(r.ratio(H) == q("3/2"));
    CHECK(r.scale() == 2);
    CHECK(!r.integral());
    CHECK(r.step(T) == 2);
    CHECK(r.step(H) == -3);
}

TEST_CASE("property: whites minus coloured equals m_i (L^i - L^nu) on random windows") {
    CounterRng rng(5, 0, Substream::Auxiliary);
    for (const auto& in : testing::excursion_instances()) {
        const EmbeddingProblem& pb = *in.problem;
        for (int c = 0; c < 40; ++c) {
            Trajectory t(*in.spec, pb.start(), 8, static_cast<std::uint64_t>(c));
            const std::int64_t a = -static_cast<std::int64_t>(rng.below(60));
            const std::int64_t b = static_cast<std::int64_t>(rng.below(60));
            t.extend_to(a);
            t.extend_to(b);
            const BallConfig bc = balls(t, {a, b}, pb.start(), pb.target());
            const LocalTimeLedger l = ledger(t, {a, b});
            const Rational lhs = bc.whites() - bc.coloured();
            const Rational rhs =
                in.spec->stationary(pb.start()) * (l.local_time(pb.start()) - weighted_local_time(l, pb.target()));
            CHECK(lhs == rhs);
            std::int64_t sum = 0;
            for (const auto& [s, n] : l.counts()) sum += n;
            CHECK(sum == b - a + 1);
            for (const auto& site : bc.sites()) CHECK(!(site.white && site.coloured > 0));
        }
    }
}

TEST_CASE("property: ledgers are translation covariant") {
    const ChainSpec s = ChainSpec::three_state(q("1/2"));
    Trajectory t(s, 0, 12, 3);
    t.extend_to(-80);
    t.extend_to(80);
    std::vector<State> values;
    for (std::int64_t n = -80; n <= 80; ++n) values.push_back(t.at(n));
    for (std::size_t shift : {0u, 13u, 77u, 150u}) {
        const Trajectory u = Trajectory::from_fixture(s, values, shift, 1, 0);
        const std::int64_t z = static_cast<std::int64_t>(shift) - 80;
        for (const Window w : {Window{-40, 10}, Window{-3, 3}, Window{0, 60}}) {
            const Window moved{w.lo - z, w.hi - z};
            if (!u.window().contains(moved)) continue;
            CHECK(ledger(t, w).counts() == ledger(u, moved).counts());
        }
    }
}
