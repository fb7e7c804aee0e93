#include "generators.hpp"

#include "skembed/embedding.hpp"
#include "skembed/error.hpp"
#include "skembed/local_time.hpp"

#include <doctest.h>

using namespace skembed;

namespace {

Rational q(const char* s) { return Rational(s); }
constexpr State T = 0, H = 1;

bool feasible(const ChainSpec& s, State i, const std::map<State, Rational>& nu) {
    return check_feasibility(s, i, TargetMeasure::from_weights(s, nu)).feasible;
}

// Brute force: rebuild the ledger of [k, n] for every n and test the
// defining inequality with exact rationals. Returns nullopt past `last`.
std::optional<std::int64_t> brute_force_time(Trajectory& t, State i, const TargetMeasure& nu, std::int64_t k,
                                             std::int64_t last, const Rational& slack = 0) {
    for (std::int64_t n = k; n <= last; ++n) {
        t.extend_to(n);
        const LocalTimeLedger l = ledger(t, {k, n});
        if (l.local_time(i) - weighted_local_time(l, nu) <= slack) return n;
    }
    return std::nullopt;
}

std::optional<std::int64_t> brute_force_visit(Trajectory& t, State i, std::int64_t from, std::int64_t last) {
    for (std::int64_t n = from; n <= last; ++n) {
        if (t.extend_to(n) == i) return n;
    }
    return std::nullopt;
}

Rational exact_u(double u) {
    Rational r(u); // doubles convert exactly
    return r;
}

} // namespace

TEST_CASE("extra head: feasible iff 1/p is an integer") {
    CHECK(feasible(ChainSpec::coin(q("1/2")), T, {{H, 1}}));
    CHECK(feasible(ChainSpec::coin(q("1/3")), T, {{H, 1}}));
    CHECK(!feasible(ChainSpec::coin(q("2/5")), T, {{H, 1}}));
    for (int k = 2; k <= 9; ++k) CHECK(feasible(ChainSpec::coin(Rational(1, k)), T, {{H, 1}}));
    const auto v = check_feasibility(ChainSpec::coin(q("2/5")), T, TargetMeasure::dirac(ChainSpec::coin(q("2/5")), H));
    CHECK(v.reason == FeasibilityReason::NonIntegerAt);
    REQUIRE(v.at);
    CHECK(*v.at == H);
    REQUIRE(v.witness.size() == 1);
    CHECK(v.witness[0].value == q("3/2"));
    CHECK(!v.witness[0].integer);
}

TEST_CASE("inverse extra head is infeasible") {
    for (const char* p : {"1/2", "1/3", "1/4", "2/7"}) {
        const ChainSpec c = ChainSpec::coin(q(p));
        const auto v = check_feasibility(c, T, TargetMeasure::stationary(c));
        CHECK(!v.feasible);
        CHECK(v.reason == FeasibilityReason::TargetChargesStartRequiresDirac);
    }
}

TEST_CASE("pattern chain: mixed patterns feasible iff p = 1/2") {
    for (const char* p : {"1/2", "1/3", "1/4", "2/3", "3/5"}) {
        const ChainSpec s = ChainSpec::coin_pattern(q(p));
        const State tt = s.state("tail/tail"), th = s.state("tail/head"), ht = s.state("head/tail"),
                    hh = s.state("head/head");
        const bool half = q(p) == q("1/2");
        // mixed targets seen from every other start
        for (const State target : {th, ht}) {
            bool all = true;
            for (const State start : {tt, th, ht, hh}) {
                if (start != target) all = all && feasible(s, start, {{target, 1}});
            }
            CHECK(all == half);
        }
        // pure patterns from the opposite pure pattern
        CHECK(feasible(s, tt, {{hh, 1}}) == is_integer(1 / (q(p) * q(p)) * (1 - q(p)) * (1 - q(p))));
    }
}

TEST_CASE("walks on Z and Z^2: only Dirac targets") {
    const ChainSpec z = ChainSpec::srw_z();
    for (State j = -3; j <= 3; ++j) CHECK(feasible(z, 0, {{j, 1}}));
    CHECK(!feasible(z, 0, {{1, q("1/2")}, {2, q("1/2")}}));
    CHECK(!feasible(z, 0, {{-1, q("1/3")}, {5, q("2/3")}}));
    CHECK(!feasible(z, 0, {{0, q("1/2")}, {1, q("1/2")}}));
    const ChainSpec z2 = ChainSpec::srw_z2();
    CHECK(feasible(z2, encode_z2(0, 0), {{encode_z2(2, 1), 1}}));
    CHECK(!feasible(z2, encode_z2(0, 0), {{encode_z2(2, 1), q("1/2")}, {encode_z2(0, 1), q("1/2")}}));
}

TEST_CASE("targets charging the start: only delta_i") {
    const ChainSpec s = ChainSpec::three_state(q("1/3"));
    const auto v = check_feasibility(s, 0, TargetMeasure::dirac(s, 0));
    CHECK(v.feasible);
    CHECK(!feasible(s, 0, {{0, q("1/2")}, {2, q("1/2")}}));
    CHECK(feasible(s, 0, {{2, 1}}));
    CHECK(feasible(s, 0, {{1, 1}}) == false); // m_1 / m_2 = 2/3
}

TEST_CASE("property: verdict agrees with a direct integrality check on random chains") {
    CounterRng rng(21, 0, Substream::Auxiliary);
    for (int c = 0; c < 300; ++c) {
        const ChainSpec s = testing::random_chain(rng, 1 + rng.below(5));
        const State i = static_cast<State>(rng.below(s.num_states()));
        const auto nu = testing::random_target(rng, s);
        bool expected = true;
        if (nu.count(i)) {
            expected = nu.size() == 1;
        } else {
            for (const auto& [j, w] : nu) expected = expected && is_integer(s.stationary(i) / s.stationary(j) * w);
        }
        CHECK(feasible(s, i, nu) == expected);
    }
}

TEST_CASE("T* on hand paths") {
    const ChainSpec coin = ChainSpec::coin(q("1/2"));
    const EmbeddingProblem pb(coin, T, TargetMeasure::dirac(coin, H));
    {
        Trajectory t = Trajectory::from_fixture(coin, std::vector<State>{T, H}, 0, 1, 0);
        CHECK(solve_tstar(t, pb, 100).time == 1);
    }
    {
        Trajectory t = Trajectory::from_fixture(coin, std::vector<State>{T, T, H, H}, 0, 1, 0);
        const StoppingResult r = solve_tstar(t, pb, 100);
        CHECK(r.time == 3);
        CHECK(!r.censored);
        CHECK(r.solver == "tstar");
    }
    {
        Trajectory t = Trajectory::from_fixture(coin, std::vector<State>{T, T, T, H}, 0, 1, 0);
        const StoppingResult r = solve_tstar(t, pb, 3);
        CHECK(r.censored);
        CHECK(r.time == 3);
    }
}

TEST_CASE("T* preconditions") {
    const ChainSpec coin = ChainSpec::coin(q("2/5"));
    Trajectory t(coin, T, 1, 0);
    CHECK_THROWS_AS(solve_tstar(t, EmbeddingProblem(coin, T, TargetMeasure::dirac(coin, H)), 10), Error);
    try {
        solve_tstar(t, EmbeddingProblem(coin, T, TargetMeasure::stationary(coin)), 10);
        FAIL("expected TargetChargesStart");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TargetChargesStart);
    }
}

TEST_CASE("property: T* equals the brute-force scan, is minimal, and lands on the target") {
    for (const auto& in : testing::excursion_instances()) {
        const EmbeddingProblem& pb = *in.problem;
        for (std::uint64_t r = 0; r < 100; ++r) {
            Trajectory t(*in.spec, pb.start(), 31, r);
            const StoppingResult res = solve_tstar(t, pb, 5000);
            const auto oracle = brute_force_time(t, pb.start(), pb.target(), 0, res.time);
            if (res.censored) {
                CHECK(!oracle);
                continue;
            }
            REQUIRE(oracle);
            CHECK(*oracle == res.time);
            CHECK(res.time >= 1);
            CHECK(pb.target().weight(t.at(res.time)) > 0);
        }
    }
}

TEST_CASE("property: T* on random chains with feasible targets") {
    CounterRng rng(22, 0, Substream::Auxiliary);
    int tested = 0;
    for (int c = 0; c < 2000 && tested < 150; ++c) {
        const ChainSpec s = testing::random_chain(rng, 2 + rng.below(4));
        const State i = static_cast<State>(rng.below(s.num_states()));
        auto nu = testing::random_target(rng, s);
        nu.erase(i);
        if (nu.empty()) continue;
        Rational total = 0;
        for (const auto& [j, w] : nu) total += w;
        for (auto& [j, w] : nu) w /= total;
        const TargetMeasure target = TargetMeasure::from_weights(s, nu);
        const EmbeddingProblem pb(s, i, target);
        if (!pb.verdict().feasible) continue;
        ++tested;
        Trajectory t(s, i, 32, static_cast<std::uint64_t>(c));
        const StoppingResult res = solve_tstar(t, pb, 3000);
        const auto oracle = brute_force_time(t, i, target, 0, res.time);
        if (!res.censored) {
            REQUIRE(oracle);
            CHECK(*oracle == res.time);
            CHECK(target.weight(t.at(res.time)) > 0);
        }
    }
    CHECK(tested >= 50);
}

TEST_CASE("T_rand equals T* on integral instances for every u") {
    const auto instances = testing::excursion_instances();
    for (const auto& in : instances) {
        for (std::uint64_t r = 0; r < 30; ++r) {
            Trajectory t(*in.spec, in.problem->start(), 41, r);
            const auto star = solve_tstar(t, *in.problem, 5000);
            for (const double u : {0.0, 1e-9, 0.1, 0.5, 0.9, 0.999999}) {
                const auto rand = solve_trand(t, *in.problem, u, 5000);
                CHECK(rand.time == star.time);
                CHECK(rand.censored == star.censored);
            }
        }
    }
}

TEST_CASE("T_rand on the 2/5 coin matches the brute-force scan with slack u / m_i") {
    const ChainSpec coin = ChainSpec::coin(q("2/5"));
    const TargetMeasure nu = TargetMeasure::dirac(coin, H);
    const EmbeddingProblem pb(coin, T, nu);
    bool saw_difference = false;
    for (std::uint64_t r = 0; r < 200; ++r) {
        Trajectory t(coin, T, 42, r);
        const auto lo = solve_trand(t, pb, 0.1, 5000);
        const auto hi = solve_trand(t, pb, 0.9, 5000);
        for (const auto& [res, u] : {std::pair{lo, 0.1}, std::pair{hi, 0.9}}) {
            if (res.censored) continue;
            const auto oracle = brute_force_time(t, T, nu, 0, res.time, exact_u(u) / coin.stationary(T));
            REQUIRE(oracle);
            CHECK(*oracle == res.time);
        }
        saw_difference = saw_difference || lo.time != hi.time;
    }
    CHECK(saw_difference);
}

TEST_CASE("T_rand draws u from the auxiliary stream") {
    const ChainSpec coin = ChainSpec::coin(q("2/5"));
    const EmbeddingProblem pb(coin, T, TargetMeasure::dirac(coin, H));
    Trajectory a(coin, T, 43, 7), b(coin, T, 43, 7);
    const auto x = solve_trand(a, pb, 1000);
    const auto y = solve_trand(b, pb, 1000);
    REQUIRE(x.u);
    CHECK(*x.u == *y.u);
    CHECK(x.time == y.time);
    CounterRng aux(43, 7, Substream::Auxiliary);
    CHECK(*x.u == aux.uniform());
}

TEST_CASE("visit times") {
    const ChainSpec one = ChainSpec::finite_matrix({"a"}, {{1}});
    Trajectory t(one, 0, 1, 0);
    CHECK(solve_tvisit(t, 3, 100).time == 3);

    const ChainSpec coin = ChainSpec::coin(q("1/2"));
    for (std::uint64_t r = 0; r < 50; ++r) {
        Trajectory c(coin, T, 51, r);
        const auto first = solve_tvisit(c, 1, 1000);
        CHECK(first.time == *brute_force_visit(c, T, 1, 1000));
        const auto second = solve_tvisit(c, 2, 1000);
        CHECK(second.time == *brute_force_visit(c, T, first.time + 1, 1000));
        CHECK(second.solver == "tvisit:2");
    }
    CHECK_THROWS_AS(solve_tvisit(t, 0, 10), Error);
}

TEST_CASE("dispatch routes delta_i targets to the first visit") {
    const ChainSpec s = ChainSpec::three_state(q("1/3"));
    const EmbeddingProblem pb(s, 0, TargetMeasure::dirac(s, 0));
    Trajectory t(s, 0, 52, 0);
    const auto r = solve(t, pb, SolverSpec{}, 100);
    CHECK(r.time == 2); // 1 -> 2 -> 1 always
    CHECK(r.solver == "tvisit");
    CHECK_THROWS_AS(solve(t, EmbeddingProblem(s, 0, TargetMeasure::dirac(s, 2)), SolverSpec{SolverKind::TVisit, 1}, 10),
                    Error);
}

TEST_CASE("composite time on T,H,T,H") {
    const ChainSpec coin = ChainSpec::coin(q("1/2"));
    const EmbeddingProblem pb(coin, T, TargetMeasure::dirac(coin, H));
    Trajectory t = Trajectory::from_fixture(coin, std::vector<State>{T, H, T, H}, 0, 1, 0);
    const auto r = solve_composite(t, pb, 100);
    CHECK(r.time == 3); // first return at 2, then T* = 1 on the re-rooted path
    CHECK(r.solver == "composite");
}

TEST_CASE("property: composite = T_1 + T* of the re-rooted path, and T' >= T_1 >= 1") {
    for (const auto& in : testing::excursion_instances()) {
        const EmbeddingProblem& pb = *in.problem;
        for (std::uint64_t r = 0; r < 60; ++r) {
            Trajectory t(*in.spec, pb.start(), 53, r);
            const auto res = solve_composite(t, pb, 5000);
            if (res.censored) continue;
            const auto t1 = brute_force_visit(t, pb.start(), 1, 5000);
            REQUIRE(t1);
            CHECK(*t1 >= 1);
            CHECK(res.time >= *t1);
            CHECK(*brute_force_time(t, pb.start(), pb.target(), *t1, res.time) == res.time);
        }
    }
}

TEST_CASE("property: the mixture picks T* or the composite time on the same path") {
    const auto instances = testing::excursion_instances();
    const auto& in = instances[1];
    int composite = 0;
    for (std::uint64_t r = 0; r < 400; ++r) {
        Trajectory a(*in.spec, in.problem->start(), 54, r), b(*in.spec, in.problem->start(), 54, r),
            c(*in.spec, in.problem->start(), 54, r);
        const auto mix = solve_mixture(a, *in.problem, 100000);
        const auto star = solve_tstar(b, *in.problem, 100000);
        const auto comp = solve_composite(c, *in.problem, 100000);
        REQUIRE(mix.u);
        CHECK(mix.time == (*mix.u < 0.5 ? star.time : comp.time));
        composite += *mix.u >= 0.5;
    }
    CHECK(composite > 150);
    CHECK(composite < 250);
}

TEST_CASE("composite lands with law nu on a non-Dirac target (4 standard errors, 1e5 replicas)") {
    const ChainSpec s = ChainSpec::iid_categorical({"a", "b", "c"}, {q("1/2"), q("1/4"), q("1/4")});
    const EmbeddingProblem pb(s, 0, TargetMeasure::from_weights(s, {{1, q("1/2")}, {2, q("1/2")}}));
    REQUIRE(pb.verdict().feasible);
    const std::int64_t n = 100000;
    std::int64_t b = 0, landed = 0;
    for (std::int64_t r = 0; r < n; ++r) {
        ForwardWalker w(s, 0, 55, static_cast<std::uint64_t>(r), 1);
        const auto res = solve_composite(w, pb, 1'000'000);
        if (res.censored) continue;
        ++landed;
        b += w.extend_to(res.time) == 1;
    }
    const double sd = std::sqrt(landed * 0.25);
    CHECK(std::abs(static_cast<double>(b) - 0.5 * static_cast<double>(landed)) <= 4 * sd);
    CHECK(landed > n * 99 / 100);
}

TEST_CASE("allocation view on T,T,H,H and tau(0) = T*") {
    const ChainSpec coin = ChainSpec::coin(q("1/2"));
    const EmbeddingProblem pb(coin, T, TargetMeasure::dirac(coin, H));
    const Trajectory t = Trajectory::from_fixture(coin, std::vector<State>{T, T, H, H}, 0, 1, 0);
    const AllocationView v = allocation_view(t, {0, 3}, pb);
    CHECK(v.tau.at(0) == 3);
    CHECK(v.tau.at(1) == 2);
    CHECK(v.frontier.empty());
    const AllocationView part = allocation_view(t, {0, 2}, pb);
    CHECK(part.tau.at(1) == 2);
    CHECK(part.frontier == std::vector<std::int64_t>{0});
}

TEST_CASE("property: allocation view is translation covariant and tau(0) = T*") {
    for (const auto& in : testing::excursion_instances()) {
        const EmbeddingProblem& pb = *in.problem;
        for (std::uint64_t r = 0; r < 40; ++r) {
            Trajectory t(*in.spec, pb.start(), 56, r);
            t.extend_to(-60);
            t.extend_to(300);
            const Window w{-60, 300};
            const AllocationView v = allocation_view(t, w, pb);
            Trajectory u = t;
            const auto star = solve_tstar(u, pb, 300);
            if (!star.censored) CHECK(v.tau.at(0) == star.time);

            // re-root at a white site z: tau shifts by -z
            std::vector<State> values;
            for (std::int64_t n = -60; n <= 300; ++n) values.push_back(t.at(n));
            for (const auto& [k, tk] : v.tau) {
                if (k % 7 != 0) continue;
                const Trajectory shifted = Trajectory::from_fixture(*in.spec, values, static_cast<std::size_t>(k + 60), 1, 0);
                const AllocationView vs = allocation_view(shifted, {w.lo - k, w.hi - k}, pb);
                CHECK(vs.tau.at(0) == tk - k);
            }
            for (const auto& [k, tk] : v.tau) {
                CHECK(tk >= k);
                CHECK(pb.target().weight(t.at(tk)) > 0);
            }
        }
    }
}

TEST_CASE("solver names round-trip") {
    for (const char* name : {"tstar", "trand", "tvisit", "tvisit:3", "composite", "mixture", "delayed"}) {
        CHECK(SolverSpec::parse(name).name() == name);
    }
    CHECK_THROWS_AS(SolverSpec::parse("tvisit:0"), Error);
    CHECK_THROWS_AS(SolverSpec::parse("optimal"), Error);
}

TEST_CASE("the delayed control is 1 + T* of the state reached at time 1") {
    const ChainSpec s = ChainSpec::three_state(q("1/3"));
    const EmbeddingProblem pb(s, 0, TargetMeasure::dirac(s, 2));
    for (std::uint64_t r = 0; r < 100; ++r) {
        Trajectory t(s, 0, 57, r);
        const auto res = solve_delayed(t, pb, 10000);
        if (res.censored) continue;
        const State x1 = t.at(1);
        CHECK(x1 == 1);
        CHECK(*brute_force_time(t, x1, pb.target(), 1, res.time) == res.time);
    }
}
