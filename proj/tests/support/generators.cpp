#include "generators.hpp"

#include <numeric>
#include <stdexcept>

namespace skembed::testing {

Instance make_instance(std::string name, ChainSpec spec, const std::string& start,
                       const std::map<std::string, Rational>& target) {
    Instance in;
    in.name = std::move(name);
    auto owned = std::make_shared<const ChainSpec>(std::move(spec));
    std::map<State, Rational> w;
    for (const auto& [label, x] : target) w[owned->state(label)] = x;
    in.problem = std::make_shared<const EmbeddingProblem>(*owned, owned->state(start),
                                                          TargetMeasure::from_weights(*owned, w));
    in.spec = std::move(owned);
    return in;
}

std::vector<Instance> excursion_instances() {
    std::vector<Instance> out;
    for (const char* p : {"1/2", "1/3", "1/4"}) {
        out.push_back(make_instance(std::string("coin p=") + p, ChainSpec::coin(Rational(p)), "tail", {{"head", 1}}));
    }
    for (const char* p : {"1/3", "1/2"}) {
        out.push_back(make_instance(std::string("three-state p=") + p, ChainSpec::three_state(Rational(p)), "1",
                                    {{"3", 1}}));
    }
    return out;
}

ChainSpec random_chain(CounterRng& rng, std::size_t n) {
    // A cycle keeps it irreducible; extra entries get random small weights.
    TransitionMatrix p(n, std::vector<Rational>(n, 0));
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<long> w(n, 0);
        w[(i + 1) % n] = 1 + static_cast<long>(rng.below(4));
        for (std::size_t j = 0; j < n; ++j) {
            if (rng.below(2) == 0) w[j] += static_cast<long>(rng.below(4));
        }
        const long total = std::accumulate(w.begin(), w.end(), 0L);
        for (std::size_t j = 0; j < n; ++j) p[i][j] = Rational(w[j], total);
        for (auto& x : p[i]) x.canonicalize();
    }
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < n; ++i) labels.push_back("s" + std::to_string(i));
    return ChainSpec::finite_matrix(labels, std::move(p));
}

std::map<State, Rational> random_target(CounterRng& rng, const ChainSpec& spec) {
    const auto n = spec.num_states();
    std::map<State, Rational> out;
    long total = 0;
    std::map<State, long> w;
    for (std::size_t j = 0; j < n; ++j) {
        if (rng.below(2) == 0) {
            w[static_cast<State>(j)] = 1 + static_cast<long>(rng.below(3));
            total += w[static_cast<State>(j)];
        }
    }
    if (w.empty()) {
        const auto j = static_cast<State>(rng.below(n));
        w[j] = 1;
        total = 1;
    }
    for (const auto& [j, x] : w) {
        Rational r(x, total);
        r.canonicalize();
        out[j] = r;
    }
    return out;
}

std::vector<ExcursionCase> excursion_corpus(const std::vector<Instance>& instances, std::size_t count,
                                            std::uint64_t seed, std::int64_t cap) {
    std::vector<ExcursionCase> out;
    for (std::uint64_t replica = 0; out.size() < count; ++replica) {
        if (replica > 100 * count) throw std::runtime_error("excursion corpus: too many oversized excursions");
        const Instance& in = instances[replica % instances.size()];
        auto traj = std::make_shared<Trajectory>(*in.spec, in.problem->start(), seed, replica);
        auto inner = find_excursion_around(*traj, 0, *in.problem, cap, 1);
        if (!inner) continue;
        auto outer = find_excursion_around(*traj, 0, *in.problem, cap, 3);
        if (!outer) continue;
        out.push_back({&in, seed, replica, traj, std::move(*inner), std::move(*outer)});
    }
    return out;
}

TransportRule random_balancing(const BallConfig& balls, CounterRng& rng, int max_parts) {
    const Window w = balls.window();
    const int parts = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_parts)));

    std::vector<long> weights;
    for (int k = 0; k < parts; ++k) weights.push_back(1 + static_cast<long>(rng.below(5)));
    const long total = std::accumulate(weights.begin(), weights.end(), 0L);

    TransportRule theta(w);
    for (std::int64_t x = w.lo; x <= w.hi; ++x) {
        if (!balls.at(x).white) theta.set(x, x, 1);
    }
    for (int k = 0; k < parts; ++k) {
        Rational share(weights[static_cast<std::size_t>(k)], total);
        share.canonicalize();
        std::vector<std::int64_t> free;
        for (std::int64_t x = w.lo; x <= w.hi; ++x) {
            const BallSite& site = balls.at(x);
            for (std::int64_t ball = 0; ball < site.coloured; ++ball) {
                if (free.empty()) throw std::logic_error("coloured ball without a white to its left");
                const auto pick = static_cast<std::size_t>(rng.below(free.size()));
                theta.add(free[pick], x, share);
                free.erase(free.begin() + static_cast<std::ptrdiff_t>(pick));
            }
            if (site.white) free.push_back(x);
        }
        if (!free.empty()) throw std::logic_error("white ball left unmatched in the window");
    }
    return theta;
}

CostFunction random_cost(CounterRng& rng) {
    switch (rng.below(4)) {
    case 0: return CostFunction::sqrt();
    case 1: return CostFunction::log1p();
    case 2: return CostFunction::power(0.05 + 0.95 * rng.uniform());
    default: return CostFunction::capped_linear(1 + static_cast<std::int64_t>(rng.below(50)));
    }
}

} // namespace skembed::testing
