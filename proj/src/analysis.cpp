#include "skembed/analysis.hpp"

#include "skembed/error.hpp"
#include "skembed/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace skembed {

namespace {

template <class F>
auto fan_out(const RunOptions& run, F&& f) {
    if (run.replicas == 0) throw Error(ErrorCode::InvalidArgument, "at least one replica is required");
    if (run.cap < 1) throw Error(ErrorCode::InvalidArgument, "cap must be positive");
    return run.serial ? map_replicas_serial(run.replicas, f) : map_replicas(run.replicas, f, run.threads);
}

void check_censoring(std::uint64_t censored, std::uint64_t total, double limit, const char* what) {
    if (total > 0 && static_cast<double>(censored) > limit * static_cast<double>(total)) {
        throw Error(ErrorCode::ExcessCensoring, std::string(what) + ": " + std::to_string(censored) + " of " +
                                                    std::to_string(total) + " replicas censored");
    }
}

std::vector<std::int64_t> geometric_grid(std::int64_t upto, int per_decade) {
    std::vector<std::int64_t> grid;
    for (int k = 0;; ++k) {
        const auto n = static_cast<std::int64_t>(std::llround(std::pow(10.0, static_cast<double>(k) / per_decade)));
        if (n > upto) break;
        if (grid.empty() || n > grid.back()) grid.push_back(n);
    }
    return grid;
}

} // namespace

std::vector<SampleRecord> sample_times(const EmbeddingProblem& pb, const SolverSpec& solver, const RunOptions& run) {
    return fan_out(run, [&](std::uint64_t r) {
        ForwardWalker walker(pb.spec(), pb.start(), run.seed, r);
        const StoppingResult res = solve(walker, pb, solver, run.cap);
        SampleRecord rec;
        rec.replica = r;
        rec.time = res.time;
        rec.censored = res.censored;
        rec.landing = walker.extend_to(res.time);
        return rec;
    });
}

SampleRecord sample_fixture(const EmbeddingProblem& pb, const SolverSpec& solver, const std::vector<State>& values,
                            std::size_t origin_index, std::uint64_t seed, std::int64_t cap) {
    Trajectory traj = Trajectory::from_fixture(pb.spec(), values, origin_index, seed, 0);
    if (traj.origin() != pb.start()) throw Error(ErrorCode::InvalidFixture, "fixture origin is not the start state");
    const StoppingResult res = solve(traj, pb, solver, cap);
    return {0, res.time, traj.at(res.time), res.censored};
}

// ---------------------------------------------------------------- tails

TailEstimate tail_from_times(const std::vector<std::int64_t>& times, std::uint64_t censored, std::int64_t cap,
                             std::uint64_t seed, const TailOptions& options) {
    const std::size_t n = times.size();
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "no replicas");
    check_censoring(censored, n, options.max_censored, "tail estimate");

    TailEstimate est;
    est.cap = cap;
    est.replicas = n;
    est.censored = censored;
    est.seed = seed;
    est.fit_lo = options.fit_lo;
    est.fit_hi = options.fit_hi > 0 ? options.fit_hi : cap / 10;
    est.grid = geometric_grid(cap - 1, options.per_decade);

    const std::size_t g = est.grid.size();
    auto survivors = [&](std::vector<std::int64_t> sorted, std::vector<std::int64_t>& out) {
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t k = 0; k < g; ++k) {
            const auto it = std::upper_bound(sorted.begin(), sorted.end(), est.grid[k]);
            out[k] = static_cast<std::int64_t>(sorted.end() - it);
        }
    };

    std::vector<std::int64_t> total(g);
    survivors(times, total);
    est.survival.resize(g);
    for (std::size_t k = 0; k < g; ++k) est.survival[k] = static_cast<double>(total[k]) / static_cast<double>(n);
    for (std::size_t k = 1; k < g; ++k) {
        if (est.survival[k] > est.survival[k - 1]) throw std::logic_error("survival curve increased");
    }

    // contiguous replica blocks
    const std::size_t blocks = std::min(options.blocks, n);
    std::vector<std::vector<std::int64_t>> block_counts(blocks, std::vector<std::int64_t>(g));
    std::vector<std::int64_t> block_sizes(blocks);
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t lo = b * n / blocks, hi = (b + 1) * n / blocks;
        block_sizes[b] = static_cast<std::int64_t>(hi - lo);
        survivors(std::vector<std::int64_t>(times.begin() + static_cast<std::ptrdiff_t>(lo),
                                            times.begin() + static_cast<std::ptrdiff_t>(hi)),
                  block_counts[b]);
    }

    std::vector<std::size_t> fit_index;
    for (std::size_t k = 0; k < g; ++k) {
        if (est.grid[k] >= est.fit_lo && est.grid[k] <= est.fit_hi && total[k] > 0) fit_index.push_back(k);
    }
    // A degenerate curve (e.g. T bounded below fit_lo) has nothing to fit; the
    // slope stays NaN and the survival curve is still reported.
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    est.fit = LineFit{nan, nan, nan, 0};
    est.slope_ci = {nan, nan};
    if (fit_index.size() < 2) return est;

    // bootstrap replicates of log survival at the fit points
    std::vector<std::vector<double>> replicates; // [resample][fit point]
    block_bootstrap(blocks, options.resamples, seed, [&](const std::vector<std::size_t>& chosen) {
        std::vector<double> logs(fit_index.size());
        std::int64_t size = 0;
        std::vector<std::int64_t> counts(fit_index.size(), 0);
        for (const std::size_t b : chosen) {
            size += block_sizes[b];
            for (std::size_t f = 0; f < fit_index.size(); ++f) counts[f] += block_counts[b][fit_index[f]];
        }
        for (std::size_t f = 0; f < fit_index.size(); ++f) {
            logs[f] = counts[f] > 0 ? std::log(static_cast<double>(counts[f]) / static_cast<double>(size))
                                    : std::numeric_limits<double>::quiet_NaN();
        }
        replicates.push_back(std::move(logs));
        return 0.0;
    });

    std::vector<double> xs, ys, ws;
    std::vector<std::size_t> used; // positions within fit_index
    for (std::size_t f = 0; f < fit_index.size(); ++f) {
        double sum = 0, sum2 = 0;
        std::size_t m = 0;
        for (const auto& rep : replicates) {
            if (std::isnan(rep[f])) continue;
            sum += rep[f];
            sum2 += rep[f] * rep[f];
            ++m;
        }
        if (m < 2) continue;
        const double var = (sum2 - sum * sum / static_cast<double>(m)) / static_cast<double>(m - 1);
        if (!(var > 0)) continue;
        const std::size_t k = fit_index[f];
        xs.push_back(std::log(static_cast<double>(est.grid[k])));
        ys.push_back(std::log(est.survival[k]));
        ws.push_back(1.0 / var);
        used.push_back(f);
    }
    if (xs.size() < 2) return est;
    est.fit = weighted_least_squares(xs, ys, ws);

    std::vector<double> slopes;
    for (const auto& rep : replicates) {
        std::vector<double> yb;
        bool ok = true;
        for (const std::size_t f : used) {
            if (std::isnan(rep[f])) {
                ok = false;
                break;
            }
            yb.push_back(rep[f]);
        }
        if (ok) slopes.push_back(weighted_least_squares(xs, yb, ws).slope);
    }
    if (!slopes.empty()) est.slope_ci = {quantile(slopes, 0.025), quantile(slopes, 0.975)};
    return est;
}

TailEstimate estimate_tail(const EmbeddingProblem& pb, const SolverSpec& solver, const RunOptions& run,
                           const TailOptions& options) {
    const auto records = sample_times(pb, solver, run);
    std::vector<std::int64_t> times;
    times.reserve(records.size());
    std::uint64_t censored = 0;
    for (const auto& r : records) {
        times.push_back(r.censored ? run.cap : r.time);
        censored += r.censored ? 1 : 0;
    }
    return tail_from_times(times, censored, run.cap, run.seed, options);
}

// ------------------------------------------------------- first passage

IncrementLaw IncrementLaw::fair_pm1() {
    IncrementLaw law;
    law.probabilities = {{-1, Rational(1, 2)}, {1, Rational(1, 2)}};
    return law;
}

IncrementLaw IncrementLaw::from_strings(const std::map<std::string, std::string>& table) {
    IncrementLaw law;
    for (const auto& [k, v] : table) {
        const Rational step = parse_rational(k);
        if (!is_integer(step)) throw Error(ErrorCode::InvalidConfig, "increment '" + k + "' is not an integer");
        law.probabilities[to_int64(step)] += parse_rational(v);
    }
    law.validate();
    return law;
}

void IncrementLaw::validate() const {
    Rational total = 0;
    for (const auto& [k, p] : probabilities) {
        if (p < 0) throw Error(ErrorCode::InvalidArgument, "negative increment probability");
        total += p;
    }
    if (total != 1) throw Error(ErrorCode::InvalidArgument, "increment probabilities sum to " + to_string(total));
}

bool IncrementLaw::skip_free() const {
    for (const auto& [k, p] : probabilities) {
        if (k > 1 && p > 0) return false;
    }
    return true;
}

Rational IncrementLaw::mean() const {
    Rational m = 0;
    for (const auto& [k, p] : probabilities) m += p * Rational(static_cast<long>(k));
    return m;
}

std::vector<Rational> first_passage_exact(const IncrementLaw& law, std::int64_t n_max) {
    law.validate();
    // distribution of S_n on {N > n}, i.e. on the positive half-line
    std::map<std::int64_t, Rational> alive{{0, Rational(1)}};
    std::vector<Rational> out;
    for (std::int64_t n = 1; n <= n_max; ++n) {
        std::map<std::int64_t, Rational> next;
        Rational absorbed = 0;
        for (const auto& [s, ps] : alive) {
            for (const auto& [k, pk] : law.probabilities) {
                if (pk == 0) continue;
                const Rational mass = ps * pk;
                if (s + k <= 0) {
                    absorbed += mass;
                } else {
                    next[s + k] += mass;
                }
            }
        }
        out.push_back(absorbed);
        alive.swap(next);
    }
    return out;
}

TailEstimate first_passage_oracle(const IncrementLaw& law, const RunOptions& run, const TailOptions& options) {
    law.validate();
    std::vector<std::int64_t> values;
    std::vector<double> cdf;
    double acc = 0.0;
    for (const auto& [k, p] : law.probabilities) {
        if (p == 0) continue;
        values.push_back(k);
        acc += to_double(p);
        cdf.push_back(acc);
    }
    cdf.back() = 1.0;

    struct Outcome {
        std::int64_t n;
        bool censored;
    };
    const auto outcomes = fan_out(run, [&](std::uint64_t r) {
        CounterRng rng(run.seed, r, Substream::Forward);
        std::int64_t s = 0;
        for (std::int64_t n = 1; n <= run.cap; ++n) {
            const double u = rng.uniform();
            std::size_t k = 0;
            while (u >= cdf[k]) ++k;
            s += values[k];
            if (s <= 0) return Outcome{n, false};
        }
        return Outcome{run.cap, true};
    });
    std::vector<std::int64_t> times;
    std::uint64_t censored = 0;
    for (const auto& o : outcomes) {
        times.push_back(o.n);
        censored += o.censored ? 1 : 0;
    }
    return tail_from_times(times, censored, run.cap, run.seed, options);
}

ChainPassageReport first_passage_oracle(const EmbeddingProblem& pb, const RunOptions& run,
                                        const TailOptions& options) {
    detail::require_tstar(pb);
    const BallRatios& ratios = pb.ratios();
    const State i = pb.start();
    // blocks are counted against the cap; the raw step count gets a generous
    // multiple of it so heavy-tailed return times cannot stall a replica
    const std::int64_t step_cap = run.cap * 100;

    struct Outcome {
        std::int64_t n;
        bool censored;
        bool checked;
    };
    const auto outcomes = fan_out(run, [&](std::uint64_t r) {
        ForwardWalker walker(pb.spec(), i, run.seed, r);
        std::int64_t deficit = 0, whites = 0, block = 0, walk = 0, blocks = 0;
        std::int64_t tstar = -1, whites_at_tstar = 0;
        for (std::int64_t t = 0; t <= step_cap; ++t) {
            const State s = walker.extend_to(t);
            if (s == i && t > 0) {
                walk += block;
                ++blocks;
                block = 0;
                if (walk <= 0) {
                    if (tstar < 0) throw std::logic_error("first passage found before T*");
                    if (whites_at_tstar < blocks - 1) throw std::logic_error("m_i L^i([0,T*]) < N - 1");
                    return Outcome{blocks, false, true};
                }
                if (blocks >= run.cap) break;
            }
            const std::int64_t step = ratios.step(s);
            block += step;
            if (s == i) ++whites;
            deficit += step;
            if (tstar < 0 && deficit <= 0) {
                tstar = t;
                whites_at_tstar = whites;
            }
        }
        return Outcome{run.cap, true, false};
    });
    ChainPassageReport report;
    std::vector<std::int64_t> times;
    std::uint64_t censored = 0;
    for (const auto& o : outcomes) {
        times.push_back(o.n);
        censored += o.censored ? 1 : 0;
        report.checked += o.checked ? 1 : 0;
    }
    report.tail = tail_from_times(times, censored, run.cap, run.seed, options);
    return report;
}

// ------------------------------------------------------------- moments

std::string_view to_string(MomentFunctional f) noexcept {
    return f == MomentFunctional::RawPower ? "T^beta" : "a(T)^beta";
}

MomentEstimate moment_from_times(const std::vector<std::int64_t>& times, std::uint64_t censored, double beta,
                                 MomentFunctional functional, const GreenCurve* green, const MomentOptions& options,
                                 std::int64_t cap, std::uint64_t seed) {
    if (beta < 0) throw Error(ErrorCode::InvalidArgument, "beta must be non-negative");
    if (times.size() < 4) throw Error(ErrorCode::InvalidArgument, "moment estimate needs at least four replicas");
    if (functional == MomentFunctional::GreenPower && green == nullptr) {
        throw Error(ErrorCode::InvalidArgument, "a(T)^beta needs a Green curve");
    }
    check_censoring(censored, times.size(), options.max_censored, "moment estimate");
    MomentEstimate est;
    est.beta = beta;
    est.functional = functional;
    est.censored = censored;
    est.lower_bound = censored > 0;
    est.cap = cap;
    est.seed = seed;

    std::vector<double> values;
    values.reserve(times.size());
    for (const std::int64_t t : times) {
        const double base = functional == MomentFunctional::RawPower ? static_cast<double>(t) : (*green)(t);
        values.push_back(beta == 0.0 ? 1.0 : std::pow(base, beta));
    }
    const std::uint64_t n = times.size();
    est.sizes = {n / 4, n / 2, n};
    for (const std::uint64_t m : est.sizes) {
        const std::vector<double> prefix(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(m));
        est.means.push_back(stable_sum(prefix) / static_cast<double>(m));
    }
    est.divergent = true;
    est.finite = true;
    for (std::size_t k = 1; k < est.means.size(); ++k) {
        const double change = est.means[k] / est.means[k - 1] - 1.0;
        est.changes.push_back(change);
        est.divergent = est.divergent && change > options.growth_threshold;
        est.finite = est.finite && std::abs(change) <= options.stability_threshold;
    }
    return est;
}

std::vector<MomentEstimate> estimate_moments(const EmbeddingProblem& pb, const SolverSpec& solver,
                                             const std::vector<double>& betas, MomentFunctional functional,
                                             const RunOptions& run, const MomentOptions& options) {
    std::optional<GreenCurve> green;
    if (functional == MomentFunctional::GreenPower) green.emplace(pb.spec(), pb.start(), pb.start(), run.cap);
    const auto records = sample_times(pb, solver, run);
    std::vector<std::int64_t> times;
    std::uint64_t censored = 0;
    for (const auto& r : records) {
        times.push_back(r.censored ? run.cap : r.time);
        censored += r.censored ? 1 : 0;
    }
    std::vector<MomentEstimate> out;
    for (const double beta : betas) {
        out.push_back(moment_from_times(times, censored, beta, functional, green ? &*green : nullptr, options,
                                        run.cap, run.seed));
    }
    return out;
}

// ------------------------------------------------------- shifted law

bool ShiftedLawReport::marginal_passed() const {
    if (marginal_exact) return *marginal_exact;
    return marginal.p_value > alpha;
}

ShiftedLawReport verify_shifted_law(const EmbeddingProblem& pb, const SolverSpec& solver, const RunOptions& run,
                                    const ShiftedLawOptions& options) {
    const std::int64_t k = options.lags;
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "at least one lag is required");
    struct Outcome {
        bool censored;
        std::vector<State> window; // X_{T-K} .. X_{T+K}
    };
    const auto outcomes = fan_out(run, [&](std::uint64_t r) {
        Trajectory traj(pb.spec(), pb.start(), run.seed, r);
        const StoppingResult res = solve(traj, pb, solver, run.cap);
        Outcome o{res.censored, {}};
        if (res.censored) return o;
        o.window.reserve(static_cast<std::size_t>(2 * k + 1));
        for (std::int64_t n = res.time - k; n <= res.time + k; ++n) o.window.push_back(traj.extend_to(n));
        return o;
    });

    ShiftedLawReport rep;
    rep.solver = solver.name();
    rep.replicas = run.replicas;
    rep.cap = run.cap;
    rep.seed = run.seed;
    rep.alpha = options.alpha;

    using Counts = std::map<State, std::map<State, std::int64_t>>;
    std::vector<Counts> fwd(static_cast<std::size_t>(k)), bwd(static_cast<std::size_t>(k));
    for (const auto& o : outcomes) {
        if (o.censored) {
            ++rep.censored;
            continue;
        }
        const auto at = [&](std::int64_t n) { return o.window[static_cast<std::size_t>(n + k)]; };
        ++rep.landing_counts[at(0)];
        for (std::int64_t n = 1; n <= k; ++n) {
            ++fwd[static_cast<std::size_t>(n - 1)][at(n - 1)][at(n)];
            ++bwd[static_cast<std::size_t>(n - 1)][at(-n + 1)][at(-n)];
        }
    }
    check_censoring(rep.censored, run.replicas, options.max_censored, "shifted-law test");

    const ChainSpec& spec = pb.spec();
    std::map<std::int64_t, double> nu;
    for (const auto& [s, w] : pb.target().weights()) nu[s] = to_double(w);
    std::map<std::int64_t, std::int64_t> landing(rep.landing_counts.begin(), rep.landing_counts.end());
    rep.marginal = chi_square_gof(landing, nu);
    if (pb.target().is_dirac()) {
        const State target = pb.target().support().front();
        rep.marginal_exact = rep.landing_counts.size() <= 1 &&
                             (rep.landing_counts.empty() || rep.landing_counts.begin()->first == target);
    }

    auto lag_test = [&](const Counts& counts, bool backward) {
        ChiSquareResult total;
        for (const auto& [from, row] : counts) {
            std::map<std::int64_t, std::int64_t> observed(row.begin(), row.end());
            std::map<std::int64_t, double> probs;
            for (const State to : backward ? spec.dual_successors(from) : spec.successors(from)) {
                probs[to] = backward ? spec.dual_probability(from, to) : spec.transition_probability(from, to);
            }
            total += chi_square_gof(observed, probs);
        }
        total.finalize();
        return total;
    };
    for (std::int64_t n = 1; n <= k; ++n) {
        LagTest f{n, lag_test(fwd[static_cast<std::size_t>(n - 1)], false)};
        LagTest b{-n, lag_test(bwd[static_cast<std::size_t>(n - 1)], true)};
        rep.forward_total += f.result;
        rep.backward_total += b.result;
        rep.forward.push_back(f);
        rep.backward.push_back(b);
    }
    rep.forward_total.finalize();
    rep.backward_total.finalize();
    return rep;
}

// ----------------------------------------------------------- optimality

ComparisonReport compare_optimality(const EmbeddingProblem& pb, const std::vector<SolverSpec>& alternatives,
                                    const std::vector<CostFunction>& psis, const RunOptions& run,
                                    const CompareOptions& options) {
    if (psis.empty()) throw Error(ErrorCode::InvalidArgument, "the cost-function set is empty");
    if (alternatives.empty()) throw Error(ErrorCode::InvalidArgument, "no alternative solvers given");
    detail::require_tstar(pb);

    ComparisonReport report;
    report.replicas = run.replicas;
    report.cap = run.cap;
    report.seed = run.seed;
    for (const auto& alt : alternatives) {
        ComparisonArm arm;
        arm.solver = alt.name();
        if (options.validate) {
            arm.validation = verify_shifted_law(pb, alt, run, options.validation);
            if (!arm.validation->passed()) {
                throw Error(ErrorCode::InvalidAlternative,
                            "alternative '" + arm.solver + "' fails the shifted-law test");
            }
        }
        report.arms.push_back(std::move(arm));
    }

    struct Outcome {
        std::vector<std::int64_t> times; // [0] = T*, then one per alternative
        std::vector<char> censored;
    };
    const auto outcomes = fan_out(run, [&](std::uint64_t r) {
        Trajectory traj(pb.spec(), pb.start(), run.seed, r);
        Outcome o;
        const StoppingResult base = solve_tstar(traj, pb, run.cap);
        o.times.push_back(base.time);
        o.censored.push_back(base.censored);
        for (const auto& alt : alternatives) {
            const StoppingResult res = solve(traj, pb, alt, run.cap);
            o.times.push_back(res.time);
            o.censored.push_back(res.censored);
        }
        return o;
    });
    for (const auto& o : outcomes) report.censored_tstar += o.censored[0] ? 1 : 0;

    const std::size_t n = outcomes.size();
    const std::size_t blocks = std::min(options.blocks, n);
    const double tail = (1.0 - options.level) / 2.0;
    for (std::size_t a = 0; a < alternatives.size(); ++a) {
        ComparisonArm& arm = report.arms[a];
        for (const auto& o : outcomes) arm.censored += o.censored[a + 1] ? 1 : 0;
        for (std::size_t p = 0; p < psis.size(); ++p) {
            const CostFunction& psi = psis[p];
            const double ceiling = psi(run.cap);
            std::vector<double> base(n), alt(n), diff(n);
            for (std::size_t r = 0; r < n; ++r) {
                base[r] = std::min(psi(outcomes[r].times[0]), ceiling);
                alt[r] = std::min(psi(outcomes[r].times[a + 1]), ceiling);
                diff[r] = alt[r] - base[r];
            }
            CostComparison c;
            c.psi = psi.name();
            c.mean_tstar = stable_sum(base) / static_cast<double>(n);
            c.mean_alternative = stable_sum(alt) / static_cast<double>(n);
            c.mean_difference = stable_sum(diff) / static_cast<double>(n);

            std::vector<double> block_sum(blocks);
            std::vector<double> block_size(blocks);
            for (std::size_t b = 0; b < blocks; ++b) {
                const std::size_t lo = b * n / blocks, hi = (b + 1) * n / blocks;
                block_sum[b] = stable_sum(std::vector<double>(diff.begin() + static_cast<std::ptrdiff_t>(lo),
                                                              diff.begin() + static_cast<std::ptrdiff_t>(hi)));
                block_size[b] = static_cast<double>(hi - lo);
            }
            const std::uint64_t boot_seed = mix64(run.seed ^ mix64(0xC0FFEEULL + 1000 * a + p));
            const auto means = block_bootstrap(blocks, options.resamples, boot_seed, [&](const auto& chosen) {
                double s = 0, m = 0;
                for (const std::size_t b : chosen) {
                    s += block_sum[b];
                    m += block_size[b];
                }
                return s / m;
            });
            c.ci = {quantile(means, tail), quantile(means, 1.0 - tail)};
            c.consistent = c.ci.hi >= 0.0;
            c.excludes_negative = c.ci.lo >= 0.0;
            arm.costs.push_back(c);
        }
    }
    return report;
}

} // namespace skembed
