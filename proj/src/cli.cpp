#include "skembed/cli.hpp"

#include "skembed/config.hpp"
#include "skembed/error.hpp"
#include "skembed/report.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace skembed {

namespace {

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> replicas;
    std::optional<std::int64_t> cap;
    std::optional<int> threads;
    std::optional<std::string> out_dir;
    std::optional<std::string> format;
    bool serial = false;
};

struct Output {
    std::string text;
    std::string extension;
};

class Command {
public:
    Command(std::string name, const Overrides& o) : name_(std::move(name)), cfg_(load_config(o.config)) {
        if (o.seed) cfg_.seed = o.seed;
        if (o.replicas) cfg_.replicas = *o.replicas;
        if (o.cap) cfg_.cap = *o.cap;
        if (o.threads) cfg_.threads = *o.threads;
        if (o.out_dir) cfg_.out_dir = *o.out_dir;
        if (o.format) cfg_.format = *o.format;
        if (cfg_.replicas == 0) throw Error(ErrorCode::InvalidConfig, "replicas must be positive");
        if (cfg_.cap <= 0) throw Error(ErrorCode::InvalidConfig, "cap must be positive");
        if (cfg_.threads < 0) throw Error(ErrorCode::InvalidConfig, "threads must be non-negative");
        serial_ = o.serial;
    }

    const ExperimentConfig& cfg() const { return cfg_; }
    std::string format(const char* fallback) const { return cfg_.format.value_or(fallback); }

    RunOptions run() const {
        RunOptions r = cfg_.run();
        r.serial = serial_;
        return r;
    }

    /// Problem with the feasibility gate: infeasible targets end the command
    /// with a domain-negative exit before any sampling.
    std::optional<EmbeddingProblem> feasible_problem(std::ostream& err) const {
        EmbeddingProblem pb = cfg_.problem();
        if (!pb.verdict().feasible) {
            err << "infeasible: " << to_string(pb.verdict().reason);
            if (pb.verdict().at) err << " at " << pb.spec().label(*pb.verdict().at);
            err << '\n';
            return std::nullopt;
        }
        return pb;
    }

    void emit(const Output& o, std::ostream& out) const {
        if (!cfg_.out_dir) {
            out << o.text;
            return;
        }
        std::filesystem::create_directories(*cfg_.out_dir);
        const auto path = *cfg_.out_dir / (name_ + "." + o.extension);
        std::ofstream f(path, std::ios::binary);
        if (!f) throw Error(ErrorCode::InvalidConfig, "cannot write '" + path.string() + "'");
        f << o.text;
    }

    Json header() const { return report_header(name_, run()); }

private:
    std::string name_;
    ExperimentConfig cfg_;
    bool serial_ = false;
};

Output json_output(const Json& j) { return {j.dump(2) + "\n", "json"}; }

TailOptions tail_options(const ExperimentConfig& cfg) { return cfg.tail; }

bool slope_ok(const ExperimentConfig& cfg, double slope) {
    return !cfg.expect_slope || std::abs(slope - *cfg.expect_slope) <= cfg.slope_tolerance;
}

Json slope_check(const ExperimentConfig& cfg, const TailEstimate& t) {
    Json j;
    if (cfg.expect_slope) {
        j["expected_slope"] = *cfg.expect_slope;
        j["tolerance"] = cfg.slope_tolerance;
        j["passed"] = slope_ok(cfg, t.fit.slope);
    }
    return j;
}

int cmd_check(const Command& c, std::ostream& out) {
    const EmbeddingProblem pb = c.cfg().problem();
    Json j;
    j["version"] = kVersion;
    j["command"] = "check";
    j["chain"] = chain_to_json(pb.spec());
    j["initial"] = pb.spec().label(pb.start());
    j["result"] = to_json(pb.verdict(), pb.spec());
    c.emit(json_output(j), out);
    return pb.verdict().feasible ? ExitPass : ExitNegative;
}

int cmd_sample(const Command& c, std::ostream& out, std::ostream& err) {
    const auto pb = c.feasible_problem(err);
    if (!pb) return ExitNegative;
    const ExperimentConfig& cfg = c.cfg();
    const RunOptions run = c.run();

    std::vector<SampleRecord> samples;
    if (cfg.fixture) {
        const Fixture fx = load_fixture(*cfg.fixture);
        std::vector<State> values;
        for (const auto& label : fx.labels) values.push_back(pb->spec().state(label));
        samples.push_back(sample_fixture(*pb, cfg.solver, values, fx.origin_index, run.seed, run.cap));
    } else {
        samples = sample_times(*pb, cfg.solver, run);
    }

    if (c.format("csv") == "csv") {
        std::ostringstream s;
        write_samples_csv(s, samples, pb->spec());
        c.emit({s.str(), "csv"}, out);
        return ExitPass;
    }
    Json j = c.header();
    Json records = Json::array();
    for (const auto& s : samples) {
        StoppingResult r;
        r.solver = cfg.solver.name();
        r.time = s.time;
        r.censored = s.censored;
        r.seed = run.seed;
        r.replica = s.replica;
        Json rec = to_json(r);
        if (!s.censored) rec["X_T"] = pb->spec().label(s.landing);
        records.push_back(std::move(rec));
    }
    j["results"] = std::move(records);
    c.emit(json_output(j), out);
    return ExitPass;
}

int cmd_verify(const Command& c, std::ostream& out, std::ostream& err) {
    const auto pb = c.feasible_problem(err);
    if (!pb) return ExitNegative;
    ShiftedLawOptions opts;
    opts.lags = c.cfg().lags;
    opts.alpha = c.cfg().alpha;
    const ShiftedLawReport report = verify_shifted_law(*pb, c.cfg().solver, c.run(), opts);
    Json j = c.header();
    j["chain"] = chain_to_json(pb->spec());
    j["initial"] = pb->spec().label(pb->start());
    j["report"] = to_json(report, pb->spec());
    c.emit(json_output(j), out);
    return report.passed() ? ExitPass : ExitNegative;
}

int cmd_tail(const Command& c, std::ostream& out, std::ostream& err) {
    const auto pb = c.feasible_problem(err);
    if (!pb) return ExitNegative;
    const TailEstimate t = estimate_tail(*pb, c.cfg().solver, c.run(), tail_options(c.cfg()));
    if (c.format("json") == "csv") {
        std::ostringstream s;
        write_survival_csv(s, t);
        c.emit({s.str(), "csv"}, out);
    } else {
        Json j = c.header();
        j["solver"] = c.cfg().solver.name();
        j["tail"] = to_json(t);
        j["check"] = slope_check(c.cfg(), t);
        c.emit(json_output(j), out);
    }
    return slope_ok(c.cfg(), t.fit.slope) ? ExitPass : ExitNegative;
}

int cmd_moment(const Command& c, std::ostream& out, std::ostream& err) {
    if (c.cfg().betas.empty()) throw Error(ErrorCode::InvalidConfig, "moment needs a non-empty betas list");
    const auto pb = c.feasible_problem(err);
    if (!pb) return ExitNegative;
    const auto moments = estimate_moments(*pb, c.cfg().solver, c.cfg().betas, c.cfg().functional, c.run());
    bool ok = true;
    Json checks = Json::array();
    for (const auto& m : moments) {
        const auto it = c.cfg().expect_moments.find(m.beta);
        if (it == c.cfg().expect_moments.end()) continue;
        const bool passed = it->second == "finite" ? m.finite : m.divergent;
        ok = ok && passed;
        checks.push_back({{"beta", m.beta}, {"expected", it->second}, {"passed", passed}});
    }
    if (c.format("json") == "csv") {
        std::ostringstream s;
        write_moments_csv(s, moments);
        c.emit({s.str(), "csv"}, out);
    } else {
        Json j = c.header();
        j["solver"] = c.cfg().solver.name();
        Json list = Json::array();
        for (const auto& m : moments) list.push_back(to_json(m));
        j["moments"] = std::move(list);
        j["checks"] = std::move(checks);
        c.emit(json_output(j), out);
    }
    return ok ? ExitPass : ExitNegative;
}

int cmd_compare(const Command& c, std::ostream& out, std::ostream& err) {
    if (c.cfg().psi.empty()) throw Error(ErrorCode::InvalidConfig, "compare needs a non-empty psi set");
    if (c.cfg().alternatives.empty()) throw Error(ErrorCode::InvalidConfig, "compare needs at least one alternative");
    const auto pb = c.feasible_problem(err);
    if (!pb) return ExitNegative;
    CompareOptions opts;
    opts.validation.lags = c.cfg().lags;
    opts.validation.alpha = c.cfg().alpha;
    const ComparisonReport r = compare_optimality(*pb, c.cfg().alternatives, c.cfg().psi, c.run(), opts);
    bool ok = true;
    for (const auto& arm : r.arms) {
        for (const auto& cost : arm.costs) ok = ok && cost.consistent;
    }
    Json j = c.header();
    j["comparison"] = to_json(r);
    j["consistent"] = ok;
    c.emit(json_output(j), out);
    return ok ? ExitPass : ExitNegative;
}

int cmd_oracle(const Command& c, std::ostream& out, std::ostream& err) {
    const ExperimentConfig& cfg = c.cfg();
    Json j = c.header();
    TailEstimate tail;
    if (cfg.increments) {
        tail = first_passage_oracle(*cfg.increments, c.run(), tail_options(cfg));
        Json exact = Json::array();
        const auto probs = first_passage_exact(*cfg.increments, cfg.exact_depth);
        for (std::size_t n = 0; n < probs.size(); ++n) {
            exact.push_back({{"n", n + 1}, {"probability", to_string(probs[n])}});
        }
        j["source"] = "increments";
        j["exact"] = std::move(exact);
    } else {
        const auto pb = c.feasible_problem(err);
        if (!pb) return ExitNegative;
        const ChainPassageReport r = first_passage_oracle(*pb, c.run(), tail_options(cfg));
        tail = r.tail;
        j["source"] = "chain";
        j["checked"] = r.checked;
    }
    if (c.format("json") == "csv") {
        std::ostringstream s;
        write_survival_csv(s, tail);
        c.emit({s.str(), "csv"}, out);
    } else {
        j["tail"] = to_json(tail);
        j["check"] = slope_check(cfg, tail);
        c.emit(json_output(j), out);
    }
    return slope_ok(cfg, tail.fit.slope) ? ExitPass : ExitNegative;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Skorokhod embedding experiments for Markov chains", "skembed"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    Overrides o;
    const std::vector<std::pair<const char*, const char*>> commands = {
        {"check", "integrality check of the target"},
        {"sample", "stopping times per replica (CSV)"},
        {"verify", "chi-square test of the shifted law"},
        {"tail", "survival curve and log-log tail slope"},
        {"moment", "running-mean moment diagnostics"},
        {"compare", "concave-cost comparison against alternative solvers"},
        {"oracle", "first-passage oracle for skip-free walks"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", o.config, "experiment file (.toml or .json)")->required();
        sub->add_option("--seed", o.seed, "master seed");
        sub->add_option("--replicas", o.replicas, "number of replicas N");
        sub->add_option("--cap", o.cap, "censoring cap");
        sub->add_option("--threads", o.threads, "worker threads (0: default)");
        sub->add_option("--out-dir", o.out_dir, "write <command>.<ext> here instead of stdout");
        sub->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
        sub->add_flag("--serial", o.serial, "use the serial reference path");
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ExitPass;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return ExitPass;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return ExitError;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        const Command c(name, o);
        if (name == "check") return cmd_check(c, out);
        if (name == "sample") return cmd_sample(c, out, err);
        if (name == "verify") return cmd_verify(c, out, err);
        if (name == "tail") return cmd_tail(c, out, err);
        if (name == "moment") return cmd_moment(c, out, err);
        if (name == "compare") return cmd_compare(c, out, err);
        return cmd_oracle(c, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return ExitError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return ExitError;
    }
}

} // namespace skembed
