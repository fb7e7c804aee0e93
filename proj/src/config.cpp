#include "skembed/config.hpp"

#include "skembed/error.hpp"

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace skembed {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); }

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json node_to_json(const toml::node& node) {
    if (const auto* t = node.as_table()) {
        json out = json::object();
        for (const auto& [k, v] : *t) out[std::string(k.str())] = node_to_json(v);
        return out;
    }
    if (const auto* a = node.as_array()) {
        json out = json::array();
        for (const auto& v : *a) out.push_back(node_to_json(v));
        return out;
    }
    if (const auto* s = node.as_string()) return s->get();
    if (const auto* i = node.as_integer()) return i->get();
    if (const auto* f = node.as_floating_point()) return f->get();
    if (const auto* b = node.as_boolean()) return b->get();
    bad("unsupported TOML value (dates and times are not accepted)");
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) bad(where + " must be a table");
    for (const auto& [k, v] : obj.items()) {
        if (!allowed.count(k)) bad("unknown key '" + k + "' in " + where);
    }
}

// Rational from a string, integer or float; floats mark the value inexact.
Rational rational_value(const json& v, const std::string& what, bool& inexact) {
    if (v.is_string()) {
        try {
            return parse_rational(v.get<std::string>());
        } catch (const std::exception&) {
            bad(what + ": '" + v.get<std::string>() + "' is not a rational");
        }
    }
    if (v.is_number_integer()) return Rational(static_cast<long>(v.get<std::int64_t>()));
    if (v.is_number_float()) {
        inexact = true;
        return rational_from_double(v.get<double>());
    }
    bad(what + " must be a number or a rational string");
}

template <class T>
T integer_in(const json& doc, const char* key, T fallback, long long lo, long long hi) {
    if (!doc.contains(key)) return fallback;
    const json& v = doc[key];
    if (!v.is_number_integer()) bad(std::string(key) + " must be an integer");
    const auto x = v.get<long long>();
    if (x < lo || x > hi) bad(std::string(key) + " = " + std::to_string(x) + " outside [" + std::to_string(lo) + ", " +
                              std::to_string(hi) + "]");
    return static_cast<T>(x);
}

double number_in(const json& doc, const char* key, double fallback, double lo, double hi) {
    if (!doc.contains(key)) return fallback;
    const json& v = doc[key];
    if (!v.is_number()) bad(std::string(key) + " must be a number");
    const double x = v.get<double>();
    if (!(x >= lo && x <= hi)) bad(std::string(key) + " outside its range");
    return x;
}

std::string label_of(const json& v, const std::string& what) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    bad(what + " must be a state label");
}

std::vector<std::string> string_list(const json& doc, const char* key) {
    std::vector<std::string> out;
    if (!doc.contains(key)) return out;
    if (!doc[key].is_array()) bad(std::string(key) + " must be an array of strings");
    for (const auto& v : doc[key]) {
        if (!v.is_string()) bad(std::string(key) + " must be an array of strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

} // namespace

ChainSpec chain_from_json(const json& c) {
    check_keys(c, {"kind", "states", "rows", "weights", "p", "precision"}, "[chain]");
    if (!c.contains("kind") || !c["kind"].is_string()) bad("[chain] needs a kind");
    const std::string kind = c["kind"];
    bool inexact = false;
    if (c.contains("precision")) {
        if (c["precision"] == "float") {
            inexact = true;
        } else if (c["precision"] != "exact") {
            bad("precision must be exact or float");
        }
    }
    auto labels = [&] {
        const auto out = string_list(c, "states");
        if (out.empty()) bad("[chain] states must be a non-empty list of labels");
        std::set<std::string> seen(out.begin(), out.end());
        if (seen.size() != out.size()) bad("[chain] state labels must be distinct");
        return out;
    };
    auto parameter = [&] {
        if (!c.contains("p")) bad("[chain] kind '" + kind + "' needs p");
        Rational p = rational_value(c["p"], "p", inexact);
        if (p <= 0 || p >= 1) bad("p must lie strictly between 0 and 1");
        return p;
    };
    if (kind == "matrix") {
        const auto names = labels();
        if (!c.contains("rows") || !c["rows"].is_array()) bad("[chain] matrix needs rows");
        TransitionMatrix p;
        for (const auto& row : c["rows"]) {
            if (!row.is_array()) bad("every matrix row must be an array");
            std::vector<Rational> r;
            for (const auto& x : row) r.push_back(rational_value(x, "matrix entry", inexact));
            p.push_back(std::move(r));
        }
        if (p.size() != names.size()) {
            throw Error(ErrorCode::NonStochasticMatrix, std::to_string(p.size()) + " rows for " +
                                                            std::to_string(names.size()) + " states");
        }
        return ChainSpec::finite_matrix(names, std::move(p), inexact ? Precision::Float : Precision::Exact);
    }
    if (kind == "iid") {
        const auto names = labels();
        if (!c.contains("weights") || !c["weights"].is_array()) bad("[chain] iid needs weights");
        std::vector<Rational> w;
        for (const auto& x : c["weights"]) w.push_back(rational_value(x, "category weight", inexact));
        return ChainSpec::iid_categorical(names, std::move(w), inexact ? Precision::Float : Precision::Exact);
    }
    if (kind == "coin") return ChainSpec::coin(parameter());
    if (kind == "coin_pattern") return ChainSpec::coin_pattern(parameter());
    if (kind == "three_state") return ChainSpec::three_state(parameter());
    if (kind == "srw_z") return ChainSpec::srw_z();
    if (kind == "srw_z2") return ChainSpec::srw_z2();
    bad("unknown chain kind '" + kind + "'");
}

Fixture parse_fixture(std::string_view text) {
    Fixture f;
    bool marked = false;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        line = line.substr(first, line.find_last_not_of(" \t\r") - first + 1);
        if (line.front() == '>') {
            if (marked) throw Error(ErrorCode::InvalidFixture, "index 0 marked twice (line " + std::to_string(line_no) + ")");
            marked = true;
            f.origin_index = f.labels.size();
            line = line.substr(1);
            const auto s = line.find_first_not_of(" \t");
            line = s == std::string::npos ? "" : line.substr(s);
            if (line.empty()) throw Error(ErrorCode::InvalidFixture, "empty marked line");
        }
        f.labels.push_back(line);
    }
    if (f.labels.empty()) throw Error(ErrorCode::InvalidFixture, "fixture has no states");
    if (!marked) throw Error(ErrorCode::InvalidFixture, "no line marked with '>' as index 0");
    return f;
}

Fixture load_fixture(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::InvalidFixture, "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_fixture(ss.str());
}

RunOptions ExperimentConfig::run() const {
    if (!seed) throw Error(ErrorCode::InvalidConfig, "a seed is required (config 'seed' or --seed)");
    RunOptions r;
    r.seed = *seed;
    r.replicas = replicas;
    r.cap = cap;
    r.threads = threads;
    return r;
}

EmbeddingProblem ExperimentConfig::problem() const {
    if (!chain) throw Error(ErrorCode::InvalidConfig, "no [chain] given");
    if (!target) throw Error(ErrorCode::InvalidConfig, "no [target] given");
    return EmbeddingProblem(*chain, initial, *target);
}

json toml_to_json(std::string_view text, const std::string& source) {
    try {
        const toml::table table = toml::parse(text, source);
        return node_to_json(table);
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << source << ":" << e.source().begin.line << ": " << e.description();
        throw Error(ErrorCode::InvalidConfig, msg.str());
    }
}

ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base_dir, std::string name) {
    check_keys(doc,
               {"seed", "replicas", "cap", "threads", "solver", "initial", "lags", "alpha", "betas", "functional",
                "psi", "alternatives", "fit_lo", "fit_hi", "per_decade", "blocks", "resamples", "fixture", "out_dir",
                "format", "chain", "target", "oracle", "expect", "name", "description"},
               "config");
    ExperimentConfig cfg;
    cfg.name = doc.contains("name") ? doc["name"].get<std::string>() : std::move(name);
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_integer() || doc["seed"].get<long long>() < 0) bad("seed must be a non-negative integer");
        cfg.seed = doc["seed"].get<std::uint64_t>();
    }
    cfg.replicas = integer_in<std::uint64_t>(doc, "replicas", cfg.replicas, 1, 1'000'000'000LL);
    cfg.cap = integer_in<std::int64_t>(doc, "cap", cfg.cap, 1, 1'000'000'000'000LL);
    cfg.threads = integer_in<int>(doc, "threads", 0, 0, 4096);
    cfg.lags = integer_in<std::int64_t>(doc, "lags", cfg.lags, 1, 1000);
    cfg.alpha = number_in(doc, "alpha", cfg.alpha, 1e-300, 0.5);
    cfg.tail.fit_lo = integer_in<std::int64_t>(doc, "fit_lo", cfg.tail.fit_lo, 1, 1'000'000'000'000LL);
    cfg.tail.fit_hi = integer_in<std::int64_t>(doc, "fit_hi", 0, 0, 1'000'000'000'000LL);
    cfg.tail.per_decade = integer_in<int>(doc, "per_decade", cfg.tail.per_decade, 1, 1000);
    cfg.tail.blocks = integer_in<std::size_t>(doc, "blocks", cfg.tail.blocks, 1, 100000);
    cfg.tail.resamples = integer_in<std::size_t>(doc, "resamples", cfg.tail.resamples, 1, 1000000);

    if (doc.contains("solver")) cfg.solver = SolverSpec::parse(doc["solver"].get<std::string>());
    for (const auto& s : string_list(doc, "alternatives")) cfg.alternatives.push_back(SolverSpec::parse(s));
    for (const auto& s : string_list(doc, "psi")) cfg.psi.push_back(CostFunction::parse(s));
    if (doc.contains("betas")) {
        if (!doc["betas"].is_array()) bad("betas must be an array of numbers");
        for (const auto& b : doc["betas"]) {
            if (!b.is_number() || b.get<double>() < 0) bad("betas must be non-negative numbers");
            cfg.betas.push_back(b.get<double>());
        }
    }
    if (doc.contains("functional")) {
        const std::string f = doc["functional"];
        if (f == "T") {
            cfg.functional = MomentFunctional::RawPower;
        } else if (f == "a") {
            cfg.functional = MomentFunctional::GreenPower;
        } else {
            bad("functional must be \"T\" or \"a\"");
        }
    }
    if (doc.contains("fixture")) cfg.fixture = base_dir / doc["fixture"].get<std::string>();
    if (doc.contains("out_dir")) cfg.out_dir = base_dir / doc["out_dir"].get<std::string>();
    if (doc.contains("format")) {
        const std::string f = doc["format"];
        if (f != "json" && f != "csv") bad("format must be json or csv");
        cfg.format = f;
    }

    if (doc.contains("chain")) {
        cfg.chain = std::make_shared<const ChainSpec>(chain_from_json(doc["chain"]));
        const ChainSpec& spec = *cfg.chain;
        if (!doc.contains("initial")) bad("initial state missing");
        cfg.initial = spec.state(label_of(doc["initial"], "initial"));
        if (doc.contains("target")) {
            const json& t = doc["target"];
            if (!t.is_object() || t.empty()) bad("[target] must map state labels to weights");
            bool inexact = false;
            std::map<State, Rational> w;
            for (const auto& [label, value] : t.items()) w[spec.state(label)] += rational_value(value, "target weight", inexact);
            cfg.target = TargetMeasure::from_weights(spec, std::move(w), inexact ? Precision::Float : Precision::Exact);
        }
    } else if (doc.contains("target") || doc.contains("initial")) {
        bad("initial/target given without a [chain]");
    }

    if (doc.contains("oracle")) {
        const json& o = doc["oracle"];
        check_keys(o, {"increments", "exact_depth"}, "[oracle]");
        if (o.contains("increments")) {
            std::map<std::string, std::string> table;
            for (const auto& [k, v] : o["increments"].items()) {
                if (v.is_string()) {
                    table[k] = v.get<std::string>();
                } else if (v.is_number_integer()) {
                    table[k] = std::to_string(v.get<std::int64_t>());
                } else if (v.is_number_float()) {
                    table[k] = to_string(rational_from_double(v.get<double>()));
                } else {
                    bad("increment probabilities must be numbers or rational strings");
                }
            }
            cfg.increments = IncrementLaw::from_strings(table);
        }
        cfg.exact_depth = integer_in<std::int64_t>(o, "exact_depth", cfg.exact_depth, 1, 64);
    }

    if (doc.contains("expect")) {
        const json& e = doc["expect"];
        check_keys(e, {"slope", "tolerance", "moments"}, "[expect]");
        if (e.contains("slope")) cfg.expect_slope = number_in(e, "slope", 0.0, -100.0, 100.0);
        cfg.slope_tolerance = number_in(e, "tolerance", cfg.slope_tolerance, 0.0, 100.0);
        if (e.contains("moments")) {
            for (const auto& [k, v] : e["moments"].items()) {
                const std::string verdict = v.get<std::string>();
                if (verdict != "finite" && verdict != "divergent") bad("moment expectation must be finite or divergent");
                cfg.expect_moments[to_double(parse_rational(k))] = verdict;
            }
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    const auto ext = path.extension().string();
    json doc;
    if (ext == ".toml") {
        doc = toml_to_json(text, path.filename().string());
    } else if (ext == ".json") {
        try {
            doc = json::parse(text);
        } catch (const json::exception& e) {
            bad(path.filename().string() + ": " + e.what());
        }
    } else {
        bad("config must be .toml or .json");
    }
    return parse_config(doc, path.parent_path(), path.stem().string());
}

} // namespace skembed
