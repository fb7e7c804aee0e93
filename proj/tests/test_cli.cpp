#include "skembed/cli.hpp"
#include "skembed/report.hpp"

#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace skembed;
namespace fs = std::filesystem;

namespace {

fs::path source_dir() {
    const char* s = std::getenv("SKEMBED_SOURCE_DIR");
    return s ? fs::path(s) : fs::current_path();
}

std::string config(const std::string& rel) { return (source_dir() / rel).string(); }

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

// Integers and strings exactly, doubles to 1e-9 relative.
bool same_report(const Json& a, const Json& b, const std::string& where, std::string& diff) {
    if (a.is_number_float() || b.is_number_float()) {
        if (!a.is_number() || !b.is_number()) {
            diff = where;
            return false;
        }
        const double x = a.get<double>(), y = b.get<double>();
        if (std::abs(x - y) <= 1e-9 * std::max({1.0, std::abs(x), std::abs(y)})) return true;
        diff = where + ": " + a.dump() + " vs " + b.dump();
        return false;
    }
    if (a.type() != b.type()) {
        diff = where + ": type";
        return false;
    }
    if (a.is_object()) {
        if (a.size() != b.size()) {
            diff = where + ": keys";
            return false;
        }
        for (auto it = a.begin(); it != a.end(); ++it) {
            if (!b.contains(it.key())) {
                diff = where + "." + it.key() + ": missing";
                return false;
            }
            if (!same_report(it.value(), b[it.key()], where + "." + it.key(), diff)) return false;
        }
        return true;
    }
    if (a.is_array()) {
        if (a.size() != b.size()) {
            diff = where + ": length";
            return false;
        }
        for (std::size_t k = 0; k < a.size(); ++k) {
            if (!same_report(a[k], b[k], where + "[" + std::to_string(k) + "]", diff)) return false;
        }
        return true;
    }
    if (a != b) diff = where + ": " + a.dump() + " vs " + b.dump();
    return a == b;
}

} // namespace

TEST_CASE("every command is byte-identical on re-run, serial or parallel") {
    const std::vector<std::pair<std::string, std::vector<std::string>>> runs = {
        {"check", {"--config", config("configs/extra_head_third.toml")}},
        {"sample", {"--config", config("configs/three_state_third.toml"), "--replicas", "300"}},
        {"sample", {"--config", config("configs/extra_head_third.toml"), "--replicas", "300", "--format", "json"}},
        {"verify", {"--config", config("configs/three_state_third.toml"), "--replicas", "2000"}},
        {"tail", {"--config", config("configs/coin_half_tail.toml"), "--replicas", "2000", "--cap", "20000"}},
        {"tail",
         {"--config", config("configs/srw_z_tail.toml"), "--replicas", "500", "--cap", "20000", "--format", "csv"}},
        {"moment", {"--config", config("configs/coin_half_moments.toml"), "--replicas", "2000", "--cap", "100000"}},
        {"compare", {"--config", config("configs/extra_head_compare.toml"), "--replicas", "2000", "--cap", "10000"}},
        {"oracle", {"--config", config("configs/fair_walk_oracle.toml"), "--replicas", "5000", "--cap", "20000"}},
    };
    for (const auto& [command, rest] : runs) {
        std::vector<std::string> args{command};
        args.insert(args.end(), rest.begin(), rest.end());
        const Run a = cli(args);
        const Run b = cli(args);
        auto serial = args;
        serial.insert(serial.end(), {"--serial", "--threads", "1"});
        auto parallel = args;
        parallel.insert(parallel.end(), {"--threads", "3"});
        const Run c = cli(serial);
        const Run d = cli(parallel);
        CAPTURE(command);
        CAPTURE(a.err);
        CHECK(a.code != ExitError);
        CHECK(!a.out.empty());
        CHECK(a.out == b.out);
        CHECK(a.out == c.out);
        CHECK(a.out == d.out);
        CHECK(a.code == b.code);
        CHECK(a.code == c.code);
        CHECK(a.code == d.code);
    }
}

TEST_CASE("exit codes of the check command") {
    CHECK(cli({"check", "--config", config("configs/extra_head_third.toml")}).code == ExitPass);
    CHECK(cli({"check", "--config", config("configs/pattern_mixed.toml")}).code == ExitPass);
    const Run two_fifths = cli({"check", "--config", config("configs/extra_head_two_fifths.toml")});
    CHECK(two_fifths.code == ExitNegative);
    CHECK(Json::parse(two_fifths.out)["result"]["feasible"] == false);
    CHECK(cli({"check", "--config", config("configs/inverse_extra_head.toml")}).code == ExitNegative);
}

TEST_CASE("infeasible targets stop before sampling") {
    const Run r = cli({"sample", "--config", config("configs/inverse_extra_head.toml")});
    CHECK(r.code == ExitNegative);
    CHECK(r.out.empty());
    CHECK(r.err.rfind("infeasible: TargetChargesStartRequiresDirac", 0) == 0);
    const Run t = cli({"tail", "--config", config("configs/extra_head_two_fifths.toml")});
    CHECK(t.code == ExitNegative);
    CHECK(t.err.find(" at head") != std::string::npos);
}

TEST_CASE("fixture path T,T,H,H gives T* = 3") {
    const Run r = cli({"sample", "--config", config("configs/tthh_fixture.toml")});
    CHECK(r.code == ExitPass);
    CHECK(r.out == "replica,T,X_T,censored\n0,3,head,0\n");
}

TEST_CASE("domain-negative runs exit 2") {
    const Run naive = cli({"verify", "--config", config("configs/three_state_naive.toml"), "--replicas", "20000"});
    CHECK(naive.code == ExitNegative);
    CHECK(Json::parse(naive.out)["report"]["backward_passed"] == false);
}

TEST_CASE("errors exit 1 with a code") {
    const Run psi = cli({"compare", "--config", config("tests/data/empty_psi.toml")});
    CHECK(psi.code == ExitError);
    CHECK(psi.err.rfind("error: InvalidConfig", 0) == 0);

    const Run matrix = cli({"check", "--config", config("tests/data/malformed_matrix.toml")});
    CHECK(matrix.code == ExitError);
    CHECK(matrix.err.rfind("error: NonStochasticMatrix", 0) == 0);

    const Run key = cli({"check", "--config", config("tests/data/unknown_key.toml")});
    CHECK(key.code == ExitError);
    CHECK(key.err.find("replica") != std::string::npos);

    CHECK(cli({"check", "--config", config("tests/data/none.toml")}).code == ExitError);
    CHECK(cli({"frobnicate"}).code == ExitError);
    CHECK(cli({"check"}).err.rfind("usage error:", 0) == 0);
    CHECK(cli({"tail", "--config", config("configs/coin_half_tail.toml"), "--format", "xml"}).code == ExitError);
    CHECK(cli({"tail", "--config", config("configs/coin_half_tail.toml"), "--replicas", "0"}).code == ExitError);
    CHECK(cli({"--version"}).out == std::string(kVersion) + "\n");
}

TEST_CASE("--out-dir writes <command>.<ext>") {
    const fs::path dir = fs::temp_directory_path() / "skembed_cli_out";
    fs::remove_all(dir);
    const Run r = cli({"sample", "--config", config("configs/tthh_fixture.toml"), "--out-dir", dir.string()});
    CHECK(r.code == ExitPass);
    CHECK(r.out.empty());
    CHECK(slurp(dir / "sample.csv") == "replica,T,X_T,censored\n0,3,head,0\n");
    const Run j = cli({"check", "--config", config("configs/extra_head_third.toml"), "--out-dir", dir.string()});
    CHECK(Json::parse(slurp(dir / "check.json"))["command"] == "check");
    fs::remove_all(dir);
}

TEST_CASE("golden verify report for the extra-head coin") {
    const Run r = cli({"verify", "--config", config("configs/extra_head_third.toml")});
    CHECK(r.code == ExitPass);
    const Json golden = Json::parse(slurp(source_dir() / "tests/golden/extra_head_third.verify.json"));
    std::string diff;
    CHECK_MESSAGE(same_report(Json::parse(r.out), golden, "$", diff), diff);
}

TEST_CASE("the installed binary agrees with the in-process entry point") {
    const char* exe = std::getenv("SKEMBED_CLI");
    if (!exe) {
        MESSAGE("SKEMBED_CLI not set; skipped");
        return;
    }
    const std::string cmd = std::string(exe) + " sample --config " + config("configs/tthh_fixture.toml");
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p);
    std::string out;
    std::array<char, 256> buf{};
    while (std::fgets(buf.data(), buf.size(), p)) out += buf.data();
    const int status = pclose(p);
    CHECK(WEXITSTATUS(status) == ExitPass);
    CHECK(out == cli({"sample", "--config", config("configs/tthh_fixture.toml")}).out);

    const std::string bad = std::string(exe) + " sample --config " + config("configs/inverse_extra_head.toml") +
                            " 2>/dev/null";
    CHECK(WEXITSTATUS(std::system(bad.c_str())) == ExitNegative);
}
