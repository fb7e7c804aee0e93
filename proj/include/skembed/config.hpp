#pragma once

#include "skembed/analysis.hpp"
#include "skembed/chain.hpp"
#include "skembed/embedding.hpp"
#include "skembed/local_time.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace skembed {

/// A trajectory fixture: newline-separated state labels, '#' comments, and
/// the line of index 0 prefixed with '>'.
struct Fixture {
    std::vector<std::string> labels;
    std::size_t origin_index = 0;
};

Fixture parse_fixture(std::string_view text);
Fixture load_fixture(const std::filesystem::path& path);

/// Experiment definition. Loaded from TOML (primary) or JSON; rationals may
/// be written as strings ("2/3") and are then kept exact.
struct ExperimentConfig {
    std::string name;
    std::optional<std::uint64_t> seed;
    std::uint64_t replicas = 1000;
    std::int64_t cap = 100'000;
    int threads = 0;

    std::shared_ptr<const ChainSpec> chain;
    State initial = 0;
    std::optional<TargetMeasure> target;
    SolverSpec solver;

    std::int64_t lags = 5;
    double alpha = 1e-3;
    std::vector<double> betas;
    MomentFunctional functional = MomentFunctional::RawPower;
    std::vector<CostFunction> psi;
    std::vector<SolverSpec> alternatives;
    TailOptions tail;

    std::optional<std::filesystem::path> fixture;
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::string> format;

    // first-passage oracle: explicit increments or the chain's return blocks
    std::optional<IncrementLaw> increments;
    std::int64_t exact_depth = 2;

    // optional pass/fail expectations for tail / oracle / moment runs
    std::optional<double> expect_slope;
    double slope_tolerance = 0.1;
    std::map<double, std::string> expect_moments; // beta -> "finite" | "divergent"

    RunOptions run() const;
    EmbeddingProblem problem() const;
};

/// TOML document as JSON (tables -> objects, arrays -> arrays).
nlohmann::ordered_json toml_to_json(std::string_view text, const std::string& source = "config");

/// [chain] table: kind matrix|iid|coin|coin_pattern|three_state|srw_z|srw_z2.
ChainSpec chain_from_json(const nlohmann::ordered_json& chain);

/// Validates and converts; relative paths resolve against base_dir.
ExperimentConfig parse_config(const nlohmann::ordered_json& doc, const std::filesystem::path& base_dir,
                              std::string name = "experiment");

/// By extension: .toml or .json.
ExperimentConfig load_config(const std::filesystem::path& path);

} // namespace skembed
