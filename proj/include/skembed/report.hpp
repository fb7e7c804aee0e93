#pragma once

#include "skembed/analysis.hpp"
#include "skembed/embedding.hpp"
#include "skembed/transport.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace skembed {

inline constexpr std::string_view kVersion = "skembed 0.1.0";

using Json = nlohmann::ordered_json;

/// {version, command, seed, replicas, cap}; every report starts with this.
Json report_header(std::string_view command, const RunOptions& run);

/// Finite chains come back as kind "matrix" (or "iid") with rational-string
/// entries, so chain_from_json(chain_to_json(s)) == s.
Json chain_to_json(const ChainSpec& spec);

Json to_json(const FeasibilityVerdict& verdict, const ChainSpec& spec);
/// {solver, T, censored, seed, replica}
Json to_json(const StoppingResult& result);
Json to_json(const ChiSquareResult& result);
Json to_json(const TailEstimate& tail);
Json to_json(const MomentEstimate& moment);
Json to_json(const ShiftedLawReport& report, const ChainSpec& spec);
Json to_json(const ComparisonReport& report);

// Adjacency format: {"window": [lo, hi], "rows": {"x": {"y": "w", ...}},
// "open": {"x": "w"}}, weights as rational strings.
Json to_json(const TransportRule& theta);
TransportRule transport_from_json(const Json& doc);

// {"window": [lo, hi], "tau": {"k": n}, "frontier": [k, ...]}
Json to_json(const AllocationView& view);
AllocationView allocation_from_json(const Json& doc);

void write_samples_csv(std::ostream& out, const std::vector<SampleRecord>& samples, const ChainSpec& spec);
void write_survival_csv(std::ostream& out, const TailEstimate& tail);
void write_moments_csv(std::ostream& out, const std::vector<MomentEstimate>& moments);

} // namespace skembed
