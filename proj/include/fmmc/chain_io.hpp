#pragma once

// Chain specification file:
//   {"m": 2, "pi": [3, 1, 1, 1, 3], "q": {"0-1": 0.5, "1-2": 0.0, ...}}
// Edge keys are "min(i,j)-max(i,j)" in the canonical labeling.

#include <string>

#include <json.hpp>

#include "fmmc/chain.hpp"

namespace fmmc {

struct ChainSpec {
  Topology topology;
  EquilibriumDistribution pi;
  WeightAssignment q;
};

/// Throws InvalidArgument on malformed input, non-edges, non-canonical
/// keys or negative weights.
ChainSpec parse_chain_spec(const nlohmann::json& doc);
ChainSpec parse_chain_spec(const std::string& text);

nlohmann::json to_json(const ChainSpec& spec);

}  // namespace fmmc
