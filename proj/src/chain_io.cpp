#include "fmmc/chain_io.hpp"

#include <cmath>

#include "fmmc/error.hpp"

namespace fmmc {

namespace {

Edge parse_edge_key(const std::string& key) {
  const auto dash = key.find('-');
  if (dash == std::string::npos || dash == 0 || dash + 1 == key.size()) {
    throw InvalidArgument("edge key '" + key + "' is not of the form i-j");
  }
  std::size_t a = 0;
  std::size_t b = 0;
  try {
    std::size_t used = 0;
    a = std::stoul(key.substr(0, dash), &used);
    if (used != dash) throw std::invalid_argument(key);
    const std::string rest = key.substr(dash + 1);
    b = std::stoul(rest, &used);
    if (used != rest.size()) throw std::invalid_argument(key);
  } catch (const std::logic_error&) {
    throw InvalidArgument("edge key '" + key + "' is not of the form i-j");
  }
  if (a >= b) {
    throw InvalidArgument("edge key '" + key + "' must be written min-max");
  }
  return {a, b};
}

}  // namespace

ChainSpec parse_chain_spec(const nlohmann::json& doc) {
  if (!doc.is_object()) throw InvalidArgument("chain spec must be an object");
  if (!doc.contains("m") || !doc["m"].is_number_integer() ||
      doc["m"].get<long long>() < 1) {
    throw InvalidArgument("chain spec needs integer field m >= 1");
  }
  const auto m = static_cast<std::size_t>(doc["m"].get<long long>());
  Topology topology = build_friendship_graph(m);

  if (!doc.contains("pi") || !doc["pi"].is_array()) {
    throw InvalidArgument("chain spec needs array field pi");
  }
  std::vector<double> masses;
  for (const auto& v : doc["pi"]) {
    if (!v.is_number()) throw InvalidArgument("pi entries must be numbers");
    masses.push_back(v.get<double>());
  }
  if (masses.size() != topology.vertex_count()) {
    throw InvalidArgument("pi has " + std::to_string(masses.size()) +
                          " entries, expected " +
                          std::to_string(topology.vertex_count()));
  }
  EquilibriumDistribution pi(std::move(masses));

  WeightAssignment q;
  if (doc.contains("q")) {
    if (!doc["q"].is_object()) throw InvalidArgument("q must be an object");
    for (const auto& [key, value] : doc["q"].items()) {
      const Edge e = parse_edge_key(key);
      if (!topology.has_edge(e.u, e.v)) {
        throw InvalidArgument("q names non-edge " + key);
      }
      if (!value.is_number()) {
        throw InvalidArgument("weight for " + key + " is not a number");
      }
      const double w = value.get<double>();
      if (!std::isfinite(w) || w < 0.0) {
        throw InvalidArgument("weight for " + key + " must be >= 0");
      }
      q.set(e.u, e.v, w);
    }
  }
  return {std::move(topology), std::move(pi), std::move(q)};
}

ChainSpec parse_chain_spec(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(std::string("malformed chain JSON: ") + e.what());
  }
  return parse_chain_spec(doc);
}

nlohmann::json to_json(const ChainSpec& spec) {
  nlohmann::json doc;
  doc["m"] = spec.topology.m();
  doc["pi"] = std::vector<double>(spec.pi.values().begin(),
                                  spec.pi.values().end());
  nlohmann::json q = nlohmann::json::object();
  for (const Edge& e : spec.topology.edges()) q[e.key()] = spec.q.get(e.u, e.v);
  doc["q"] = std::move(q);
  return doc;
}

}  // namespace fmmc
