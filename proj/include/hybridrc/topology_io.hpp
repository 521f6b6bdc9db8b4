#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "hybridrc/graph.hpp"

namespace hybridrc {

/// Text topology description:
///
///   n <count> f <bound>
///   node <id> [auth] [trusted] [tc]
///   edge <u> <v>
///
/// `#` starts a comment. Nodes without a node line have no roles.
struct TopologyFile {
  Topology topology;
  std::size_t f = 0;
};

struct ParseError : std::runtime_error {
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line(line) {}
  std::size_t line;
};

TopologyFile parse_topology(std::istream& in);
TopologyFile parse_topology(std::string_view text);
TopologyFile load_topology(const std::string& path);

std::string emit_topology(const Topology& g, std::size_t f);
void save_topology(const std::string& path, const Topology& g, std::size_t f);

enum class Family { random_gnp, random_regular, ring_of_cliques, star, two_tier_gateway };
std::string_view to_string(Family f);
std::optional<Family> parse_family(std::string_view s);

/// `param` is the edge probability (random-gnp), the degree (random-regular),
/// the clique size (ring-of-cliques) or the gateway count (two-tier-gateway);
/// star ignores it.
struct GeneratorSpec {
  Family family = Family::random_gnp;
  std::size_t n = 8;
  double param = 0.5;
  std::size_t trusted = 0;
  std::size_t authenticated = 0;
  std::size_t tc = 0;
  std::uint64_t seed = 1;
};

/// Deterministic in the spec. Roles are drawn at random from the seed, except
/// that star centres and gateways receive the trusted role first.
Topology generate(const GeneratorSpec& spec);

}  // namespace hybridrc
