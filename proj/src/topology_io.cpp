#include "hybridrc/topology_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <vector>

namespace hybridrc {

namespace {

std::vector<std::string> tokens_of(const std::string& line) {
  std::string body = line.substr(0, line.find('#'));
  std::istringstream is(body);
  std::vector<std::string> out;
  for (std::string t; is >> t;) out.push_back(t);
  return out;
}

std::size_t number(const std::string& s, std::size_t line, const char* what) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw ParseError(line, std::string("expected ") + what + ", got '" + s + "'");
  return v;
}

}  // namespace

TopologyFile parse_topology(std::istream& in) {
  TopologyFile out;
  bool have_header = false;
  std::set<NodeId> declared;
  std::string line;
  for (std::size_t no = 1; std::getline(in, line); ++no) {
    auto tok = tokens_of(line);
    if (tok.empty()) continue;
    if (!have_header) {
      if (tok.size() != 4 || tok[0] != "n" || tok[2] != "f") throw ParseError(no, "expected header 'n <count> f <bound>'");
      const std::size_t n = number(tok[1], no, "node count");
      out.f = number(tok[3], no, "fault bound");
      if (n > 0 && out.f >= n) throw ParseError(no, "fault bound must be below the node count");
      out.topology = Topology(n);
      have_header = true;
      continue;
    }
    const std::size_t n = out.topology.size();
    if (tok[0] == "node") {
      if (tok.size() < 2) throw ParseError(no, "node line needs an id");
      const std::size_t id = number(tok[1], no, "node id");
      if (id >= n) throw ParseError(no, "node id " + tok[1] + " out of range");
      const auto u = static_cast<NodeId>(id);
      if (!declared.insert(u).second) throw ParseError(no, "duplicate node line for " + tok[1]);
      bool auth = false, trusted = false, tc = false;
      for (std::size_t i = 2; i < tok.size(); ++i) {
        bool* flag = tok[i] == "auth" ? &auth : tok[i] == "trusted" ? &trusted : tok[i] == "tc" ? &tc : nullptr;
        if (!flag) throw ParseError(no, "unknown node flag '" + tok[i] + "'");
        if (*flag) throw ParseError(no, "repeated node flag '" + tok[i] + "'");
        *flag = true;
      }
      if (tc && !auth) throw ParseError(no, "tc requires auth on node " + tok[1]);
      out.topology.set_authenticated(u, auth);
      out.topology.set_trusted(u, trusted);
      out.topology.set_tc(u, tc);
    } else if (tok[0] == "edge") {
      if (tok.size() != 3) throw ParseError(no, "edge line needs two endpoints");
      const std::size_t a = number(tok[1], no, "node id");
      const std::size_t b = number(tok[2], no, "node id");
      if (a >= n || b >= n) throw ParseError(no, "edge endpoint out of range");
      if (a == b) throw ParseError(no, "self-loop on node " + tok[1]);
      if (!out.topology.add_edge(static_cast<NodeId>(a), static_cast<NodeId>(b)))
        throw ParseError(no, "duplicate edge " + tok[1] + " " + tok[2]);
    } else {
      throw ParseError(no, "unknown directive '" + tok[0] + "'");
    }
  }
  if (!have_header) throw ParseError(1, "missing header 'n <count> f <bound>'");
  return out;
}

TopologyFile parse_topology(std::string_view text) {
  std::istringstream is{std::string(text)};
  return parse_topology(is);
}

TopologyFile load_topology(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_topology(in);
}

std::string emit_topology(const Topology& g, std::size_t f) {
  std::ostringstream os;
  os << "n " << g.size() << " f " << f << '\n';
  for (NodeId u : g.vertices()) {
    os << "node " << u;
    if (g.is_authenticated(u)) os << " auth";
    if (g.is_trusted(u)) os << " trusted";
    if (g.has_tc(u)) os << " tc";
    os << '\n';
  }
  for (auto [u, v] : g.edges()) os << "edge " << u << ' ' << v << '\n';
  return os.str();
}

void save_topology(const std::string& path, const Topology& g, std::size_t f) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << emit_topology(g, f);
}

std::string_view to_string(Family f) {
  switch (f) {
    case Family::random_gnp: return "random-gnp";
    case Family::random_regular: return "random-regular";
    case Family::ring_of_cliques: return "ring-of-cliques";
    case Family::star: return "star";
    case Family::two_tier_gateway: return "two-tier-gateway";
  }
  return "?";
}

std::optional<Family> parse_family(std::string_view s) {
  for (Family f : {Family::random_gnp, Family::random_regular, Family::ring_of_cliques, Family::star, Family::two_tier_gateway})
    if (to_string(f) == s) return f;
  return std::nullopt;
}

namespace {

void random_regular(Topology& g, std::size_t n, std::size_t d, std::mt19937_64& rng) {
  if (d >= n || (n * d) % 2 != 0) throw std::invalid_argument("random-regular needs d < n and n*d even");
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<NodeId> stubs;
    for (NodeId u = 0; u < n; ++u)
      for (std::size_t i = 0; i < d; ++i) stubs.push_back(u);
    std::shuffle(stubs.begin(), stubs.end(), rng);
    Topology t(n);
    bool ok = true;
    for (std::size_t i = 0; ok && i < stubs.size(); i += 2)
      ok = stubs[i] != stubs[i + 1] && t.add_edge(stubs[i], stubs[i + 1]);
    if (ok) {
      g = std::move(t);
      return;
    }
  }
  throw std::runtime_error("random-regular: no simple pairing found");
}

}  // namespace

Topology generate(const GeneratorSpec& spec) {
  const std::size_t n = spec.n;
  if (n == 0) throw std::invalid_argument("generator needs n >= 1");
  if (spec.trusted > n || spec.authenticated > n) throw std::invalid_argument("role counts exceed n");
  if (spec.tc > spec.authenticated) throw std::invalid_argument("tc count exceeds authenticated count");
  std::mt19937_64 rng(spec.seed);
  Topology g(n);
  std::vector<NodeId> hubs;

  switch (spec.family) {
    case Family::random_gnp: {
      std::bernoulli_distribution edge(std::clamp(spec.param, 0.0, 1.0));
      for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v)
          if (edge(rng)) g.add_edge(u, v);
      break;
    }
    case Family::random_regular:
      random_regular(g, n, static_cast<std::size_t>(spec.param), rng);
      break;
    case Family::ring_of_cliques: {
      const std::size_t k = std::max<std::size_t>(1, static_cast<std::size_t>(spec.param));
      const std::size_t cliques = (n + k - 1) / k;
      for (std::size_t c = 0; c < cliques; ++c) {
        const std::size_t lo = c * k, hi = std::min(n, lo + k);
        for (std::size_t u = lo; u < hi; ++u)
          for (std::size_t v = u + 1; v < hi; ++v) g.add_edge(static_cast<NodeId>(u), static_cast<NodeId>(v));
        if (cliques > 1) {
          const std::size_t next = ((c + 1) % cliques) * k;
          if (hi - 1 != next) g.add_edge(static_cast<NodeId>(hi - 1), static_cast<NodeId>(next));
        }
      }
      break;
    }
    case Family::star:
      for (NodeId v = 1; v < n; ++v) g.add_edge(0, v);
      hubs.push_back(0);
      break;
    case Family::two_tier_gateway: {
      const std::size_t gw = std::clamp<std::size_t>(static_cast<std::size_t>(spec.param), 1, n);
      for (NodeId u = 0; u < gw; ++u) {
        hubs.push_back(u);
        for (NodeId v = u + 1; v < gw; ++v) g.add_edge(u, v);
      }
      for (std::size_t leaf = gw; leaf < n; ++leaf) {
        const auto i = static_cast<NodeId>(leaf);
        g.add_edge(i, static_cast<NodeId>(leaf % gw));
        if (gw > 1) g.add_edge(i, static_cast<NodeId>((leaf + 1) % gw));
      }
      break;
    }
  }

  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<NodeId> trusted_order = hubs;
  for (NodeId u : order)
    if (std::find(hubs.begin(), hubs.end(), u) == hubs.end()) trusted_order.push_back(u);
  for (std::size_t i = 0; i < spec.trusted; ++i) g.set_trusted(trusted_order[i]);

  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t i = 0; i < spec.authenticated; ++i) g.set_authenticated(order[i]);
  for (std::size_t i = 0; i < spec.tc; ++i) g.set_tc(order[i]);
  return g;
}

}  // namespace hybridrc
