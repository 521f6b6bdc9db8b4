#include "hybridrc/verify.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace hybridrc {

std::string_view to_string(Method m) { return m == Method::maxflow ? "maxflow" : "simplify"; }

std::optional<Method> parse_method(std::string_view s) {
  if (s == "maxflow") return Method::maxflow;
  if (s == "simplify") return Method::simplify;
  return std::nullopt;
}

namespace {

Verdict fail_pair(NodeId u, NodeId v) {
  Verdict out;
  out.ok = false;
  out.failing_pair = std::make_pair(std::min(u, v), std::max(u, v));
  return out;
}

/// Pairwise check shared by the path and flooding verifiers; `need` is the
/// flow threshold (2f+1 or f+1), also used as the trusted capacity.
Verdict pairs_by_maxflow(const Topology& g, std::size_t f, std::int64_t need) {
  FlowGraph fg = build_flow_graph(g, f, need);
  const Topology collapsed = collapse_trusted(g);
  std::map<NodeId, Topology> with_trusted;
  for (NodeId t : g.trusted_nodes()) with_trusted.emplace(t, insert_trusted(g, collapsed, t));

  auto linked = [&](NodeId u, NodeId v) {
    const bool tu = g.is_trusted(u);
    const bool tv = g.is_trusted(v);
    if (!tu && !tv) return collapsed.has_edge(u, v);
    if (tu && !tv) return with_trusted.at(u).has_edge(u, v);
    if (!tu && tv) return with_trusted.at(v).has_edge(v, u);
    return insert_trusted(g, with_trusted.at(u), v).has_edge(u, v);
  };

  const std::vector<NodeId> vs = g.vertices();
  for (NodeId u : vs) {
    for (NodeId v : vs) {
      if (v <= u || linked(u, v)) continue;
      // The broadcaster is correct: it may feed every neighbour fully.
      const bool boost = !g.is_trusted(u);
      if (boost)
        for (std::size_t a : fg.out_arcs(out_node(u))) fg.set_capacity(a, need);
      const std::int64_t flow = fg.max_flow(out_node(u), in_node(v));
      if (boost)
        for (std::size_t a : fg.out_arcs(out_node(u))) fg.set_capacity(a, 1);
      if (flow < need) return fail_pair(u, v);
    }
  }
  return Verdict::pass();
}

Verdict pairs_by_simplify(const Topology& g, std::size_t need) {
  const Topology collapsed = collapse_trusted(g);
  const std::vector<NodeId> untrusted = collapsed.vertices();
  for (NodeId u : untrusted)
    for (NodeId v : untrusted)
      if (u < v && !collapsed.has_edge(u, v) && vertex_connectivity(collapsed, u, v) < need) return fail_pair(u, v);

  const std::vector<NodeId> trusted = g.trusted_nodes();
  for (NodeId ut : trusted) {
    const Topology gu = insert_trusted(g, collapsed, ut);
    for (NodeId v : untrusted)
      if (!gu.has_edge(ut, v) && vertex_connectivity(gu, ut, v) < need) return fail_pair(ut, v);
    for (NodeId vt : trusted) {
      if (vt <= ut) continue;
      const Topology guv = insert_trusted(g, gu, vt);
      if (!guv.has_edge(ut, vt) && vertex_connectivity(guv, ut, vt) < need) return fail_pair(ut, vt);
    }
  }
  return Verdict::pass();
}

void require_all_authenticated(const Topology& g) {
  for (NodeId u : g.vertices())
    if (!g.is_authenticated(u))
      throw std::invalid_argument("signature flooding requires every node to be authenticated (node " + std::to_string(u) +
                                  " is not)");
}

}  // namespace

Verdict dolev_ut_verify_maxflow(const Topology& g, std::size_t f) {
  return pairs_by_maxflow(g, f, static_cast<std::int64_t>(2 * f + 1));
}

Verdict dolev_ut_verify_simplify(const Topology& g, std::size_t f) { return pairs_by_simplify(g, 2 * f + 1); }

Verdict sigflood_t_verify(const Topology& g, std::size_t f, Method method) {
  require_all_authenticated(g);
  if (method == Method::maxflow) return pairs_by_maxflow(g, f, static_cast<std::int64_t>(f + 1));
  return pairs_by_simplify(g, f + 1);
}

namespace {

/// Delivery under one silent corruption set. Unsigned paths need f+1
/// disjoint routes in G-C from the broadcaster or from delivered nodes (which
/// announce an empty path). Tokens flood through every correct node but the
/// broadcaster; an authenticated node accepts the broadcaster's or a trusted
/// signer's token, or f+1 signed entries with disjoint node sets.
std::set<NodeId> dualrc_scenario(const Topology& g, std::size_t f, NodeId u, const std::set<NodeId>& corrupted,
                                 const std::set<NodeId>& seed) {
  const auto big = static_cast<std::int64_t>(g.size() + f + 2);
  const auto need = static_cast<std::int64_t>(f + 1);
  auto live = [&](NodeId w) { return !corrupted.contains(w); };
  FlowGraph base(2 * g.size());
  for (NodeId w : g.vertices())
    if (live(w)) base.add_arc(in_node(w), out_node(w), g.is_trusted(w) ? big : 1);
  for (auto [x, y] : g.edges()) {
    if (!live(x) || !live(y)) continue;
    if (y != u) base.add_arc(out_node(x), in_node(y), g.is_trusted(x) || x == u ? big : 1);
    if (x != u) base.add_arc(out_node(y), in_node(x), g.is_trusted(y) || y == u ? big : 1);
  }

  std::set<NodeId> delivered{u};
  for (NodeId s : seed)
    if (live(s)) delivered.insert(s);

  auto path_flow = [&](NodeId v) {
    FlowGraph fg = base;
    const std::uint32_t root = fg.add_vertex();
    fg.add_arc(root, out_node(u), big);
    for (NodeId s : delivered)
      if (s != u) fg.add_arc(root, in_node(s), g.is_trusted(s) ? big : 1);
    return fg.max_flow(root, in_node(v));
  };
  // Flood reach from v in G-C, never through the broadcaster.
  auto reach = [&](NodeId v) {
    std::vector<bool> seen(g.size());
    std::vector<NodeId> stack{v};
    seen[v] = true;
    while (!stack.empty()) {
      const NodeId x = stack.back();
      stack.pop_back();
      for (NodeId y : g.adjacent(x))
        if (!seen[y] && y != u && live(y)) {
          seen[y] = true;
          stack.push_back(y);
        }
    }
    seen[v] = false;
    return seen;
  };
  // f+1 signed entries with disjoint node sets. A delivered signer
  // contributes its own id. A waiting signer w between a delivered node x and
  // v contributes {x, w}; x must not neighbour v, or v would drop the path.
  auto signed_entries = [&](NodeId v) {
    const auto flooded = reach(v);
    FlowGraph fg(2 * g.size());
    const std::uint32_t src = fg.add_vertex();
    const std::uint32_t sink = fg.add_vertex();
    for (NodeId x : g.vertices()) {
      if (!live(x) || x == u || x == v) continue;
      fg.add_arc(in_node(x), out_node(x), g.is_trusted(x) ? big : 1);
      const bool auth = g.is_authenticated(x);
      if (delivered.contains(x)) {
        fg.add_arc(src, in_node(x), 1);
        if (auth && flooded[x]) fg.add_arc(out_node(x), sink, 1);
        if (g.has_edge(x, v)) continue;
        for (NodeId w : g.adjacent(x))
          if (live(w) && w != u && w != v && !delivered.contains(w) && g.is_authenticated(w) && g.has_edge(w, v))
            fg.add_arc(out_node(x), in_node(w), 1);
      } else if (auth && g.has_edge(x, v)) {
        fg.add_arc(out_node(x), sink, 1);
      }
    }
    return fg.max_flow(src, sink) >= need;
  };
  auto tokens = [&](NodeId v) {
    if (!g.is_authenticated(v)) return false;
    if (g.is_authenticated(u))
      for (NodeId x : g.adjacent(u))
        if (x == v || (live(x) && reach(v)[x])) return true;
    const auto flooded = reach(v);
    for (NodeId x : delivered)
      if (x != u && flooded[x] && g.is_authenticated(x) && g.is_trusted(x)) return true;
    return signed_entries(v);
  };

  for (bool grew = true; grew;) {
    grew = false;
    for (NodeId v : g.vertices()) {
      if (delivered.contains(v) || !live(v)) continue;
      if (g.has_edge(u, v) || path_flow(v) >= need || tokens(v)) {
        delivered.insert(v);
        grew = true;
      }
    }
  }
  return delivered;
}

}  // namespace

std::set<NodeId> dualrc_delivery_set(const Topology& g, std::size_t f, NodeId u) {
  const auto strong = static_cast<std::int64_t>(2 * f + 1);
  const auto weak = static_cast<std::int64_t>(f + 1);
  // The broadcaster never relays its own broadcast.
  FlowGraph fg = build_flow_graph(g, f, strong);
  for (std::size_t a = 0; a < fg.arcs().size(); ++a)
    if (fg.arcs()[a].to == in_node(u)) fg.set_capacity(a, 0);
  std::set<NodeId> reached{u};

  auto root_flow = [&](NodeId v) {
    FlowGraph rooted = fg;
    const std::uint32_t root = rooted.add_vertex();
    for (NodeId s : reached) rooted.add_arc(root, in_node(s), g.is_trusted(s) ? strong : 1);
    return rooted.max_flow(root, in_node(v));
  };
  auto admits = [&](NodeId v) {
    if (g.has_edge(u, v)) return true;
    if (root_flow(v) >= strong) return true;
    if (!g.is_authenticated(v)) return false;
    if (g.is_authenticated(u) && fg.max_flow(out_node(u), in_node(v)) >= weak) return true;
    for (NodeId t : reached)
      if (g.is_trusted(t) && g.is_authenticated(t) && fg.max_flow(out_node(t), in_node(v)) >= weak) return true;
    return false;
  };

  for (bool grew = true; grew;) {
    grew = false;
    for (NodeId v : g.vertices()) {
      if (reached.contains(v) || !admits(v)) continue;
      reached.insert(v);
      grew = true;
    }
  }

  // Nodes left out may still deliver in every fault scenario, each time by a
  // different mechanism.
  std::vector<std::pair<std::set<NodeId>, std::set<NodeId>>> scenarios;
  for (auto& c : admissible_corruptions(g, f, u)) {
    auto got = dualrc_scenario(g, f, u, c, reached);
    scenarios.emplace_back(std::move(c), std::move(got));
  }
  std::set<NodeId> out = reached;
  for (NodeId v : g.vertices()) {
    if (reached.contains(v)) continue;
    bool everywhere = true;
    for (const auto& [c, got] : scenarios)
      if (!c.contains(v) && !got.contains(v)) everywhere = false;
    if (everywhere) out.insert(v);
  }
  return out;
}

Verdict dualrc_verify(const Topology& g, std::size_t f) {
  for (NodeId u : g.vertices()) {
    const std::set<NodeId> reached = dualrc_delivery_set(g, f, u);
    for (NodeId v : g.vertices()) {
      if (reached.contains(v)) continue;
      Verdict out;
      out.ok = false;
      out.failing_broadcaster = u;
      out.failing_pair = std::make_pair(u, v);
      return out;
    }
  }
  return Verdict::pass();
}

Verdict verify(const Topology& g, std::size_t f, ProtocolKind protocol, Method method) {
  switch (protocol) {
    case ProtocolKind::dolev_ut:
      return method == Method::maxflow ? dolev_ut_verify_maxflow(g, f) : dolev_ut_verify_simplify(g, f);
    case ProtocolKind::sigflood_t: return sigflood_t_verify(g, f, method);
    case ProtocolKind::dualrc: return dualrc_verify(g, f);
  }
  throw std::invalid_argument("unknown protocol");
}

std::set<NodeId> graph_delivery_set(const Topology& g, std::size_t f, ProtocolKind protocol, NodeId b,
                                    const std::set<NodeId>& corrupted) {
  std::set<NodeId> out{b};
  if (protocol == ProtocolKind::sigflood_t) {
    // A relay passes the token on; a receiver accepts it if it can verify it
    // or if it came from a trusted neighbour.
    std::queue<NodeId> q;
    q.push(b);
    while (!q.empty()) {
      NodeId x = q.front();
      q.pop();
      if (corrupted.contains(x)) continue;
      for (NodeId y : g.adjacent(x)) {
        if (out.contains(y) || !(g.is_authenticated(y) || g.is_trusted(x))) continue;
        out.insert(y);
        q.push(y);
      }
    }
    for (NodeId c : corrupted) out.erase(c);
    return out;
  }
  if (protocol != ProtocolKind::dolev_ut) throw std::invalid_argument("no graph-level delivery condition for this protocol");

  // Untrusted-disjoint dissemination paths avoiding the silent nodes; trusted
  // relays and the broadcaster's own links are unbounded.
  const auto big = static_cast<std::int64_t>(g.size() + f + 2);
  FlowGraph fg(2 * g.size());
  for (NodeId w : g.vertices())
    if (!corrupted.contains(w)) fg.add_arc(in_node(w), out_node(w), g.is_trusted(w) ? big : 1);
  for (auto [x, y] : g.edges()) {
    if (corrupted.contains(x) || corrupted.contains(y)) continue;
    fg.add_arc(out_node(x), in_node(y), g.is_trusted(x) || x == b ? big : 1);
    fg.add_arc(out_node(y), in_node(x), g.is_trusted(y) || y == b ? big : 1);
  }
  for (NodeId v : g.vertices())
    if (v != b && !corrupted.contains(v) && fg.max_flow(out_node(b), in_node(v)) >= static_cast<std::int64_t>(f + 1))
      out.insert(v);
  return out;
}

Verdict oracle_check(const Topology& g, std::size_t f, ProtocolKind protocol, bool force) {
  if (g.vertex_count() > kOracleMaxNodes && !force)
    throw OracleRefused("the oracle is limited to " + std::to_string(kOracleMaxNodes) + " nodes (use force)");
  if (protocol == ProtocolKind::sigflood_t) require_all_authenticated(g);
  for (NodeId b : g.vertices()) {
    for (const auto& c : admissible_corruptions(g, f, b)) {
      RunConfig cfg;
      cfg.topology = g;
      cfg.f = f;
      cfg.protocol = protocol;
      cfg.broadcaster = b;
      cfg.corrupted = c;
      RunReport r = run(cfg);
      if (r.error) throw std::runtime_error("oracle run failed: " + *r.error);
      if (!r.quiesced) throw std::runtime_error("oracle run did not quiesce");
      if (protocol != ProtocolKind::dualrc) {
        std::set<NodeId> expected = graph_delivery_set(g, f, protocol, b, c);
        if (expected != r.delivered) {
          std::ostringstream os;
          os << "simulation and graph condition disagree for broadcaster " << b << " with corruption {";
          for (NodeId x : c) os << ' ' << x;
          os << " }";
          throw std::logic_error(os.str());
        }
      }
      auto missing = r.undelivered_correct();
      if (!missing.empty()) {
        Verdict v;
        v.ok = false;
        v.failing_broadcaster = b;
        v.failing_pair = std::make_pair(b, missing.front());
        v.witness = c;
        return v;
      }
    }
  }
  return Verdict::pass();
}

void attach_witness(Verdict& v, const Topology& g, std::size_t f, ProtocolKind protocol) {
  if (v.ok || g.vertex_count() > kOracleMaxNodes) return;
  std::vector<NodeId> sources;
  if (v.failing_broadcaster) sources.push_back(*v.failing_broadcaster);
  if (v.failing_pair) {
    sources.push_back(v.failing_pair->first);
    sources.push_back(v.failing_pair->second);
  }
  for (NodeId b : sources) {
    if (protocol == ProtocolKind::sigflood_t && !g.is_authenticated(b)) continue;
    for (const auto& c : admissible_corruptions(g, f, b)) {
      RunConfig cfg;
      cfg.topology = g;
      cfg.f = f;
      cfg.protocol = protocol;
      cfg.broadcaster = b;
      cfg.corrupted = c;
      RunReport r = run(cfg);
      if (!r.error && !r.all_correct_delivered()) {
        v.failing_broadcaster = b;
        v.witness = c;
        return;
      }
    }
  }
}

}  // namespace hybridrc
