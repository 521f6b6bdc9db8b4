#include "hybridrc/graph.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

namespace hybridrc {

std::string to_string(const Path& p) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) os << ',';
    os << p[i];
  }
  os << ']';
  return os.str();
}

// ---------------------------------------------------------------- Topology

Topology::Topology(std::size_t n) : adj_(n), present_(n, 1), roles_(n, 0), vertex_count_(n) {}

void Topology::check(NodeId u) const {
  if (!contains(u)) throw std::out_of_range("node " + std::to_string(u) + " is not in the topology");
}

bool Topology::flag(NodeId u, std::uint8_t bit) const {
  check(u);
  return (roles_[u] & bit) != 0;
}

std::vector<NodeId> Topology::vertices() const {
  std::vector<NodeId> out;
  out.reserve(vertex_count_);
  for (NodeId u = 0; u < size(); ++u)
    if (present_[u]) out.push_back(u);
  return out;
}

void Topology::add_vertex(NodeId u) {
  if (u >= size()) {
    adj_.resize(u + 1);
    present_.resize(u + 1, 0);
    roles_.resize(u + 1, 0);
  }
  if (!present_[u]) {
    present_[u] = 1;
    ++vertex_count_;
  }
}

void Topology::remove_vertex(NodeId u) {
  check(u);
  for (NodeId v : std::vector<NodeId>(adj_[u])) remove_edge(u, v);
  present_[u] = 0;
  roles_[u] = 0;
  --vertex_count_;
}

bool Topology::add_edge(NodeId u, NodeId v) {
  check(u);
  check(v);
  if (u == v) throw std::invalid_argument("self-loop on node " + std::to_string(u));
  auto& au = adj_[u];
  auto it = std::lower_bound(au.begin(), au.end(), v);
  if (it != au.end() && *it == v) return false;
  au.insert(it, v);
  auto& av = adj_[v];
  av.insert(std::lower_bound(av.begin(), av.end(), u), u);
  ++edge_count_;
  return true;
}

bool Topology::remove_edge(NodeId u, NodeId v) {
  check(u);
  check(v);
  auto& au = adj_[u];
  auto it = std::lower_bound(au.begin(), au.end(), v);
  if (it == au.end() || *it != v) return false;
  au.erase(it);
  auto& av = adj_[v];
  av.erase(std::lower_bound(av.begin(), av.end(), u));
  --edge_count_;
  return true;
}

bool Topology::has_edge(NodeId u, NodeId v) const {
  if (!contains(u) || !contains(v)) return false;
  return std::binary_search(adj_[u].begin(), adj_[u].end(), v);
}

const std::vector<NodeId>& Topology::adjacent(NodeId u) const {
  check(u);
  return adj_[u];
}

std::vector<std::pair<NodeId, NodeId>> Topology::edges() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(edge_count_);
  for (NodeId u = 0; u < size(); ++u)
    for (NodeId v : adj_[u])
      if (u < v) out.emplace_back(u, v);
  return out;
}

void Topology::set_authenticated(NodeId u, bool on) {
  check(u);
  if (!on && (roles_[u] & kTc)) throw std::invalid_argument("node " + std::to_string(u) + " hosts a TC and must stay authenticated");
  roles_[u] = on ? (roles_[u] | kAuth) : (roles_[u] & ~kAuth);
}

void Topology::set_trusted(NodeId u, bool on) {
  check(u);
  roles_[u] = on ? (roles_[u] | kTrusted) : (roles_[u] & ~kTrusted);
}

void Topology::set_tc(NodeId u, bool on) {
  check(u);
  if (on && !(roles_[u] & kAuth)) throw std::invalid_argument("node " + std::to_string(u) + " hosts a TC but is not authenticated");
  roles_[u] = on ? (roles_[u] | kTc) : (roles_[u] & ~kTc);
}

std::vector<NodeId> Topology::trusted_nodes() const {
  std::vector<NodeId> out;
  for (NodeId u = 0; u < size(); ++u)
    if (present_[u] && (roles_[u] & kTrusted)) out.push_back(u);
  return out;
}

std::vector<NodeId> neighbors(const Topology& g, NodeId u) { return g.adjacent(u); }

// --------------------------------------------------------------- Partition

Partition::Partition(std::size_t n) : parent_(n), rank_(n, 0) {
  std::iota(parent_.begin(), parent_.end(), NodeId{0});
}

NodeId Partition::find(NodeId u) const {
  NodeId root = u;
  while (parent_.at(root) != root) root = parent_[root];
  while (parent_[u] != root) {
    NodeId next = parent_[u];
    parent_[u] = root;
    u = next;
  }
  return root;
}

void Partition::unite(NodeId u, NodeId v) {
  NodeId a = find(u), b = find(v);
  if (a == b) return;
  if (rank_[a] < rank_[b]) std::swap(a, b);
  parent_[b] = a;
  if (rank_[a] == rank_[b]) ++rank_[a];
}

std::vector<std::vector<NodeId>> Partition::classes(std::span<const NodeId> members) const {
  std::vector<std::vector<NodeId>> out;
  std::vector<std::ptrdiff_t> slot(parent_.size(), -1);
  std::vector<NodeId> sorted(members.begin(), members.end());
  std::sort(sorted.begin(), sorted.end());
  for (NodeId u : sorted) {
    NodeId r = find(u);
    if (slot[r] < 0) {
      slot[r] = static_cast<std::ptrdiff_t>(out.size());
      out.emplace_back();
    }
    out[slot[r]].push_back(u);
  }
  return out;
}

Partition trusted_partition(const Topology& g) {
  Partition p(g.size());
  for (auto [u, v] : g.edges())
    if (g.is_trusted(u) || g.is_trusted(v)) p.unite(u, v);
  return p;
}

namespace {

// Components of the subgraph induced by trusted nodes. A node reaches a
// trusted node t through a nonempty trusted chain iff it is adjacent to some
// trusted node in t's component.
Partition trusted_chains(const Topology& g) {
  Partition p(g.size());
  for (auto [u, v] : g.edges())
    if (g.is_trusted(u) && g.is_trusted(v)) p.unite(u, v);
  return p;
}

// Roots of the trusted components adjacent to u, sorted and unique.
std::vector<NodeId> adjacent_chains(const Topology& g, const Partition& chains, NodeId u) {
  std::vector<NodeId> roots;
  for (NodeId t : g.adjacent(u))
    if (g.is_trusted(t)) roots.push_back(chains.find(t));
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
  return roots;
}

void copy_roles(const Topology& from, Topology& to, NodeId u) {
  to.set_trusted(u, from.is_trusted(u));
  to.set_authenticated(u, from.is_authenticated(u));
  to.set_tc(u, from.has_tc(u));
}

Topology empty_like(const Topology& g) {
  Topology out(g.size());
  for (NodeId u = 0; u < g.size(); ++u) out.remove_vertex(u);
  return out;
}

}  // namespace

Topology collapse_trusted(const Topology& g) {
  Partition chains = trusted_chains(g);
  Topology out = empty_like(g);
  std::vector<NodeId> untrusted;
  for (NodeId u : g.vertices())
    if (!g.is_trusted(u)) {
      out.add_vertex(u);
      copy_roles(g, out, u);
      untrusted.push_back(u);
    }

  // Untrusted nodes bordering each trusted chain.
  std::vector<std::vector<NodeId>> border(g.size());
  for (NodeId u : untrusted)
    for (NodeId r : adjacent_chains(g, chains, u)) border[r].push_back(u);

  for (NodeId u : untrusted)
    for (NodeId v : g.adjacent(u))
      if (!g.is_trusted(v)) out.add_edge(u, v);
  for (const auto& group : border)
    for (std::size_t i = 0; i < group.size(); ++i)
      for (std::size_t j = i + 1; j < group.size(); ++j) out.add_edge(group[i], group[j]);
  return out;
}

Topology insert_trusted(const Topology& g, const Topology& sub, NodeId vt) {
  if (!g.contains(vt) || !g.is_trusted(vt)) throw std::invalid_argument("insert_trusted: node " + std::to_string(vt) + " is not trusted");
  if (sub.contains(vt)) throw std::invalid_argument("insert_trusted: node " + std::to_string(vt) + " already in subgraph");
  Partition chains = trusted_chains(g);
  const NodeId target = chains.find(vt);
  Topology out = sub;
  out.add_vertex(vt);
  copy_roles(g, out, vt);
  for (NodeId u : sub.vertices()) {
    if (!g.contains(u)) throw std::invalid_argument("insert_trusted: subgraph vertex outside graph");
    bool linked = g.has_edge(u, vt);
    if (!linked)
      for (NodeId r : adjacent_chains(g, chains, u))
        if (r == target) linked = true;
    if (linked) out.add_edge(u, vt);
  }
  return out;
}

// --------------------------------------------------------------- FlowGraph

FlowGraph::FlowGraph(std::size_t vertices) : out_(vertices) {}

std::uint32_t FlowGraph::add_vertex() {
  out_.emplace_back();
  return static_cast<std::uint32_t>(out_.size() - 1);
}

std::size_t FlowGraph::add_arc(std::uint32_t from, std::uint32_t to, std::int64_t capacity) {
  if (from >= out_.size() || to >= out_.size()) throw std::out_of_range("flow arc endpoint out of range");
  arcs_.push_back({from, to, capacity});
  out_[from].push_back(arcs_.size() - 1);
  return arcs_.size() - 1;
}

std::int64_t FlowGraph::max_flow(std::uint32_t s, std::uint32_t t) const {
  const std::size_t nv = out_.size();
  if (s >= nv || t >= nv) throw std::out_of_range("max_flow vertex out of range");
  if (s == t) throw std::invalid_argument("max_flow requires distinct source and sink");

  // Residual network: arc 2i is arcs_[i], arc 2i+1 its reverse.
  struct Residual {
    std::uint32_t to;
    std::int64_t cap;
  };
  std::vector<Residual> res;
  res.reserve(arcs_.size() * 2);
  std::vector<std::vector<std::uint32_t>> adj(nv);
  for (const Arc& a : arcs_) {
    adj[a.from].push_back(static_cast<std::uint32_t>(res.size()));
    res.push_back({a.to, a.capacity});
    adj[a.to].push_back(static_cast<std::uint32_t>(res.size()));
    res.push_back({a.from, 0});
  }

  std::vector<int> level(nv);
  std::vector<std::size_t> next(nv);
  auto bfs = [&] {
    std::fill(level.begin(), level.end(), -1);
    std::queue<std::uint32_t> q;
    level[s] = 0;
    q.push(s);
    while (!q.empty()) {
      std::uint32_t v = q.front();
      q.pop();
      for (std::uint32_t e : adj[v])
        if (res[e].cap > 0 && level[res[e].to] < 0) {
          level[res[e].to] = level[v] + 1;
          q.push(res[e].to);
        }
    }
    return level[t] >= 0;
  };

  // Iterative blocking-flow search.
  auto augment = [&]() -> std::int64_t {
    std::vector<std::uint32_t> stack_arcs;
    std::uint32_t v = s;
    while (true) {
      if (v == t) {
        std::int64_t push = std::numeric_limits<std::int64_t>::max();
        for (std::uint32_t e : stack_arcs) push = std::min(push, res[e].cap);
        for (std::uint32_t e : stack_arcs) {
          res[e].cap -= push;
          res[e ^ 1u].cap += push;
        }
        return push;
      }
      bool advanced = false;
      for (; next[v] < adj[v].size(); ++next[v]) {
        std::uint32_t e = adj[v][next[v]];
        if (res[e].cap > 0 && level[res[e].to] == level[v] + 1) {
          stack_arcs.push_back(e);
          v = res[e].to;
          advanced = true;
          break;
        }
      }
      if (advanced) continue;
      if (stack_arcs.empty()) return 0;
      level[v] = -1;  // dead end
      std::uint32_t back = stack_arcs.back();
      stack_arcs.pop_back();
      v = res[back ^ 1u].to;
      ++next[v];
    }
  };

  std::int64_t flow = 0;
  while (bfs()) {
    std::fill(next.begin(), next.end(), 0);
    while (std::int64_t pushed = augment()) flow += pushed;
  }
  return flow;
}

FlowGraph build_flow_graph(const Topology& g, std::size_t f, std::int64_t trusted_capacity) {
  const auto strict = static_cast<std::int64_t>(2 * f + 1);
  const auto relaxed = static_cast<std::int64_t>(f + 1);
  if (trusted_capacity != strict && trusted_capacity != relaxed)
    throw std::invalid_argument("trusted capacity must be 2f+1 or f+1");
  FlowGraph fg(2 * g.size());
  for (NodeId u : g.vertices()) fg.add_arc(in_node(u), out_node(u), g.is_trusted(u) ? trusted_capacity : 1);
  for (auto [u, v] : g.edges()) {
    fg.add_arc(out_node(u), in_node(v), g.is_trusted(u) ? trusted_capacity : 1);
    fg.add_arc(out_node(v), in_node(u), g.is_trusted(v) ? trusted_capacity : 1);
  }
  return fg;
}

std::int64_t max_flow(const FlowGraph& fg, std::uint32_t s, std::uint32_t t) { return fg.max_flow(s, t); }

std::size_t vertex_connectivity(const Topology& g, NodeId u, NodeId v) {
  if (u == v) throw std::invalid_argument("vertex_connectivity requires distinct nodes");
  if (!g.contains(u) || !g.contains(v)) throw std::out_of_range("vertex_connectivity node out of range");
  FlowGraph fg(2 * g.size());
  for (NodeId w : g.vertices()) fg.add_arc(in_node(w), out_node(w), 1);
  for (auto [a, b] : g.edges()) {
    fg.add_arc(out_node(a), in_node(b), 1);
    fg.add_arc(out_node(b), in_node(a), 1);
  }
  return static_cast<std::size_t>(fg.max_flow(out_node(u), in_node(v)));
}

Path strip_trusted(const Path& p, const Topology& g) {
  Path out;
  for (NodeId u : p)
    if (!g.is_trusted(u)) out.push_back(u);
  return out;
}

Path strip_trusted_and_tc(const Path& p, const Topology& g) {
  Path out;
  for (NodeId u : p)
    if (!g.is_trusted(u) && !g.has_tc(u)) out.push_back(u);
  return out;
}

bool has_k_disjoint(std::span<const Path> paths, std::size_t k) {
  if (k == 0) return true;
  if (paths.size() < k) return false;

  NodeId max_id = 0;
  for (const Path& p : paths) {
    if (p.empty()) throw std::invalid_argument("has_k_disjoint: empty path");
    for (NodeId u : p) max_id = std::max(max_id, u);
  }
  const std::size_t words = max_id / 64 + 1;

  std::vector<std::size_t> order(paths.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return paths[a].size() < paths[b].size(); });

  std::vector<std::vector<std::uint64_t>> masks;
  masks.reserve(paths.size());
  for (std::size_t i : order) {
    std::vector<std::uint64_t> m(words, 0);
    for (NodeId u : paths[i]) m[u / 64] |= std::uint64_t{1} << (u % 64);
    masks.push_back(std::move(m));
  }

  std::vector<std::uint64_t> used(words, 0);
  auto disjoint_from_used = [&](const std::vector<std::uint64_t>& m) {
    for (std::size_t w = 0; w < words; ++w)
      if (m[w] & used[w]) return false;
    return true;
  };
  auto search = [&](auto&& self, std::size_t start, std::size_t chosen) -> bool {
    if (chosen == k) return true;
    for (std::size_t i = start; i + (k - chosen) <= masks.size(); ++i) {
      if (!disjoint_from_used(masks[i])) continue;
      for (std::size_t w = 0; w < words; ++w) used[w] |= masks[i][w];
      bool found = self(self, i + 1, chosen + 1);
      for (std::size_t w = 0; w < words; ++w) used[w] &= ~masks[i][w];
      if (found) return true;
    }
    return false;
  };
  return search(search, 0, 0);
}

}  // namespace hybridrc
