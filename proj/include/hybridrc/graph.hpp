#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hybridrc {

using NodeId = std::uint32_t;

/// Ordered sequence of relays. Entries are distinct; may be empty.
using Path = std::vector<NodeId>;

std::string to_string(const Path& p);

/// Undirected network topology with per-node roles.
///
/// The id universe is [0, n). A topology may contain only a subset of the
/// universe (the reduced graphs built by collapse_trusted / insert_trusted keep
/// the original ids), so callers must test contains() before using an id.
/// Adjacency lists are kept sorted so that every iteration is in NodeId order.
class Topology {
 public:
  Topology() = default;
  explicit Topology(std::size_t n);

  /// Universe size (ids are < size()).
  std::size_t size() const { return adj_.size(); }
  std::size_t vertex_count() const { return vertex_count_; }
  bool contains(NodeId u) const { return u < size() && present_[u] != 0; }
  std::vector<NodeId> vertices() const;

  void add_vertex(NodeId u);
  void remove_vertex(NodeId u);

  /// Adds the undirected edge (u, v). Returns false if it already existed.
  bool add_edge(NodeId u, NodeId v);
  bool remove_edge(NodeId u, NodeId v);
  bool has_edge(NodeId u, NodeId v) const;
  const std::vector<NodeId>& adjacent(NodeId u) const;
  std::size_t edge_count() const { return edge_count_; }
  /// All edges as (u, v) with u < v, sorted.
  std::vector<std::pair<NodeId, NodeId>> edges() const;

  bool is_authenticated(NodeId u) const { return flag(u, kAuth); }
  bool is_trusted(NodeId u) const { return flag(u, kTrusted); }
  bool has_tc(NodeId u) const { return flag(u, kTc); }
  void set_authenticated(NodeId u, bool on = true);
  void set_trusted(NodeId u, bool on = true);
  /// Trusted components require an authenticated host.
  void set_tc(NodeId u, bool on = true);

  std::vector<NodeId> trusted_nodes() const;

  friend bool operator==(const Topology&, const Topology&) = default;

 private:
  enum : std::uint8_t { kAuth = 1, kTrusted = 2, kTc = 4 };
  bool flag(NodeId u, std::uint8_t bit) const;
  void check(NodeId u) const;

  std::vector<std::vector<NodeId>> adj_;
  std::vector<std::uint8_t> present_;
  std::vector<std::uint8_t> roles_;
  std::size_t vertex_count_ = 0;
  std::size_t edge_count_ = 0;
};

/// Γ(u). Throws std::out_of_range for ids outside the topology.
std::vector<NodeId> neighbors(const Topology& g, NodeId u);

/// Disjoint-set forest over the id universe of a topology.
class Partition {
 public:
  explicit Partition(std::size_t n);
  NodeId find(NodeId u) const;
  void unite(NodeId u, NodeId v);
  bool same(NodeId u, NodeId v) const { return find(u) == find(v); }
  /// Classes restricted to `members`, each sorted, ordered by smallest member.
  std::vector<std::vector<NodeId>> classes(std::span<const NodeId> members) const;

 private:
  mutable std::vector<NodeId> parent_;
  std::vector<std::uint8_t> rank_;
};

/// Components of the graph keeping only edges with at least one trusted
/// endpoint. Two untrusted nodes share a class iff a (possibly empty) chain of
/// trusted nodes joins them.
Partition trusted_partition(const Topology& g);

/// Graph on the untrusted nodes of `g` where two nodes are adjacent iff they
/// are adjacent in `g` or joined through a nonempty chain of trusted nodes.
Topology collapse_trusted(const Topology& g);

/// Adds trusted node `vt` to `sub` (a subgraph of `g`), linking it to every
/// vertex of `sub` it is adjacent to in `g` or reaches through trusted nodes.
Topology insert_trusted(const Topology& g, const Topology& sub, NodeId vt);

/// Directed integer-capacitated graph used for all max-flow checks.
///
/// Vertex 2u is the in-node and 2u+1 the out-node of node u. Extra vertices
/// (synthetic sources) can be appended with add_vertex().
class FlowGraph {
 public:
  struct Arc {
    std::uint32_t from;
    std::uint32_t to;
    std::int64_t capacity;
  };

  explicit FlowGraph(std::size_t vertices = 0);

  std::size_t vertex_count() const { return out_.size(); }
  std::uint32_t add_vertex();
  /// Returns the arc index.
  std::size_t add_arc(std::uint32_t from, std::uint32_t to, std::int64_t capacity);
  const std::vector<Arc>& arcs() const { return arcs_; }
  const std::vector<std::size_t>& out_arcs(std::uint32_t v) const { return out_.at(v); }
  void set_capacity(std::size_t arc, std::int64_t capacity) { arcs_.at(arc).capacity = capacity; }

  /// Exact maximum s→t flow (Dinic). Does not modify the graph.
  std::int64_t max_flow(std::uint32_t s, std::uint32_t t) const;

 private:
  std::vector<Arc> arcs_;
  std::vector<std::vector<std::size_t>> out_;
};

constexpr std::uint32_t in_node(NodeId u) { return 2 * u; }
constexpr std::uint32_t out_node(NodeId u) { return 2 * u + 1; }

/// Node-split flow graph of `g`. Internal arcs and arcs leaving a trusted
/// node's out-node get `trusted_capacity`, every other arc capacity 1.
FlowGraph build_flow_graph(const Topology& g, std::size_t f, std::int64_t trusted_capacity);

std::int64_t max_flow(const FlowGraph& fg, std::uint32_t s, std::uint32_t t);

/// Number of internally vertex-disjoint u–v paths, ignoring node roles.
/// An edge (u, v) itself counts as one path.
std::size_t vertex_connectivity(const Topology& g, NodeId u, NodeId v);

Path strip_trusted(const Path& p, const Topology& g);
Path strip_trusted_and_tc(const Path& p, const Topology& g);

/// True iff some k members of `paths` are pairwise vertex-disjoint.
/// Exact branch-and-bound search; every path must be nonempty.
bool has_k_disjoint(std::span<const Path> paths, std::size_t k);

}  // namespace hybridrc
