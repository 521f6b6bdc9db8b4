#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "hybridrc/graph.hpp"

namespace hybridrc {

/// Set of node ids below 64, used for per-process path bookkeeping.
class NodeSet {
 public:
  static constexpr std::size_t kMaxNodes = 64;

  constexpr NodeSet() = default;
  static NodeSet of(const Path& p) {
    NodeSet s;
    for (NodeId u : p) s.insert(u);
    return s;
  }

  void insert(NodeId u) {
    if (u >= kMaxNodes) throw std::out_of_range("NodeSet holds ids below 64");
    bits_ |= std::uint64_t{1} << u;
  }
  void erase(NodeId u) {
    if (u < kMaxNodes) bits_ &= ~(std::uint64_t{1} << u);
  }
  bool contains(NodeId u) const { return u < kMaxNodes && ((bits_ >> u) & 1u); }
  bool empty() const { return bits_ == 0; }
  std::size_t size() const { return static_cast<std::size_t>(std::popcount(bits_)); }
  bool intersects(NodeSet o) const { return (bits_ & o.bits_) != 0; }
  bool subset_of(NodeSet o) const { return (bits_ & ~o.bits_) == 0; }
  std::uint64_t bits() const { return bits_; }

  std::vector<NodeId> members() const {
    std::vector<NodeId> out;
    for (std::uint64_t b = bits_; b; b &= b - 1) out.push_back(static_cast<NodeId>(std::countr_zero(b)));
    return out;
  }

  friend bool operator==(NodeSet, NodeSet) = default;
  friend auto operator<=>(NodeSet, NodeSet) = default;

 private:
  std::uint64_t bits_ = 0;
};

/// Stored dissemination paths of one process, reduced to node sets.
///
/// Tracks whether the set holds an empty path or `k` pairwise-disjoint
/// members. Only inclusion-minimal sets take part in the search, since a
/// superset can always be swapped for the subset it contains.
class DisjointPathSet {
 public:
  explicit DisjointPathSet(std::size_t k, std::size_t capacity = 10000) : k_(k), capacity_(capacity) {}

  struct CapacityExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
  };

  /// Returns false if the set was already stored. `tag` identifies the
  /// caller's record of this path (returned by witness()).
  bool insert(NodeSet s, std::size_t tag) {
    for (const auto& e : all_)
      if (e.set == s) return false;
    if (all_.size() >= capacity_) throw CapacityExceeded("stored path capacity exceeded");
    all_.push_back({s, tag});
    if (s.empty()) has_empty_ = true;
    if (satisfied()) return true;

    for (const auto& m : minimal_)
      if (m.set.subset_of(s)) return true;  // dominated: no new families
    std::erase_if(minimal_, [&](const Entry& m) { return s.subset_of(m.set); });
    minimal_.push_back({s, tag});

    // Any new family of k disjoint sets must contain s.
    std::vector<const Entry*> candidates;
    for (const auto& m : minimal_)
      if (m.set != s && !m.set.intersects(s)) candidates.push_back(&m);
    std::vector<std::size_t> picked;
    if (search(candidates, 0, s, k_ - 1, picked)) {
      witness_.assign(picked.begin(), picked.end());
      witness_.push_back(tag);
      found_ = true;
    }
    return true;
  }

  bool has_empty() const { return has_empty_; }
  bool has_k_disjoint() const { return found_ || k_ == 0; }
  bool satisfied() const { return has_empty_ || has_k_disjoint(); }

  /// Some stored set is contained in s (s is a superpath of a stored path).
  bool dominates_stored(NodeSet s) const {
    for (const auto& e : minimal_)
      if (e.set.subset_of(s)) return true;
    return has_empty_;
  }

  /// Tags of the first disjoint family found (empty if none).
  const std::vector<std::size_t>& witness() const { return witness_; }
  std::size_t size() const { return all_.size(); }
  std::vector<NodeSet> sets() const {
    std::vector<NodeSet> out;
    for (const auto& e : all_) out.push_back(e.set);
    return out;
  }
  void clear() {
    all_.clear();
    minimal_.clear();
    witness_.clear();
    has_empty_ = false;
    found_ = false;
  }

 private:
  struct Entry {
    NodeSet set;
    std::size_t tag;
  };

  bool search(const std::vector<const Entry*>& cand, std::size_t start, NodeSet used, std::size_t need,
              std::vector<std::size_t>& picked) const {
    if (need == 0) return true;
    for (std::size_t i = start; i + need <= cand.size(); ++i) {
      if (cand[i]->set.intersects(used)) continue;
      NodeSet next = used;
      for (NodeId u : cand[i]->set.members()) next.insert(u);
      picked.push_back(cand[i]->tag);
      if (search(cand, i + 1, next, need - 1, picked)) return true;
      picked.pop_back();
    }
    return false;
  }

  std::size_t k_;
  std::size_t capacity_;
  std::vector<Entry> all_;
  std::vector<Entry> minimal_;
  std::vector<std::size_t> witness_;
  bool has_empty_ = false;
  bool found_ = false;
};

}  // namespace hybridrc
