#pragma once

#include <optional>
#include <set>
#include <string_view>

#include "hybridrc/graph.hpp"
#include "hybridrc/protocol.hpp"
#include "hybridrc/simnet.hpp"

namespace hybridrc {

enum class Method { maxflow, simplify };
std::string_view to_string(Method m);
std::optional<Method> parse_method(std::string_view s);

/// Max-flow check on the node-split graph: every pair must be linked
/// directly, through trusted nodes, or by a flow of at least 2f+1.
Verdict dolev_ut_verify_maxflow(const Topology& g, std::size_t f);

/// Same property decided through vertex connectivity in the collapsed
/// graph f(G) and its trusted insertions.
Verdict dolev_ut_verify_simplify(const Topology& g, std::size_t f);

/// Signature flooding: as above with every 2f+1 replaced by f+1.
/// Throws std::invalid_argument if some node is not authenticated.
Verdict sigflood_t_verify(const Topology& g, std::size_t f, Method method);

/// Grows, for every broadcaster, the set of nodes guaranteed to deliver
/// until no node can be added.
Verdict dualrc_verify(const Topology& g, std::size_t f);

/// The set reached by dualrc_verify for one broadcaster.
std::set<NodeId> dualrc_delivery_set(const Topology& g, std::size_t f, NodeId broadcaster);

Verdict verify(const Topology& g, std::size_t f, ProtocolKind protocol, Method method = Method::maxflow);

/// Exhaustive ground truth: simulate every broadcaster against every
/// admissible silent corruption set. For the path and flooding protocols the
/// graph-level delivery condition is computed as well and must match the
/// simulation (std::logic_error otherwise). Throws OracleRefused above
/// kOracleMaxNodes nodes unless forced.
Verdict oracle_check(const Topology& g, std::size_t f, ProtocolKind protocol, bool force = false);

/// Nodes that receive the broadcast when `corrupted` stays silent, decided
/// on the graph alone. Only defined for dolev_ut and sigflood_t.
std::set<NodeId> graph_delivery_set(const Topology& g, std::size_t f, ProtocolKind protocol, NodeId broadcaster,
                                    const std::set<NodeId>& corrupted);

/// Fills verdict.witness (and failing_broadcaster) from simulation when the
/// topology is small enough. No-op on passing verdicts.
void attach_witness(Verdict& v, const Topology& g, std::size_t f, ProtocolKind protocol);

}  // namespace hybridrc
