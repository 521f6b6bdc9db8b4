#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "hybridrc/crypto.hpp"
#include "hybridrc/graph.hpp"
#include "hybridrc/message.hpp"
#include "hybridrc/path_set.hpp"

namespace hybridrc {

enum class ProtocolKind { dolev_ut, sigflood_t, dualrc };

std::string_view to_string(ProtocolKind k);
/// Accepts "dolev_ut", "sigflood_t", "dualrc" (and '-' for '_').
std::optional<ProtocolKind> parse_protocol(std::string_view s);

/// Optimisation and behaviour switches for the engines.
///
/// md1..md5, mbd1 and mbd10 govern unsigned path handling. DualRC always
/// applies md2..md5 since they are part of its receive logic, and ignores
/// mbd10: a superpath message still carries its own signed subpaths.
struct Options {
  bool md1 = true;    // deliver on direct receipt from the broadcaster
  bool md2 = true;    // on delivery, drop stored paths and relay an empty path
  bool md3 = true;    // never send paths to neighbours that sent an empty path
  bool md4 = true;    // ignore paths through a neighbour that sent an empty path
  bool md5 = true;    // stop handling paths once delivered and the empty path is out
  bool mbd1 = true;   // per-link duplicate suppression
  bool mbd10 = true;  // ignore superpaths of a path already handled
  bool sig_prune = false;  // stop relaying signatures once the payload is authenticated
  bool relay_sigs_after_path_delivery = true;
  std::size_t path_cap = 10000;

  static Options all_off();
  /// Parses a comma-separated flag list ("md1,md3,mbd10,sig-prune"); listed
  /// flags are on, the other optimisation flags off. "all" and "none" are
  /// accepted. Throws std::invalid_argument on unknown names.
  static Options parse(std::string_view list);
};

struct Outbound {
  NodeId to;
  ProtocolMessage msg;
};

/// Result of handling one event.
struct Effects {
  std::vector<Outbound> sends;
  std::vector<MessageId> delivered;  // first deliveries only
};

struct Counters {
  std::size_t dropped_invalid = 0;
  std::size_t cycles = 0;
  std::size_t attestations_refused = 0;
};

struct ProcessContext {
  const Topology* topology = nullptr;
  NodeId self = 0;
  std::size_t f = 0;
  TokenAuthority* authority = nullptr;
  Options opts;
};

/// One correct process running a protocol. Handlers are deterministic and
/// emit sends in ascending neighbour order.
class Process {
 public:
  explicit Process(ProcessContext ctx);
  virtual ~Process() = default;
  Process(const Process&) = delete;
  Process& operator=(const Process&) = delete;

  NodeId self() const { return ctx_.self; }
  virtual ProtocolKind kind() const = 0;

  /// Throws std::logic_error when the payload was already broadcast.
  virtual Effects broadcast(const std::string& payload) = 0;
  /// Throws std::invalid_argument if `from` is not a neighbour.
  Effects receive(NodeId from, const ProtocolMessage& msg);

  bool has_delivered(const MessageId& id) const { return delivered_.contains(id); }
  const std::set<MessageId>& deliveries() const { return delivered_; }
  const Counters& counters() const { return counters_; }

  /// Stored unsigned paths (node sets) for a broadcast, for invariant checks.
  virtual std::vector<NodeSet> stored_paths(const MessageId&) const { return {}; }
  virtual std::vector<NodeSet> stored_signed_paths(const MessageId&) const { return {}; }

 protected:
  virtual void on_receive(NodeId from, const ProtocolMessage& msg, Effects& out) = 0;

  /// Marks delivery; true on the first call for `id`.
  bool deliver(const MessageId& id, Effects& out);
  const Topology& g() const { return *ctx_.topology; }
  const std::vector<NodeId>& neighbours() const { return g().adjacent(ctx_.self); }

  ProcessContext ctx_;
  Counters counters_;

 private:
  std::set<MessageId> delivered_;
};

std::unique_ptr<Process> make_process(ProtocolKind kind, const ProcessContext& ctx);

/// Stored form of an unsigned path: trusted nodes and the broadcaster removed.
NodeSet stored_path_set(const Path& forwarded, NodeId broadcaster, const Topology& g);

}  // namespace hybridrc
