#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "hybridrc/graph.hpp"
#include "hybridrc/message.hpp"
#include "hybridrc/protocol.hpp"

namespace hybridrc {

enum class SchedulerKind { fifo, random, adversarial_delay };
std::string_view to_string(SchedulerKind s);
std::optional<SchedulerKind> parse_scheduler(std::string_view s);

/// Corrupted nodes send nothing.
struct Silent {};
/// Corrupted nodes run the protocol honestly until they have sent `after_k_sends` messages.
struct Crash {
  std::size_t after_k_sends = 0;
};
/// Honest relaying plus fabricated path messages and own-id signatures.
struct ForgePaths {};
/// Honest relaying plus observed tokens re-sent under altered fields.
struct ReplaySigs {};
/// Fixed injections performed at the start of the run; otherwise silent.
struct ScriptedEvent {
  NodeId from;
  NodeId to;
  ProtocolMessage msg;
};
struct Scripted {
  std::vector<ScriptedEvent> events;
};

using AdversaryStrategy = std::variant<Silent, Crash, ForgePaths, ReplaySigs, Scripted>;
std::string strategy_name(const AdversaryStrategy& s);
/// "silent", "crash:<k>", "forge-paths", "replay-sigs".
std::optional<AdversaryStrategy> parse_strategy(std::string_view s);

struct RunConfig {
  Topology topology;
  std::size_t f = 1;
  ProtocolKind protocol = ProtocolKind::dolev_ut;
  NodeId broadcaster = 0;
  std::string payload = "m";
  std::set<NodeId> corrupted;
  AdversaryStrategy strategy = Silent{};
  std::uint64_t seed = 1;
  SchedulerKind scheduler = SchedulerKind::fifo;
  std::size_t max_events = 2'000'000;
  Options opts;
  bool trace = false;
  /// Byzantine sends are capped at this multiple of a silent run's message count.
  std::size_t byzantine_budget_factor = 10;
  /// Node whose incoming messages the adversarial-delay scheduler starves;
  /// chosen from the seed when unset.
  std::optional<NodeId> delay_target;
  std::size_t delay_window = 64;
};

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Throws ConfigError if the corruption set or broadcaster violate the fault model.
void validate(const RunConfig& cfg);

struct RunReport {
  std::set<NodeId> correct;
  /// Nodes (correct or corrupted) that delivered the broadcast.
  std::set<NodeId> delivered;
  std::map<NodeId, std::size_t> delivery_step;
  std::size_t messages_sent = 0;
  std::size_t byzantine_sent = 0;
  /// Messages per undirected edge (u < v), both directions combined.
  std::map<std::pair<NodeId, NodeId>, std::size_t> per_edge;
  std::size_t dropped_invalid = 0;
  std::size_t cycles = 0;
  std::size_t steps = 0;
  bool quiesced = false;
  std::vector<std::string> trace;
  std::vector<std::string> violations;
  std::optional<std::string> error;

  bool all_correct_delivered() const;
  std::vector<NodeId> undelivered_correct() const;
  std::size_t max_per_edge() const;
};

/// Deterministic: identical configs give identical reports.
RunReport run(const RunConfig& cfg);

std::string format_trace(const RunReport& r);
std::string format_summary(const RunReport& r);

struct SweepStats {
  std::size_t runs = 0;
  std::size_t errors = 0;
  std::size_t full_delivery = 0;
  double delivery_rate = 0.0;
  double mean_per_edge = 0.0;
  std::size_t max_per_edge = 0;
  std::size_t violations = 0;
  std::map<ProtocolKind, std::size_t> messages_by_protocol;
  std::vector<RunReport> reports;
};

SweepStats sweep(const std::vector<RunConfig>& cfgs);

/// Outcome of a topology check.
struct Verdict {
  bool ok = true;
  std::optional<std::pair<NodeId, NodeId>> failing_pair;
  std::optional<NodeId> failing_broadcaster;
  std::optional<std::set<NodeId>> witness;

  static Verdict pass() { return {}; }
};

struct OracleRefused : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr std::size_t kOracleMaxNodes = 10;

/// Corruption sets admissible against `broadcaster`: untrusted, not the
/// broadcaster, at most f members. Ordered by size, then lexicographically.
std::vector<std::set<NodeId>> admissible_corruptions(const Topology& g, std::size_t f, NodeId broadcaster);

/// Runs every admissible corruption set with silent faults under fifo and
/// reports the first one leaving a correct node undelivered.
Verdict all_corruption_runs(const Topology& g, std::size_t f, ProtocolKind protocol, NodeId broadcaster,
                            const Options& opts = {}, bool force = false);

}  // namespace hybridrc
