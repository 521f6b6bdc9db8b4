#include "hybridrc/simnet.hpp"

#include <algorithm>
#include <deque>
#include <memory>
#include <random>
#include <sstream>

#include "hybridrc/crypto.hpp"
#include "hybridrc/path_set.hpp"

namespace hybridrc {

std::string_view to_string(SchedulerKind s) {
  switch (s) {
    case SchedulerKind::fifo: return "fifo";
    case SchedulerKind::random: return "random";
    case SchedulerKind::adversarial_delay: return "adversarial-delay";
  }
  return "?";
}

std::optional<SchedulerKind> parse_scheduler(std::string_view s) {
  if (s == "fifo") return SchedulerKind::fifo;
  if (s == "random") return SchedulerKind::random;
  if (s == "adversarial-delay" || s == "adversarial_delay") return SchedulerKind::adversarial_delay;
  return std::nullopt;
}

std::string strategy_name(const AdversaryStrategy& s) {
  struct V {
    std::string operator()(const Silent&) const { return "silent"; }
    std::string operator()(const Crash& c) const { return "crash:" + std::to_string(c.after_k_sends); }
    std::string operator()(const ForgePaths&) const { return "forge-paths"; }
    std::string operator()(const ReplaySigs&) const { return "replay-sigs"; }
    std::string operator()(const Scripted&) const { return "scripted"; }
  };
  return std::visit(V{}, s);
}

std::optional<AdversaryStrategy> parse_strategy(std::string_view s) {
  if (s == "silent") return Silent{};
  if (s == "forge-paths") return ForgePaths{};
  if (s == "replay-sigs") return ReplaySigs{};
  if (s.starts_with("crash:")) {
    try {
      std::size_t used = 0;
      std::string num(s.substr(6));
      unsigned long k = std::stoul(num, &used);
      if (used == num.size()) return Crash{k};
    } catch (const std::exception&) {
    }
  }
  return std::nullopt;
}

void validate(const RunConfig& cfg) {
  const Topology& g = cfg.topology;
  if (g.size() > NodeSet::kMaxNodes) throw ConfigError("simulation supports at most 64 nodes");
  if (!g.contains(cfg.broadcaster)) throw ConfigError("broadcaster is not in the topology");
  if (cfg.corrupted.size() > cfg.f)
    throw ConfigError("corruption set has " + std::to_string(cfg.corrupted.size()) + " members, above f=" + std::to_string(cfg.f));
  for (NodeId c : cfg.corrupted) {
    if (!g.contains(c)) throw ConfigError("corrupted node " + std::to_string(c) + " is not in the topology");
    if (g.is_trusted(c)) throw ConfigError("trusted node " + std::to_string(c) + " cannot be corrupted");
    if (c == cfg.broadcaster) throw ConfigError("the broadcaster cannot be corrupted");
  }
  if (cfg.protocol == ProtocolKind::sigflood_t && !g.is_authenticated(cfg.broadcaster))
    throw ConfigError("signature flooding needs an authenticated broadcaster");
  if (const auto* sc = std::get_if<Scripted>(&cfg.strategy))
    for (const auto& e : sc->events)
      if (!cfg.corrupted.contains(e.from) || !g.contains(e.to) || !g.has_edge(e.from, e.to))
        throw ConfigError("scripted event must go from a corrupted node to one of its neighbours");
}

bool RunReport::all_correct_delivered() const { return undelivered_correct().empty(); }

std::vector<NodeId> RunReport::undelivered_correct() const {
  std::vector<NodeId> out;
  for (NodeId u : correct)
    if (!delivered.contains(u)) out.push_back(u);
  return out;
}

std::size_t RunReport::max_per_edge() const {
  std::size_t m = 0;
  for (const auto& [e, c] : per_edge) m = std::max(m, c);
  return m;
}

std::string format_trace(const RunReport& r) {
  std::string out;
  for (const auto& line : r.trace) {
    out += line;
    out += '\n';
  }
  return out;
}

std::string format_summary(const RunReport& r) {
  std::ostringstream os;
  os << "delivered " << r.delivered.size() << " (correct " << (r.correct.size() - r.undelivered_correct().size()) << '/'
     << r.correct.size() << ")\n";
  os << "undelivered";
  for (NodeId u : r.undelivered_correct()) os << ' ' << u;
  os << "\nmessages " << r.messages_sent << " byzantine " << r.byzantine_sent << " max-per-edge " << r.max_per_edge()
     << "\ndropped-invalid " << r.dropped_invalid << " cycles " << r.cycles << "\nsteps " << r.steps << " quiesced "
     << (r.quiesced ? "yes" : "no") << '\n';
  for (const auto& v : r.violations) os << "violation " << v << '\n';
  if (r.error) os << "error " << *r.error << '\n';
  return os.str();
}

namespace {

struct Pending {
  NodeId from;
  NodeId to;
  ProtocolMessage msg;
  std::size_t enqueued_at;
};

/// Global pool of in-flight messages; the scheduler picks the next one.
class Pool {
 public:
  Pool(SchedulerKind kind, std::optional<NodeId> target, std::size_t window, std::uint64_t seed)
      : kind_(kind), target_(target), window_(window), rng_(seed ^ 0x9e3779b97f4a7c15ull) {}

  void push(Pending p) {
    if (kind_ == SchedulerKind::random) {
      bag_.push_back(std::move(p));
    } else if (kind_ == SchedulerKind::adversarial_delay && target_ && p.to == *target_) {
      starved_.push_back(std::move(p));
    } else {
      queue_.push_back(std::move(p));
    }
  }

  bool empty() const { return bag_.empty() && queue_.empty() && starved_.empty(); }

  Pending pop(std::size_t step) {
    if (kind_ == SchedulerKind::random) {
      std::size_t i = std::uniform_int_distribution<std::size_t>(0, bag_.size() - 1)(rng_);
      std::swap(bag_[i], bag_.back());
      Pending p = std::move(bag_.back());
      bag_.pop_back();
      return p;
    }
    std::deque<Pending>* from = &queue_;
    if (!starved_.empty() && (queue_.empty() || step - starved_.front().enqueued_at >= window_)) from = &starved_;
    Pending p = std::move(from->front());
    from->pop_front();
    return p;
  }

 private:
  SchedulerKind kind_;
  std::optional<NodeId> target_;
  std::size_t window_;
  std::mt19937_64 rng_;
  std::deque<Pending> queue_;
  std::deque<Pending> starved_;
  std::vector<Pending> bag_;
};

/// Behaviour of the corrupted nodes of one run.
class Adversary {
 public:
  Adversary(const RunConfig& cfg, TokenAuthority& authority)
      : cfg_(cfg), authority_(authority), rng_(cfg.seed * 0x2545f4914f6cdd1dull + 7) {
    const bool shadow = std::holds_alternative<Crash>(cfg.strategy) || std::holds_alternative<ForgePaths>(cfg.strategy) ||
                        std::holds_alternative<ReplaySigs>(cfg.strategy);
    for (NodeId c : cfg.corrupted) {
      Node& n = nodes_[c];
      if (shadow) {
        ProcessContext ctx{&cfg.topology, c, cfg.f, &authority, cfg.opts};
        n.engine = make_process(cfg.protocol, ctx);
      }
      if (cfg.topology.has_tc(c)) n.tc.emplace(authority, c, cfg.f);
    }
  }

  bool active() const { return !std::holds_alternative<Silent>(cfg_.strategy); }
  bool crashed(NodeId c) const {
    const auto* cr = std::get_if<Crash>(&cfg_.strategy);
    return cr && nodes_.at(c).sent >= cr->after_k_sends;
  }
  Process* engine(NodeId c) { return nodes_.at(c).engine.get(); }

  /// Messages injected before any delivery.
  std::vector<Pending> start() {
    std::vector<Pending> out;
    if (const auto* sc = std::get_if<Scripted>(&cfg_.strategy)) {
      for (const auto& e : sc->events) out.push_back({e.from, e.to, e.msg, 0});
      return out;
    }
    for (NodeId c : cfg_.corrupted) inject(c, out);
    return out;
  }

  /// Handles one message arriving at corrupted node `c`.
  std::vector<Pending> receive(NodeId c, NodeId from, const ProtocolMessage& msg, std::vector<MessageId>& delivered) {
    std::vector<Pending> out;
    Node& n = nodes_.at(c);
    if (!n.engine || crashed(c)) return out;
    observe(n, msg);
    Effects e = n.engine->receive(from, msg);
    delivered = e.delivered;
    for (auto& s : e.sends) out.push_back({c, s.to, std::move(s.msg), 0});
    inject(c, out);
    return out;
  }

  void count_send(NodeId c) { ++nodes_.at(c).sent; }

 private:
  struct Node {
    std::unique_ptr<Process> engine;
    std::optional<TrustedComponent> tc;
    std::vector<SignatureToken> tokens;
    std::vector<SignedPath> entries;
    std::vector<DolevPath> paths;
    std::size_t sent = 0;
  };

  void observe(Node& n, const ProtocolMessage& msg) {
    if (const auto* s = std::get_if<FloodSig>(&msg)) {
      n.tokens.push_back(s->sig);
    } else if (const auto* d = std::get_if<DualPath>(&msg)) {
      for (const auto& e : d->signed_paths) {
        n.entries.push_back(e);
        n.tokens.push_back(e.sig);
      }
    } else if (const auto* p = std::get_if<DolevPath>(&msg)) {
      if (n.paths.size() < 64) n.paths.push_back(*p);
    }
  }

  std::size_t below(std::size_t n) { return n ? std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_) : 0; }

  MessageId pick_id(NodeId self) {
    MessageId genuine{cfg_.broadcaster, cfg_.payload};
    switch (below(3)) {
      case 0: return genuine;
      case 1: return {cfg_.broadcaster, cfg_.payload + "*"};
      default: {
        NodeId c = static_cast<NodeId>(below(cfg_.topology.size()));
        if (c == self || !cfg_.topology.contains(c)) c = cfg_.broadcaster;
        return {c, "forged"};
      }
    }
  }

  Path random_path(NodeId self) {
    Path p;
    const std::size_t len = below(4);
    std::vector<NodeId> pool = cfg_.topology.vertices();
    std::erase(pool, self);
    std::shuffle(pool.begin(), pool.end(), rng_);
    for (std::size_t i = 0; i < len && i < pool.size(); ++i) p.push_back(pool[i]);
    return p;
  }

  void inject(NodeId c, std::vector<Pending>& out) {
    const bool forge = std::holds_alternative<ForgePaths>(cfg_.strategy);
    const bool replay = std::holds_alternative<ReplaySigs>(cfg_.strategy);
    if (!forge && !replay) return;
    Node& n = nodes_.at(c);
    Signer me(authority_, c);
    for (NodeId k : cfg_.topology.adjacent(c)) {
      MessageId id = pick_id(c);
      if (forge) {
        switch (cfg_.protocol) {
          case ProtocolKind::dolev_ut:
            out.push_back({c, k, DolevPath{id, random_path(c)}, 0});
            break;
          case ProtocolKind::sigflood_t:
            out.push_back({c, k, FloodSig{id, me.sign_payload(id)}, 0});
            break;
          case ProtocolKind::dualrc: {
            Path p = random_path(c);
            std::erase(p, k);
            std::vector<SignedPath> list;
            Path q = random_path(c);
            list.push_back({q, me.sign_path(q, id)});
            if (!n.entries.empty()) list.push_back(n.entries[below(n.entries.size())]);
            out.push_back({c, k, DualPath{id, p, list}, 0});
            if (below(2) == 0) out.push_back({c, k, FloodSig{id, me.sign_payload(id)}, 0});
            try_tc(n, c, k, out);
            break;
          }
        }
      } else if (cfg_.protocol == ProtocolKind::dolev_ut) {
        if (n.paths.empty()) continue;
        DolevPath p = n.paths[below(n.paths.size())];
        if (below(2)) p.id = id;
        else if (!p.path.empty()) p.path.pop_back();
        out.push_back({c, k, p, 0});
      } else {
        if (n.tokens.empty()) continue;
        const SignatureToken& t = n.tokens[below(n.tokens.size())];
        MessageId same{t.broadcaster, cfg_.payload};
        if (t.scope == SignScope::payload) {
          out.push_back({c, k, FloodSig{below(2) ? id : same, t}, 0});
        } else if (cfg_.protocol == ProtocolKind::dualrc) {
          Path altered = random_path(c);
          out.push_back({c, k, DualPath{below(2) ? id : same, {}, {SignedPath{altered, t}}}, 0});
        }
        if (cfg_.protocol == ProtocolKind::dualrc) try_tc(n, c, k, out);
      }
    }
  }

  /// A corrupted TC host may feed its component whatever it has seen.
  void try_tc(Node& n, NodeId c, NodeId k, std::vector<Pending>& out) {
    if (!n.tc || below(4) != 0) return;
    MessageId id{cfg_.broadcaster, cfg_.payload};
    try {
      SignatureToken t;
      if (!n.tokens.empty() && below(2)) {
        t = n.tc->attest_signature(id, n.tokens[below(n.tokens.size())]);
      } else {
        std::vector<SignedPath> chosen;
        for (std::size_t i = 0; i <= cfg_.f && !n.entries.empty(); ++i) chosen.push_back(n.entries[below(n.entries.size())]);
        t = n.tc->attest_paths(id, chosen);
      }
      out.push_back({c, k, FloodSig{id, t}, 0});
    } catch (const AttestationRefused&) {
    }
  }

  const RunConfig& cfg_;
  TokenAuthority& authority_;
  std::mt19937_64 rng_;
  std::map<NodeId, Node> nodes_;
};

std::size_t silent_baseline(const RunConfig& cfg) {
  RunConfig base = cfg;
  base.strategy = Silent{};
  base.trace = false;
  return run(base).messages_sent;
}

}  // namespace

RunReport run(const RunConfig& cfg) {
  validate(cfg);
  const Topology& g = cfg.topology;
  RunReport rep;
  for (NodeId u : g.vertices())
    if (!cfg.corrupted.contains(u)) rep.correct.insert(u);

  std::size_t budget = 0;
  if (std::holds_alternative<ForgePaths>(cfg.strategy) || std::holds_alternative<ReplaySigs>(cfg.strategy))
    budget = cfg.byzantine_budget_factor * std::max<std::size_t>(1, silent_baseline(cfg));
  else if (const auto* sc = std::get_if<Scripted>(&cfg.strategy))
    budget = sc->events.size();
  else if (std::holds_alternative<Crash>(cfg.strategy))
    budget = static_cast<std::size_t>(-1);

  TokenAuthority authority(g);
  std::map<NodeId, std::unique_ptr<Process>> procs;
  for (NodeId u : rep.correct) procs[u] = make_process(cfg.protocol, ProcessContext{&g, u, cfg.f, &authority, cfg.opts});
  Adversary adversary(cfg, authority);

  std::optional<NodeId> target = cfg.delay_target;
  if (!target && cfg.scheduler == SchedulerKind::adversarial_delay) {
    std::vector<NodeId> cand;
    for (NodeId u : rep.correct)
      if (u != cfg.broadcaster) cand.push_back(u);
    if (!cand.empty()) target = cand[std::mt19937_64(cfg.seed)() % cand.size()];
  }
  Pool pool(cfg.scheduler, target, cfg.delay_window, cfg.seed);

  std::size_t step = 0;
  std::map<std::pair<NodeId, MessageId>, std::size_t> delivery_count;
  const MessageId genuine{cfg.broadcaster, cfg.payload};

  auto log = [&](std::string_view kind, NodeId from, NodeId to, const std::string& what) {
    if (!cfg.trace) return;
    std::ostringstream os;
    os << step << '\t' << kind << '\t' << from << '\t' << to << '\t' << what;
    rep.trace.push_back(os.str());
  };
  auto record_deliveries = [&](NodeId u, const std::vector<MessageId>& ids) {
    for (const MessageId& id : ids) {
      ++delivery_count[{u, id}];
      log("deliver", u, u, "src=" + std::to_string(id.broadcaster) + " m=\"" + id.payload + '"');
      if (id == genuine && rep.delivered.insert(u).second) rep.delivery_step[u] = step;
    }
  };
  auto enqueue = [&](NodeId from, NodeId to, ProtocolMessage msg) {
    const bool byz = cfg.corrupted.contains(from);
    if (byz) {
      if (rep.byzantine_sent >= budget || adversary.crashed(from)) return;
      ++rep.byzantine_sent;
      adversary.count_send(from);
    }
    ++rep.messages_sent;
    ++rep.per_edge[{std::min(from, to), std::max(from, to)}];
    log(byz ? "inject" : "send", from, to, summary(msg));
    pool.push({from, to, std::move(msg), step});
  };

  try {
    Effects first = procs.at(cfg.broadcaster)->broadcast(cfg.payload);
    record_deliveries(cfg.broadcaster, first.delivered);
    for (auto& s : first.sends) enqueue(cfg.broadcaster, s.to, std::move(s.msg));
    for (auto& p : adversary.start()) enqueue(p.from, p.to, std::move(p.msg));

    while (!pool.empty()) {
      if (step >= cfg.max_events) break;
      Pending p = pool.pop(step);
      ++step;
      log("recv", p.from, p.to, summary(p.msg));
      if (cfg.corrupted.contains(p.to)) {
        std::vector<MessageId> got;
        auto outs = adversary.receive(p.to, p.from, p.msg, got);
        record_deliveries(p.to, got);
        for (auto& o : outs) enqueue(o.from, o.to, std::move(o.msg));
        continue;
      }
      Effects e = procs.at(p.to)->receive(p.from, p.msg);
      record_deliveries(p.to, e.delivered);
      for (auto& s : e.sends) enqueue(p.to, s.to, std::move(s.msg));
    }
  } catch (const DisjointPathSet::CapacityExceeded& ex) {
    rep.error = ex.what();
  }
  rep.steps = step;
  rep.quiesced = pool.empty() && !rep.error;

  for (const auto& [u, proc] : procs) {
    rep.dropped_invalid += proc->counters().dropped_invalid;
    rep.cycles += proc->counters().cycles;
    for (const MessageId& id : proc->deliveries()) {
      const bool correct_source = rep.correct.contains(id.broadcaster);
      if (correct_source && !(id == genuine))
        rep.violations.push_back("no-creation: node " + std::to_string(u) + " delivered \"" + id.payload + "\" from " +
                                 std::to_string(id.broadcaster));
    }
  }
  for (const auto& [key, count] : delivery_count)
    if (count > 1 && rep.correct.contains(key.first))
      rep.violations.push_back("duplication: node " + std::to_string(key.first) + " delivered twice");

  std::set<SignatureToken> attested;
  for (const auto& a : authority.attestations()) attested.insert(a.token);
  for (const SignatureToken& t : authority.minted())
    if (t.kind == SignerKind::tc && !attested.contains(t)) rep.violations.push_back("tc token without attestation: " + to_string(t));
  return rep;
}

SweepStats sweep(const std::vector<RunConfig>& cfgs) {
  SweepStats st;
  std::size_t edge_total = 0;
  std::size_t edge_count = 0;
  for (const RunConfig& cfg : cfgs) {
    RunReport r;
    try {
      r = run(cfg);
    } catch (const std::exception& ex) {
      r.error = ex.what();
    }
    ++st.runs;
    if (r.error) ++st.errors;
    if (!r.error && r.all_correct_delivered()) ++st.full_delivery;
    st.violations += r.violations.size();
    st.messages_by_protocol[cfg.protocol] += r.messages_sent;
    for (const auto& [e, c] : r.per_edge) {
      edge_total += c;
      st.max_per_edge = std::max(st.max_per_edge, c);
    }
    edge_count += cfg.topology.edge_count();
    st.reports.push_back(std::move(r));
  }
  if (st.runs) st.delivery_rate = static_cast<double>(st.full_delivery) / static_cast<double>(st.runs);
  if (edge_count) st.mean_per_edge = static_cast<double>(edge_total) / static_cast<double>(edge_count);
  return st;
}

std::vector<std::set<NodeId>> admissible_corruptions(const Topology& g, std::size_t f, NodeId broadcaster) {
  std::vector<NodeId> cand;
  for (NodeId u : g.vertices())
    if (u != broadcaster && !g.is_trusted(u)) cand.push_back(u);
  std::vector<std::set<NodeId>> out;
  std::vector<std::size_t> idx;
  for (std::size_t size = 0; size <= std::min(f, cand.size()); ++size) {
    idx.resize(size);
    for (std::size_t i = 0; i < size; ++i) idx[i] = i;
    while (true) {
      std::set<NodeId> s;
      for (std::size_t i : idx) s.insert(cand[i]);
      out.push_back(std::move(s));
      std::size_t i = size;
      while (i > 0 && idx[i - 1] == cand.size() - size + i - 1) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < size; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return out;
}

Verdict all_corruption_runs(const Topology& g, std::size_t f, ProtocolKind protocol, NodeId broadcaster,
                            const Options& opts, bool force) {
  if (g.vertex_count() > kOracleMaxNodes && !force)
    throw OracleRefused("exhaustive corruption runs are limited to " + std::to_string(kOracleMaxNodes) + " nodes");
  for (const auto& c : admissible_corruptions(g, f, broadcaster)) {
    RunConfig cfg;
    cfg.topology = g;
    cfg.f = f;
    cfg.protocol = protocol;
    cfg.broadcaster = broadcaster;
    cfg.corrupted = c;
    cfg.opts = opts;
    RunReport r = run(cfg);
    if (r.error) throw std::runtime_error("oracle run failed: " + *r.error);
    if (!r.quiesced) throw std::runtime_error("oracle run did not quiesce");
    auto missing = r.undelivered_correct();
    if (!missing.empty()) {
      Verdict v;
      v.ok = false;
      v.failing_broadcaster = broadcaster;
      v.failing_pair = std::make_pair(broadcaster, missing.front());
      v.witness = c;
      return v;
    }
  }
  return Verdict::pass();
}

}  // namespace hybridrc
