#include "hybridrc/protocol.hpp"

#include <algorithm>
#include <stdexcept>

namespace hybridrc {

std::string_view to_string(ProtocolKind k) {
  switch (k) {
    case ProtocolKind::dolev_ut: return "dolev_ut";
    case ProtocolKind::sigflood_t: return "sigflood_t";
    case ProtocolKind::dualrc: return "dualrc";
  }
  return "?";
}

std::optional<ProtocolKind> parse_protocol(std::string_view s) {
  std::string norm(s);
  std::replace(norm.begin(), norm.end(), '-', '_');
  if (norm == "dolev_ut") return ProtocolKind::dolev_ut;
  if (norm == "sigflood_t") return ProtocolKind::sigflood_t;
  if (norm == "dualrc") return ProtocolKind::dualrc;
  return std::nullopt;
}

Options Options::all_off() {
  Options o;
  o.md1 = o.md2 = o.md3 = o.md4 = o.md5 = o.mbd1 = o.mbd10 = false;
  o.sig_prune = false;
  return o;
}

Options Options::parse(std::string_view list) {
  if (list == "all") return Options{};
  Options o = all_off();
  if (list.empty() || list == "none") return o;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    std::size_t end = list.find(',', pos);
    if (end == std::string_view::npos) end = list.size();
    std::string_view name = list.substr(pos, end - pos);
    if (name == "md1") o.md1 = true;
    else if (name == "md2") o.md2 = true;
    else if (name == "md3") o.md3 = true;
    else if (name == "md4") o.md4 = true;
    else if (name == "md5") o.md5 = true;
    else if (name == "mbd1") o.mbd1 = true;
    else if (name == "mbd10") o.mbd10 = true;
    else if (name == "sig-prune" || name == "sig_prune") o.sig_prune = true;
    else throw std::invalid_argument("unknown option '" + std::string(name) + "'");
    pos = end + 1;
  }
  return o;
}

NodeSet stored_path_set(const Path& forwarded, NodeId broadcaster, const Topology& g) {
  NodeSet s;
  for (NodeId u : forwarded)
    if (u != broadcaster && !g.is_trusted(u)) s.insert(u);
  return s;
}

Process::Process(ProcessContext ctx) : ctx_(ctx) {
  if (!ctx_.topology || !ctx_.authority) throw std::invalid_argument("process context is incomplete");
  if (!ctx_.topology->contains(ctx_.self)) throw std::out_of_range("process id outside the topology");
}

Effects Process::receive(NodeId from, const ProtocolMessage& msg) {
  if (!g().contains(from) || !g().has_edge(ctx_.self, from))
    throw std::invalid_argument("node " + std::to_string(from) + " is not a neighbour of " + std::to_string(ctx_.self));
  Effects out;
  on_receive(from, msg, out);
  return out;
}

bool Process::deliver(const MessageId& id, Effects& out) {
  if (!delivered_.insert(id).second) return false;
  out.delivered.push_back(id);
  return true;
}

namespace {

enum class PathCheck { ok, cycle, malformed };

PathCheck check_path(const Path& p, NodeId self, NodeId from, const Topology& g) {
  NodeSet seen;
  for (NodeId u : p) {
    if (!g.contains(u) || u == from || seen.contains(u)) return PathCheck::malformed;
    seen.insert(u);
  }
  return seen.contains(self) ? PathCheck::cycle : PathCheck::ok;
}

/// Remembers handled paths for the superpath filter. Returns false if `raw`
/// contains one of them.
bool admit_superpath_filter(std::vector<NodeSet>& handled, NodeSet raw) {
  for (NodeSet h : handled)
    if (h.subset_of(raw)) return false;
  std::erase_if(handled, [&](NodeSet h) { return raw.subset_of(h); });
  handled.push_back(raw);
  return true;
}

Path appended(const Path& p, NodeId u) {
  Path out = p;
  out.push_back(u);
  return out;
}

// ---------------------------------------------------------------------------

class DolevProcess final : public Process {
 public:
  using Process::Process;
  ProtocolKind kind() const override { return ProtocolKind::dolev_ut; }

  Effects broadcast(const std::string& payload) override {
    MessageId id{self(), payload};
    if (has_delivered(id)) throw std::logic_error("payload already broadcast");
    Effects out;
    deliver(id, out);
    auto& st = state(id);
    for (NodeId k : neighbours()) send(st, out, k, DolevPath{id, {}});
    return out;
  }

  std::vector<NodeSet> stored_paths(const MessageId& id) const override {
    auto it = states_.find(id);
    return it == states_.end() ? std::vector<NodeSet>{} : it->second.paths.sets();
  }

 protected:
  void on_receive(NodeId from, const ProtocolMessage& msg, Effects& out) override {
    const auto* m = std::get_if<DolevPath>(&msg);
    if (!m) {
      ++counters_.dropped_invalid;
      return;
    }
    const MessageId& id = m->id;
    if (id.broadcaster == self()) return;
    switch (check_path(m->path, self(), from, g())) {
      case PathCheck::cycle: ++counters_.cycles; return;
      case PathCheck::malformed: ++counters_.dropped_invalid; return;
      case PathCheck::ok: break;
    }
    const Options& o = ctx_.opts;
    auto& st = state(id);
    const bool done = has_delivered(id);
    if (o.md5 && done && st.empty_sent) return;
    if (o.md4 && NodeSet::of(m->path).intersects(st.dn)) return;
    if (m->path.empty()) st.dn.insert(from);

    Path fwd = appended(m->path, from);
    if (o.mbd10 && !admit_superpath_filter(st.handled, NodeSet::of(fwd))) return;

    if (!done) {
      bool now = o.md1 && from == id.broadcaster;
      if (!now) {
        st.paths.insert(stored_path_set(fwd, id.broadcaster, g()), 0);
        now = st.paths.satisfied();
      }
      if (now) {
        deliver(id, out);
        if (o.md2) {
          st.paths.clear();
          for (NodeId k : neighbours())
            if (!(o.md3 && st.dn.contains(k))) send(st, out, k, DolevPath{id, {}});
          st.empty_sent = true;
          return;
        }
      }
    }
    const NodeSet on_path = NodeSet::of(fwd);
    for (NodeId k : neighbours()) {
      if (on_path.contains(k) || (o.md3 && st.dn.contains(k))) continue;
      send(st, out, k, DolevPath{id, fwd});
    }
  }

 private:
  struct State {
    explicit State(std::size_t k, std::size_t cap) : paths(k, cap) {}
    DisjointPathSet paths;
    NodeSet dn;
    std::vector<NodeSet> handled;
    std::set<std::pair<NodeId, Path>> sent;
    bool empty_sent = false;
  };

  State& state(const MessageId& id) {
    auto it = states_.find(id);
    if (it == states_.end()) it = states_.emplace(id, State(ctx_.f + 1, ctx_.opts.path_cap)).first;
    return it->second;
  }

  void send(State& st, Effects& out, NodeId to, DolevPath m) {
    if (ctx_.opts.mbd1 && !st.sent.emplace(to, m.path).second) return;
    out.sends.push_back({to, std::move(m)});
  }

  std::map<MessageId, State> states_;
};

// ---------------------------------------------------------------------------

class SigFloodProcess final : public Process {
 public:
  using Process::Process;
  ProtocolKind kind() const override { return ProtocolKind::sigflood_t; }

  Effects broadcast(const std::string& payload) override {
    if (!g().is_authenticated(self())) throw std::logic_error("signature flooding needs an authenticated broadcaster");
    MessageId id{self(), payload};
    if (has_delivered(id)) throw std::logic_error("payload already broadcast");
    Effects out;
    deliver(id, out);
    SignatureToken sig = Signer(*ctx_.authority, self()).sign_payload(id);
    for (NodeId k : neighbours()) out.sends.push_back({k, FloodSig{id, sig}});
    return out;
  }

 protected:
  void on_receive(NodeId from, const ProtocolMessage& msg, Effects& out) override {
    const auto* m = std::get_if<FloodSig>(&msg);
    if (!m) {
      ++counters_.dropped_invalid;
      return;
    }
    const MessageId& id = m->id;
    if (id.broadcaster == self() || has_delivered(id)) return;
    const bool valid = g().is_authenticated(self()) && m->sig.signer == id.broadcaster &&
                       m->sig.kind == SignerKind::node && ctx_.authority->verifies_payload(m->sig, id);
    if (!g().is_trusted(from) && !valid) {
      ++counters_.dropped_invalid;
      return;
    }
    deliver(id, out);
    for (NodeId k : neighbours())
      if (k != from && k != id.broadcaster) out.sends.push_back({k, *m});
  }
};

// ---------------------------------------------------------------------------

class DualRcProcess final : public Process {
 public:
  explicit DualRcProcess(const ProcessContext& ctx) : Process(ctx) {
    if (g().has_tc(self())) tc_.emplace(*ctx_.authority, self(), ctx_.f);
  }
  ProtocolKind kind() const override { return ProtocolKind::dualrc; }

  Effects broadcast(const std::string& payload) override {
    MessageId id{self(), payload};
    if (has_delivered(id)) throw std::logic_error("payload already broadcast");
    Effects out;
    deliver(id, out);
    auto& st = state(id);
    if (authenticated()) {
      SignatureToken own = signer().sign_payload(id);
      st.sigs.insert(own);
      st.own_sig_sent = true;
      for (NodeId k : neighbours()) out.sends.push_back({k, FloodSig{id, own}});
    }
    for (NodeId k : neighbours()) send_path(st, out, k, DualPath{id, {}, {}});
    return out;
  }

  std::vector<NodeSet> stored_paths(const MessageId& id) const override {
    auto it = states_.find(id);
    return it == states_.end() ? std::vector<NodeSet>{} : it->second.paths.sets();
  }
  std::vector<NodeSet> stored_signed_paths(const MessageId& id) const override {
    auto it = states_.find(id);
    return it == states_.end() ? std::vector<NodeSet>{} : it->second.spaths.sets();
  }

 protected:
  void on_receive(NodeId from, const ProtocolMessage& msg, Effects& out) override {
    if (const auto* s = std::get_if<FloodSig>(&msg)) return on_sig(from, *s, out);
    if (const auto* p = std::get_if<DualPath>(&msg)) return on_path(from, *p, out);
    ++counters_.dropped_invalid;
  }

 private:
  struct State {
    State(std::size_t k, std::size_t cap) : paths(k, cap), spaths(k, cap) {}
    DisjointPathSet paths;
    DisjointPathSet spaths;
    std::vector<SignedPath> entries;  // indexed by spaths tag
    NodeSet dn;
    std::set<SignatureToken> sigs;
    std::set<std::pair<NodeId, std::string>> sent;
    bool own_sig_sent = false;
    bool tc_sig_sent = false;
    bool delivered_by_path = false;
    bool sigs_settled = false;  // sig_prune: payload authenticated, relaying stops
  };

  bool authenticated() const { return g().is_authenticated(self()); }
  Signer signer() const { return Signer(*ctx_.authority, self()); }

  State& state(const MessageId& id) {
    auto it = states_.find(id);
    if (it == states_.end()) it = states_.emplace(id, State(ctx_.f + 1, ctx_.opts.path_cap)).first;
    return it->second;
  }

  /// Tokens that authenticate the payload on their own.
  bool delivery_grade(const SignatureToken& t, const MessageId& id) const {
    if (t.kind == SignerKind::tc) return true;
    if (t.signer == id.broadcaster) return true;
    return g().contains(t.signer) && g().is_trusted(t.signer);
  }

  void send_sig(Effects& out, const std::vector<NodeId>& to, const MessageId& id, const SignatureToken& t) {
    for (NodeId k : to) out.sends.push_back({k, FloodSig{id, t}});
  }

  void send_path(State& st, Effects& out, NodeId to, DualPath m) {
    if (ctx_.opts.mbd1 && !st.sent.emplace(to, summary(m)).second) return;
    out.sends.push_back({to, std::move(m)});
  }

  void add_signed(State& st, SignedPath e, const MessageId& id) {
    NodeSet s = NodeSet::of(signed_entry_path(e, id, g()));
    if (st.spaths.insert(s, st.entries.size())) st.entries.push_back(std::move(e));
  }

  /// TC endorsement backed by the stored signed paths, if they suffice.
  std::optional<SignatureToken> tc_from_signed_paths(State& st, const MessageId& id) {
    if (!tc_) return std::nullopt;
    try {
      if (st.spaths.has_empty()) {
        for (const SignedPath& e : st.entries)
          if (e.sig.scope == SignScope::payload && signed_entry_path(e, id, g()).empty())
            return tc_->attest_signature(id, e.sig);
        return std::nullopt;
      }
      if (st.spaths.has_k_disjoint()) {
        std::vector<SignedPath> chosen;
        for (std::size_t tag : st.spaths.witness()) chosen.push_back(st.entries.at(tag));
        return tc_->attest_paths(id, chosen);
      }
    } catch (const AttestationRefused&) {
      ++counters_.attestations_refused;
    }
    return std::nullopt;
  }

  /// After a path-driven first delivery: announce a token and an empty path.
  void announce_path_delivery(State& st, const MessageId& id, const std::vector<SignedPath>& list, Effects& out) {
    std::vector<SignedPath> carried;
    if (authenticated()) {
      std::optional<SignatureToken> token = tc_from_signed_paths(st, id);
      if (token) {
        st.tc_sig_sent = true;
      } else {
        token = signer().sign_payload(id);
        st.own_sig_sent = true;
      }
      st.sigs.insert(*token);
      send_sig(out, neighbours(), id, *token);
      carried.push_back({{}, signer().sign_path({}, id)});
    }
    carried.insert(carried.end(), list.begin(), list.end());
    announce_empty_path(st, id, std::move(carried), out);
  }

  void announce_empty_path(State& st, const MessageId& id, std::vector<SignedPath> carried, Effects& out) {
    for (NodeId k : neighbours())
      if (!st.dn.contains(k)) send_path(st, out, k, DualPath{id, {}, carried});
  }

  void on_sig(NodeId from, const FloodSig& m, Effects& out) {
    const MessageId& id = m.id;
    const SignatureToken& sig = m.sig;
    if (id.broadcaster == self()) return;
    if (sig.scope != SignScope::payload || !sig.covers(id)) {
      ++counters_.dropped_invalid;
      return;
    }
    auto& st = state(id);
    if (!st.sigs.insert(sig).second) return;
    if (authenticated() && !ctx_.authority->verifies_payload(sig, id)) {
      ++counters_.dropped_invalid;
      return;
    }
    if (!ctx_.opts.relay_sigs_after_path_delivery && st.delivered_by_path) return;
    if (st.sigs_settled) return;

    std::vector<NodeId> dests;
    for (NodeId k : neighbours())
      if (k != id.broadcaster && k != sig.signer) dests.push_back(k);

    bool first = false;
    const bool direct = from == id.broadcaster ||
                        (g().is_trusted(from) && g().is_authenticated(from) && delivery_grade(sig, id));
    if (direct) first = deliver(id, out);

    if (authenticated()) {
      if (sig.kind == SignerKind::node) add_signed(st, SignedPath{{}, sig}, id);
      if (delivery_grade(sig, id) || st.spaths.satisfied()) {
        first = deliver(id, out) || first;
        const bool trusted_token = sig.kind == SignerKind::tc || g().is_trusted(sig.signer);
        if (trusted_token) {
          send_sig(out, dests, id, sig);
          return finish_sig(st, id, first, out);
        }
        if (tc_) {
          if (st.tc_sig_sent) return finish_sig(st, id, first, out);
          std::optional<SignatureToken> tc_token;
          if (sig.signer == id.broadcaster) {
            try {
              tc_token = tc_->attest_signature(id, sig);
            } catch (const AttestationRefused&) {
              ++counters_.attestations_refused;
            }
          } else {
            tc_token = tc_from_signed_paths(st, id);
          }
          if (tc_token) {
            st.tc_sig_sent = true;
            st.sigs.insert(*tc_token);
            send_sig(out, dests, id, *tc_token);
            return finish_sig(st, id, first, out);
          }
        }
        if (!st.own_sig_sent) {
          SignatureToken own = signer().sign_payload(id);
          st.own_sig_sent = true;
          st.sigs.insert(own);
          send_sig(out, dests, id, own);
        }
        if (ctx_.opts.sig_prune) {
          send_sig(out, dests, id, sig);
          return finish_sig(st, id, first, out);
        }
      }
    }
    send_sig(out, dests, id, sig);
    finish_sig(st, id, first, out, false);
  }

  void finish_sig(State& st, const MessageId& id, bool first, Effects& out, bool settled = true) {
    if (settled && ctx_.opts.sig_prune) st.sigs_settled = true;
    if (!first) return;
    std::vector<SignedPath> carried;
    if (authenticated()) carried.push_back({{}, signer().sign_path({}, id)});
    announce_empty_path(st, id, std::move(carried), out);
  }

  bool entry_verifies(const SignedPath& e, const MessageId& id) const {
    if (e.sig.scope != SignScope::path || e.sig.kind != SignerKind::node) return false;
    NodeSet seen;
    for (NodeId u : appended(e.path, e.sig.signer)) {
      if (!g().contains(u) || seen.contains(u)) return false;
      seen.insert(u);
    }
    return ctx_.authority->verifies_path(e.sig, e.path, id);
  }

  void on_path(NodeId from, const DualPath& m, Effects& out) {
    const MessageId& id = m.id;
    if (id.broadcaster == self()) return;
    switch (check_path(m.path, self(), from, g())) {
      case PathCheck::cycle: ++counters_.cycles; return;
      case PathCheck::malformed: ++counters_.dropped_invalid; return;
      case PathCheck::ok: break;
    }
    auto& st = state(id);
    if (has_delivered(id)) return;
    if (NodeSet::of(m.path).intersects(st.dn)) return;
    if (m.path.empty()) st.dn.insert(from);

    std::vector<SignedPath> list;
    if (authenticated()) {
      for (const SignedPath& e : m.signed_paths) {
        if (!entry_verifies(e, id)) {
          ++counters_.dropped_invalid;
          continue;
        }
        list.push_back(e);
        add_signed(st, e, id);
      }
      if (st.spaths.satisfied()) {
        deliver(id, out);
        st.delivered_by_path = true;
        announce_path_delivery(st, id, list, out);
        return;
      }
    } else {
      list = m.signed_paths;
    }

    Path rpath = appended(m.path, from);
    st.paths.insert(stored_path_set(rpath, id.broadcaster, g()), 0);
    if (st.paths.satisfied()) {
      deliver(id, out);
      st.delivered_by_path = true;
      st.paths.clear();
      announce_path_delivery(st, id, list, out);
      return;
    }

    if (authenticated()) list.push_back({rpath, signer().sign_path(rpath, id)});
    const NodeSet on_path = NodeSet::of(rpath);
    for (NodeId k : neighbours()) {
      if (on_path.contains(k) || st.dn.contains(k)) continue;
      send_path(st, out, k, DualPath{id, rpath, list});
    }
  }

  std::optional<TrustedComponent> tc_;
  std::map<MessageId, State> states_;
};

}  // namespace

std::unique_ptr<Process> make_process(ProtocolKind kind, const ProcessContext& ctx) {
  switch (kind) {
    case ProtocolKind::dolev_ut: return std::make_unique<DolevProcess>(ctx);
    case ProtocolKind::sigflood_t: return std::make_unique<SigFloodProcess>(ctx);
    case ProtocolKind::dualrc: return std::make_unique<DualRcProcess>(ctx);
  }
  throw std::invalid_argument("unknown protocol");
}

}  // namespace hybridrc
