// Property-level acceptance checks. Prints one PASS/FAIL line per criterion
// and exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "hybridrc/crypto.hpp"
#include "hybridrc/simnet.hpp"
#include "hybridrc/topology_io.hpp"
#include "hybridrc/verify.hpp"

using namespace hybridrc;

namespace {

// Sample sizes and tolerances.
constexpr std::size_t kMethodTopologies = 500;
constexpr std::size_t kMethodMaxNodes = 12;
constexpr std::size_t kMethodMaxTrusted = 4;
constexpr double kMethodMaxSeconds = 180.0;

constexpr std::size_t kOracleTopologies = 2000;
constexpr std::size_t kOracleMaxNodes = 8;
constexpr std::size_t kOracleMinNodes = 4;
constexpr double kOracleAgreement = 1.0;

constexpr std::size_t kReductionGraphs = 200;

constexpr std::size_t kValidityAccepted = 30;  // accepted topologies per protocol
constexpr std::size_t kValidityRejected = 30;  // rejected topologies per protocol
constexpr std::size_t kValiditySeeds = 20;

constexpr std::size_t kSafetyRuns = 1000;  // per protocol
constexpr std::size_t kSafetyMinNodes = 6;
constexpr std::size_t kSafetyMaxNodes = 12;

constexpr std::size_t kOptRuns = 100;

constexpr std::size_t kSigFloodEdgeBound = 2;

struct Criterion {
  int number;
  std::string name;
  bool pass = false;
  std::string detail;
};

Topology sample_once(std::mt19937_64& rng, std::size_t n_min, std::size_t n_max, std::size_t trusted_max) {
  auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
  GeneratorSpec spec;
  spec.n = pick(n_min, n_max);
  spec.seed = rng();
  const std::size_t roll = pick(0, 9);
  if (roll < 6) {
    spec.family = Family::random_gnp;
    spec.param = std::uniform_real_distribution<double>(0.35, 0.9)(rng);
  } else if (roll == 6 && spec.n >= 5) {
    spec.family = Family::random_regular;
    std::size_t d = pick(3, std::min<std::size_t>(5, spec.n - 1));
    if ((spec.n * d) % 2) --d;
    spec.param = static_cast<double>(d);
  } else if (roll == 7) {
    spec.family = Family::ring_of_cliques;
    spec.param = static_cast<double>(pick(3, 4));
  } else if (roll == 8) {
    spec.family = Family::two_tier_gateway;
    spec.param = static_cast<double>(pick(2, 4));
  } else {
    spec.family = Family::star;
  }
  spec.trusted = pick(0, std::min(trusted_max, spec.n - 1));
  spec.authenticated = pick(0, spec.n);
  spec.tc = spec.authenticated ? pick(0, std::min<std::size_t>(2, spec.authenticated)) : 0;
  return generate(spec);
}

Topology sample_topology(std::mt19937_64& rng, std::size_t n_min, std::size_t n_max, std::size_t trusted_max) {
  for (;;) {
    try {
      return sample_once(rng, n_min, n_max, trusted_max);
    } catch (const std::runtime_error&) {
      // regular pairing can fail for some seeds; draw again
    }
  }
}

Topology all_authenticated(Topology g) {
  for (NodeId u : g.vertices()) g.set_authenticated(u);
  return g;
}

std::string ratio(std::size_t a, std::size_t b) { return std::to_string(a) + "/" + std::to_string(b); }

// 1 -------------------------------------------------------------------------
Criterion method_agreement() {
  Criterion c{1, "path verifier methods agree"};
  std::mt19937_64 rng(101);
  const auto start = std::chrono::steady_clock::now();
  std::size_t agree = 0, accepted = 0;
  for (std::size_t i = 0; i < kMethodTopologies; ++i) {
    Topology g = sample_topology(rng, 4, kMethodMaxNodes, kMethodMaxTrusted);
    const std::size_t f = 1 + i % 2;
    const bool a = dolev_ut_verify_maxflow(g, f).ok;
    const bool b = dolev_ut_verify_simplify(g, f).ok;
    agree += a == b;
    accepted += a;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.pass = agree == kMethodTopologies && secs < kMethodMaxSeconds;
  std::ostringstream os;
  os << "agreement " << ratio(agree, kMethodTopologies) << ", accepted " << accepted << ", " << secs << "s";
  c.detail = os.str();
  return c;
}

// 2 -------------------------------------------------------------------------
Criterion oracle_equivalence() {
  Criterion c{2, "checkers match exhaustive simulation"};
  std::mt19937_64 rng(202);
  struct Tally {
    std::string name;
    std::size_t agree = 0, total = 0, accepted = 0;
  };
  Tally dm{"dolev_ut/maxflow"}, ds{"dolev_ut/simplify"}, sm{"sigflood_t/maxflow"}, ss{"sigflood_t/simplify"}, dr{"dualrc"};
  auto tally = [](Tally& t, bool verdict, bool truth) {
    ++t.total;
    t.agree += verdict == truth;
    t.accepted += verdict;
  };
  for (std::size_t i = 0; i < kOracleTopologies; ++i) {
    Topology g = sample_topology(rng, kOracleMinNodes, kOracleMaxNodes, 3);
    const bool dolev_truth = oracle_check(g, 1, ProtocolKind::dolev_ut).ok;
    tally(dm, dolev_ut_verify_maxflow(g, 1).ok, dolev_truth);
    tally(ds, dolev_ut_verify_simplify(g, 1).ok, dolev_truth);
    tally(dr, dualrc_verify(g, 1).ok, oracle_check(g, 1, ProtocolKind::dualrc).ok);
    Topology a = all_authenticated(g);
    const bool sig_truth = oracle_check(a, 1, ProtocolKind::sigflood_t).ok;
    tally(sm, sigflood_t_verify(a, 1, Method::maxflow).ok, sig_truth);
    tally(ss, sigflood_t_verify(a, 1, Method::simplify).ok, sig_truth);
  }
  std::ostringstream os;
  c.pass = true;
  for (const Tally* t : {&dm, &ds, &sm, &ss, &dr}) {
    const double rate = static_cast<double>(t->agree) / static_cast<double>(t->total);
    c.pass = c.pass && rate >= kOracleAgreement;
    os << t->name << ' ' << ratio(t->agree, t->total) << " (accepted " << t->accepted << ") ";
  }
  c.detail = os.str();
  return c;
}

// 3 -------------------------------------------------------------------------
Criterion degenerate_reduction() {
  Criterion c{3, "no trusted nodes reduces to connectivity"};
  std::mt19937_64 rng(303);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < kReductionGraphs; ++i) {
    Topology g = sample_topology(rng, 4, 10, 0);
    const std::size_t f = 1 + i % 2;
    bool strong = true, weak = true;
    for (NodeId u : g.vertices())
      for (NodeId v : g.vertices()) {
        if (v <= u || g.has_edge(u, v)) continue;
        const std::size_t k = vertex_connectivity(g, u, v);
        strong = strong && k >= 2 * f + 1;
        weak = weak && k >= f + 1;
      }
    Topology a = all_authenticated(g);
    const bool match = dolev_ut_verify_maxflow(g, f).ok == strong && dolev_ut_verify_simplify(g, f).ok == strong &&
                       sigflood_t_verify(a, f, Method::maxflow).ok == weak &&
                       sigflood_t_verify(a, f, Method::simplify).ok == weak;
    ok += match;
  }
  c.pass = ok == kReductionGraphs;
  c.detail = "exact on " + ratio(ok, kReductionGraphs);
  return c;
}

// 4, 10 ---------------------------------------------------------------------
struct ValidityResult {
  Criterion validity{4, "accepted topologies deliver, rejected ones have witnesses"};
  Criterion load{10, "signature flooding sends at most two messages per link"};
};

ValidityResult validity_and_load() {
  ValidityResult out;
  std::mt19937_64 rng(404);
  std::ostringstream os;
  bool pass = true;
  std::size_t sig_max_edge = 0, sig_runs = 0;

  for (ProtocolKind p : {ProtocolKind::dolev_ut, ProtocolKind::sigflood_t, ProtocolKind::dualrc}) {
    std::size_t accepted = 0, rejected = 0, runs = 0, failures = 0, witnessed = 0;
    for (std::size_t guard = 0; (accepted < kValidityAccepted || rejected < kValidityRejected) && guard < 20000; ++guard) {
      Topology g = sample_topology(rng, kOracleMinNodes, kOracleMaxNodes, 3);
      if (p == ProtocolKind::sigflood_t) g = all_authenticated(g);
      const bool ok = verify(g, 1, p).ok;
      if (ok && accepted < kValidityAccepted) {
        ++accepted;
        for (NodeId b : g.vertices())
          for (const auto& corrupt : admissible_corruptions(g, 1, b))
            for (std::size_t s = 0; s <= kValiditySeeds; ++s) {
              RunConfig cfg;
              cfg.topology = g;
              cfg.f = 1;
              cfg.protocol = p;
              cfg.broadcaster = b;
              cfg.corrupted = corrupt;
              cfg.scheduler = s == 0 ? SchedulerKind::fifo : SchedulerKind::random;
              cfg.seed = s;
              RunReport r = run(cfg);
              ++runs;
              if (r.error || !r.quiesced || !r.all_correct_delivered()) ++failures;
              if (p == ProtocolKind::sigflood_t) {
                ++sig_runs;
                sig_max_edge = std::max(sig_max_edge, r.max_per_edge());
              }
            }
      } else if (!ok && rejected < kValidityRejected) {
        ++rejected;
        Verdict v = verify(g, 1, p);
        attach_witness(v, g, 1, p);
        bool shown = false;
        if (v.witness && v.failing_broadcaster) {
          RunConfig cfg;
          cfg.topology = g;
          cfg.f = 1;
          cfg.protocol = p;
          cfg.broadcaster = *v.failing_broadcaster;
          cfg.corrupted = *v.witness;
          shown = !run(cfg).all_correct_delivered();
        }
        witnessed += shown;
      }
    }
    pass = pass && accepted == kValidityAccepted && rejected == kValidityRejected && failures == 0 && witnessed == rejected;
    os << to_string(p) << ": " << runs << " runs on " << accepted << " accepted, " << failures << " failed; witnesses "
       << ratio(witnessed, rejected) << ". ";
  }
  out.validity.pass = pass;
  out.validity.detail = os.str();
  out.load.pass = sig_runs > 0 && sig_max_edge <= kSigFloodEdgeBound;
  out.load.detail = "max per link " + std::to_string(sig_max_edge) + " over " + std::to_string(sig_runs) + " runs";
  return out;
}

// 5, 9 (audit) ---------------------------------------------------------------
struct SafetyResult {
  Criterion safety{5, "no creation or duplication under active faults"};
  std::size_t tc_violations = 0;
  std::size_t dualrc_runs = 0;
};

SafetyResult safety() {
  SafetyResult out;
  std::mt19937_64 rng(505);
  std::ostringstream os;
  bool pass = true;
  for (ProtocolKind p : {ProtocolKind::dolev_ut, ProtocolKind::sigflood_t, ProtocolKind::dualrc}) {
    std::size_t done = 0, creation = 0, duplication = 0, errors = 0, byz = 0;
    while (done < kSafetyRuns) {
      Topology g = sample_topology(rng, kSafetyMinNodes, kSafetyMaxNodes, 3);
      std::vector<NodeId> auth;
      for (NodeId u : g.vertices())
        if (g.is_authenticated(u)) auth.push_back(u);
      if (p == ProtocolKind::sigflood_t && auth.empty()) continue;
      const std::size_t f = 1 + done % 2;
      RunConfig cfg;
      cfg.topology = g;
      cfg.f = f;
      cfg.protocol = p;
      cfg.broadcaster = p == ProtocolKind::sigflood_t ? auth[rng() % auth.size()] : static_cast<NodeId>(rng() % g.size());
      auto options = admissible_corruptions(g, f, cfg.broadcaster);
      std::erase_if(options, [](const auto& s) { return s.empty(); });
      if (options.empty()) continue;
      cfg.corrupted = options[rng() % options.size()];
      cfg.strategy = done % 2 ? AdversaryStrategy{ReplaySigs{}} : AdversaryStrategy{ForgePaths{}};
      cfg.scheduler = done % 3 == 0 ? SchedulerKind::fifo : SchedulerKind::random;
      cfg.seed = rng();
      RunReport r = run(cfg);
      ++done;
      byz += r.byzantine_sent;
      if (r.error) ++errors;
      for (const auto& v : r.violations) {
        if (v.starts_with("no-creation")) ++creation;
        else if (v.starts_with("duplication")) ++duplication;
        else if (v.starts_with("tc token")) ++out.tc_violations;
      }
      if (p == ProtocolKind::dualrc) ++out.dualrc_runs;
    }
    pass = pass && creation == 0 && duplication == 0;
    os << to_string(p) << ": " << done << " runs, " << byz << " injected, creation " << creation << ", duplication "
       << duplication << ", capped " << errors << ". ";
  }
  out.safety.pass = pass;
  out.safety.detail = os.str();
  return out;
}

// 6 -------------------------------------------------------------------------
Criterion optimisation_equivalence() {
  Criterion c{6, "path optimisations keep deliveries and save messages"};
  std::mt19937_64 rng(606);
  std::size_t runs = 0, same = 0, not_more = 0, strict = 0, capped = 0;
  std::size_t on_total = 0, off_total = 0;
  auto compare = [&](RunConfig cfg) {
    cfg.opts = Options{};
    RunReport on = run(cfg);
    cfg.opts = Options::all_off();
    RunReport off = run(cfg);
    if (on.error || off.error) {
      ++capped;
      return;
    }
    ++runs;
    std::set<NodeId> a, b;
    for (NodeId u : on.delivered)
      if (on.correct.contains(u)) a.insert(u);
    for (NodeId u : off.delivered)
      if (off.correct.contains(u)) b.insert(u);
    same += a == b;
    not_more += on.messages_sent <= off.messages_sent;
    strict += on.messages_sent < off.messages_sent;
    on_total += on.messages_sent;
    off_total += off.messages_sent;
  };
  for (const char* name : {"app_a.topo", "k4.topo", "c4.topo"}) {
    auto tf = load_topology(std::string(FIXTURE_DIR) + "/" + name);
    RunConfig cfg;
    cfg.topology = tf.topology;
    cfg.f = tf.f;
    compare(cfg);
  }
  while (runs + capped < kOptRuns) {
    Topology g = sample_topology(rng, 4, 8, 3);
    RunConfig cfg;
    cfg.topology = g;
    cfg.f = 1;
    cfg.broadcaster = static_cast<NodeId>(rng() % g.size());
    auto options = admissible_corruptions(g, 1, cfg.broadcaster);
    cfg.corrupted = options[rng() % options.size()];
    cfg.scheduler = runs % 2 ? SchedulerKind::random : SchedulerKind::fifo;
    cfg.seed = rng();
    compare(cfg);
  }
  c.pass = runs >= kOptRuns && same == runs && not_more == runs && strict >= 1;
  std::ostringstream os;
  os << "same deliveries " << ratio(same, runs) << ", fewer-or-equal messages " << ratio(not_more, runs) << ", strictly fewer "
     << strict << ", totals " << on_total << " vs " << off_total << ", capped " << capped;
  c.detail = os.str();
  return c;
}

// 7 -------------------------------------------------------------------------
Criterion app_a() {
  Criterion c{7, "trusted relays make the chain topology sound"};
  auto with = load_topology(std::string(FIXTURE_DIR) + "/app_a.topo");
  auto without = load_topology(std::string(FIXTURE_DIR) + "/app_a_untrusted.topo");
  const bool v1 = dolev_ut_verify_maxflow(with.topology, 1).ok && dolev_ut_verify_simplify(with.topology, 1).ok;
  const bool s1 = oracle_check(with.topology, 1, ProtocolKind::dolev_ut).ok;
  const bool v0 = dolev_ut_verify_maxflow(without.topology, 1).ok || dolev_ut_verify_simplify(without.topology, 1).ok;
  const bool s0 = oracle_check(without.topology, 1, ProtocolKind::dolev_ut).ok;
  c.pass = v1 && s1 && !v0 && !s0;
  std::ostringstream os;
  os << "trusted {3,4,5}: verifier " << v1 << " simulation " << s1 << "; none: verifier " << v0 << " simulation " << s0;
  c.detail = os.str();
  return c;
}

// 8 -------------------------------------------------------------------------
Criterion app_b() {
  Criterion c{8, "signature relaying after path delivery is required"};
  auto tf = load_topology(std::string(FIXTURE_DIR) + "/app_b.topo");
  RunConfig cfg;
  cfg.topology = tf.topology;
  cfg.f = tf.f;
  cfg.protocol = ProtocolKind::dualrc;
  cfg.broadcaster = 0;
  cfg.corrupted = {7};
  RunReport stock = run(cfg);
  cfg.opts.relay_sigs_after_path_delivery = false;
  RunReport mutant = run(cfg);
  const bool far_missing = !mutant.delivered.contains(9);
  c.pass = stock.all_correct_delivered() && far_missing;
  std::ostringstream os;
  os << "stock undelivered " << stock.undelivered_correct().size() << ", mutant delivers node 9: " << (far_missing ? "no" : "yes");
  c.detail = os.str();
  return c;
}

// 9 -------------------------------------------------------------------------
Criterion tc_contract(const SafetyResult& audit) {
  Criterion c{9, "trusted component signs exactly on valid evidence"};
  // 0 broadcaster, 1 trusted, 2..5 authenticated, 5 hosts the component.
  Topology g(6);
  for (NodeId u = 0; u < 5; ++u) g.add_edge(u, u + 1);
  g.set_trusted(1);
  for (NodeId u = 0; u < 6; ++u)
    if (u != 1) g.set_authenticated(u);
  g.set_authenticated(1);
  g.set_tc(5);
  const std::size_t f = 1;
  const MessageId id{0, "m"};
  const MessageId other{0, "x"};

  TokenAuthority auth(g);
  TrustedComponent tc(auth, 5, f);

  // Independent statement of the evidence rules.
  auto node_set = [&](const SignedPath& e, bool& repeated) {
    std::set<NodeId> all(e.path.begin(), e.path.end());
    all.insert(e.sig.signer);
    repeated = all.size() != e.path.size() + 1;
    std::set<NodeId> out;
    for (NodeId u : all)
      if (u != id.broadcaster && !g.is_trusted(u)) out.insert(u);
    return out;
  };
  auto entry_valid = [&](const SignedPath& e) {
    if (!auth.genuine(e.sig) || e.sig.digest != payload_digest(id.payload) || e.sig.broadcaster != id.broadcaster) return false;
    if (e.sig.scope == SignScope::path) return e.sig.kind == SignerKind::node && e.sig.signed_path == e.path;
    return e.sig.kind == SignerKind::node && e.path.empty();
  };
  auto paths_expected = [&](const std::vector<SignedPath>& list) {
    if (list.size() != f + 1) return false;
    std::vector<std::set<NodeId>> sets;
    for (const auto& e : list) {
      bool repeated = false;
      auto s = node_set(e, repeated);
      if (!entry_valid(e) || repeated) return false;
      for (const auto& t : sets)
        for (NodeId u : s)
          if (t.contains(u)) return false;
      sets.push_back(s);
    }
    return true;
  };

  std::vector<SignedPath> pool;
  const std::vector<Path> prefixes = {{}, {0}, {0, 1}, {0, 2}, {1}, {2, 3}, {0, 3}};
  for (NodeId s : {2u, 3u, 4u}) {
    for (const Path& p : prefixes) {
      SignatureToken t = Signer(auth, s).sign_path(p, id);
      pool.push_back({p, t});
      if (p != prefixes[1]) pool.push_back({prefixes[1], t});  // token moved to another prefix
    }
    SignatureToken payload = Signer(auth, s).sign_payload(id);
    pool.push_back({{}, payload});
    pool.push_back({{0}, payload});
    pool.push_back({{}, Signer(auth, s).sign_payload(other)});
    SignatureToken forged{s, SignerKind::node, SignScope::path, payload_digest("m"), 0, {0, 4}};
    pool.push_back({{0, 4}, forged});
  }
  pool.push_back({{0, 2}, Signer(auth, 2).sign_path({0, 2}, id)});  // signer already on the path

  std::size_t checked = 0, mismatches = 0, accepted = 0;
  std::vector<SignedPath> list;
  std::function<void(std::size_t)> enumerate = [&](std::size_t depth) {
    const bool expect = paths_expected(list);
    bool got = true;
    try {
      tc.attest_paths(id, list);
    } catch (const AttestationRefused&) {
      got = false;
    }
    ++checked;
    mismatches += got != expect;
    accepted += got;
    if (depth == f + 2) return;
    for (const auto& e : pool) {
      list.push_back(e);
      enumerate(depth + 1);
      list.pop_back();
    }
  };
  enumerate(0);

  // Signature endorsement over every kind of token.
  TokenAuthority auth2(g);
  TrustedComponent tc2(auth2, 5, f);
  std::vector<SignatureToken> tokens;
  for (NodeId s : g.vertices()) {
    tokens.push_back(Signer(auth2, s).sign_payload(id));
    tokens.push_back(Signer(auth2, s).sign_payload(other));
    tokens.push_back(Signer(auth2, s).sign_path({}, id));
    tokens.push_back(SignatureToken{s, SignerKind::node, SignScope::payload, payload_digest("m"), 0, {}});
    tokens.back().digest ^= 1;  // never minted
  }
  SignatureToken tc_token = tc2.attest_signature(id, Signer(auth2, 0).sign_payload(id));
  tokens.push_back(tc_token);
  SignatureToken fake_tc = tc_token;
  fake_tc.signer = 3;
  tokens.push_back(fake_tc);
  std::size_t sig_checked = 0, sig_mismatches = 0;
  for (const auto& t : tokens) {
    const bool verifies = auth2.genuine(t) && t.scope == SignScope::payload && t.covers(id);
    const bool expect = verifies && (t.kind == SignerKind::tc || t.signer == id.broadcaster || g.is_trusted(t.signer));
    bool got = true;
    try {
      tc2.attest_signature(id, t);
    } catch (const AttestationRefused&) {
      got = false;
    }
    ++sig_checked;
    sig_mismatches += got != expect;
  }

  // Every TC token minted anywhere must come from a recorded attestation.
  std::size_t unattested = audit.tc_violations;
  for (const TokenAuthority* a : {&auth, &auth2}) {
    std::set<SignatureToken> attested;
    for (const auto& at : a->attestations()) attested.insert(at.token);
    for (const auto& t : a->minted())
      if (t.kind == SignerKind::tc && !attested.contains(t)) ++unattested;
  }

  c.pass = mismatches == 0 && sig_mismatches == 0 && accepted > 0 && unattested == 0 && audit.dualrc_runs > 0;
  std::ostringstream os;
  os << "path evidence " << checked << " lists, " << accepted << " accepted, " << mismatches << " mismatches; signatures "
     << sig_checked << " tokens, " << sig_mismatches << " mismatches; unattested tc tokens " << unattested << " (audited "
     << audit.dualrc_runs << " adversarial runs)";
  c.detail = os.str();
  return c;
}

void report(const Criterion& c) {
  std::cout << "criterion " << c.number << " [" << c.name << "]: " << (c.pass ? "PASS" : "FAIL") << "  " << c.detail << '\n';
  std::cout.flush();
}

}  // namespace

int main() {
  std::vector<Criterion> results;
  auto record = [&](Criterion c) {
    report(c);
    results.push_back(std::move(c));
  };
  record(method_agreement());
  record(oracle_equivalence());
  record(degenerate_reduction());
  ValidityResult v = validity_and_load();
  record(v.validity);
  SafetyResult s = safety();
  record(s.safety);
  record(optimisation_equivalence());
  record(app_a());
  record(app_b());
  record(tc_contract(s));
  record(v.load);

  std::size_t passed = 0;
  for (const auto& c : results) passed += c.pass;
  std::cout << passed << "/" << results.size() << " criteria passed\n";
  return passed == results.size() ? 0 : 1;
}
