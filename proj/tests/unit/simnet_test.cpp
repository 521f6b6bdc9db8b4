#include <gtest/gtest.h>

#include "hybridrc/simnet.hpp"
#include "hybridrc/topology_io.hpp"

using namespace hybridrc;

namespace {

TopologyFile fixture(const std::string& name) { return load_topology(std::string(FIXTURE_DIR) + "/" + name); }

RunConfig config(const TopologyFile& tf, ProtocolKind p) {
  RunConfig cfg;
  cfg.topology = tf.topology;
  cfg.f = tf.f;
  cfg.protocol = p;
  return cfg;
}

}  // namespace

TEST(Parse, SchedulersAndStrategies) {
  EXPECT_EQ(parse_scheduler("adversarial-delay"), SchedulerKind::adversarial_delay);
  EXPECT_FALSE(parse_scheduler("lifo"));
  EXPECT_EQ(strategy_name(*parse_strategy("crash:3")), "crash:3");
  EXPECT_FALSE(parse_strategy("crash:x"));
  EXPECT_FALSE(parse_strategy("loud"));
}

TEST(Validate, RejectsBadCorruptionSets) {
  auto tf = fixture("app_a.topo");
  RunConfig cfg = config(tf, ProtocolKind::dolev_ut);
  cfg.corrupted = {1, 2};
  EXPECT_THROW(run(cfg), ConfigError);
  cfg.corrupted = {3};
  EXPECT_THROW(run(cfg), ConfigError);
  cfg.corrupted = {0};
  EXPECT_THROW(run(cfg), ConfigError);
  cfg.corrupted = {};
  cfg.protocol = ProtocolKind::sigflood_t;
  EXPECT_THROW(run(cfg), ConfigError);
}

TEST(Run, CompleteGraphDelivers) {
  auto tf = fixture("k4.topo");
  for (auto p : {ProtocolKind::dolev_ut, ProtocolKind::dualrc}) {
    RunReport r = run(config(tf, p));
    EXPECT_TRUE(r.all_correct_delivered());
    EXPECT_TRUE(r.quiesced);
    EXPECT_TRUE(r.violations.empty());
  }
}

TEST(Run, CycleIsTooSparseForPaths) {
  auto tf = fixture("c4.topo");
  RunConfig cfg = config(tf, ProtocolKind::dolev_ut);
  RunReport r = run(cfg);
  // node 2 sees two disjoint routes, enough with no faults
  EXPECT_TRUE(r.all_correct_delivered());
  cfg.corrupted = {1};
  r = run(cfg);
  EXPECT_EQ(r.undelivered_correct(), (std::vector<NodeId>{2}));
}

TEST(Run, SignaturesCrossTheCycle) {
  auto tf = fixture("c4_auth.topo");
  RunConfig cfg = config(tf, ProtocolKind::sigflood_t);
  cfg.corrupted = {1};
  RunReport r = run(cfg);
  EXPECT_TRUE(r.all_correct_delivered());
  EXPECT_LE(r.max_per_edge(), 2u);
}

TEST(Run, DeterministicPerSeed) {
  auto tf = fixture("app_b.topo");
  RunConfig cfg = config(tf, ProtocolKind::dualrc);
  cfg.corrupted = {7};
  cfg.scheduler = SchedulerKind::random;
  cfg.seed = 42;
  cfg.trace = true;
  RunReport a = run(cfg), b = run(cfg);
  EXPECT_EQ(a.trace, b.trace);
  EXPECT_EQ(a.delivered, b.delivered);
  cfg.seed = 43;
  EXPECT_NE(run(cfg).trace, a.trace);
}

TEST(Run, TraceFormat) {
  auto tf = fixture("k4.topo");
  RunConfig cfg = config(tf, ProtocolKind::dolev_ut);
  cfg.trace = true;
  RunReport r = run(cfg);
  ASSERT_FALSE(r.trace.empty());
  EXPECT_EQ(r.trace.front(), "0\tdeliver\t0\t0\tsrc=0 m=\"m\"");
  EXPECT_EQ(r.trace[1], "0\tsend\t0\t1\tpath src=0 m=\"m\" path=[]");
  EXPECT_NE(format_trace(r).find("\trecv\t"), std::string::npos);
}

TEST(Run, CrashStopsSending) {
  auto tf = fixture("k4.topo");
  RunConfig cfg = config(tf, ProtocolKind::dolev_ut);
  cfg.corrupted = {2};
  cfg.strategy = Crash{1};
  RunReport r = run(cfg);
  EXPECT_LE(r.byzantine_sent, 1u);
  EXPECT_TRUE(r.all_correct_delivered());
}

TEST(Run, ScriptedForgeryIsRejected) {
  auto tf = fixture("c4.topo");
  RunConfig cfg = config(tf, ProtocolKind::dolev_ut);
  cfg.corrupted = {1};
  Scripted s;
  s.events.push_back({1, 2, DolevPath{{0, "evil"}, {0}}});
  s.events.push_back({1, 2, DolevPath{{0, "evil"}, {}}});
  cfg.strategy = s;
  RunReport r = run(cfg);
  EXPECT_TRUE(r.violations.empty());
  cfg.strategy = Scripted{{{1, 3, DolevPath{{0, "evil"}, {}}}}};
  EXPECT_THROW(run(cfg), ConfigError);
}

TEST(Run, ByzantineBudgetIsBounded) {
  auto tf = fixture("app_b.topo");
  RunConfig cfg = config(tf, ProtocolKind::dualrc);
  cfg.corrupted = {7};
  cfg.strategy = ForgePaths{};
  RunReport r = run(cfg);
  RunConfig silent = cfg;
  silent.strategy = Silent{};
  EXPECT_LE(r.byzantine_sent, 10 * run(silent).messages_sent);
  EXPECT_TRUE(r.violations.empty());
  EXPECT_TRUE(r.all_correct_delivered());
}

TEST(Run, AdversarialDelayStillDelivers) {
  auto tf = fixture("app_a.topo");
  RunConfig cfg = config(tf, ProtocolKind::dolev_ut);
  cfg.scheduler = SchedulerKind::adversarial_delay;
  cfg.delay_target = 8;
  RunReport r = run(cfg);
  EXPECT_TRUE(r.all_correct_delivered());
}

TEST(Sweep, Aggregates) {
  auto tf = fixture("k4.topo");
  std::vector<RunConfig> cfgs;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    RunConfig c = config(tf, ProtocolKind::dolev_ut);
    c.scheduler = SchedulerKind::random;
    c.seed = s;
    cfgs.push_back(c);
  }
  SweepStats st = sweep(cfgs);
  EXPECT_EQ(st.runs, 5u);
  EXPECT_DOUBLE_EQ(st.delivery_rate, 1.0);
  EXPECT_GT(st.mean_per_edge, 0.0);
}

TEST(Oracle, CorruptionEnumeration) {
  auto tf = fixture("app_a.topo");
  auto cs = admissible_corruptions(tf.topology, 1, 0);
  // empty set plus every untrusted node other than the broadcaster
  EXPECT_EQ(cs.size(), 1u + 5u);
  EXPECT_TRUE(cs.front().empty());
  Verdict v = all_corruption_runs(fixture("c4.topo").topology, 1, ProtocolKind::dolev_ut, 0);
  EXPECT_FALSE(v.ok);
  ASSERT_TRUE(v.witness);
  EXPECT_EQ(v.witness->size(), 1u);
}
