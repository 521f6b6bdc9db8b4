#include "hybridrc/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "hybridrc/protocol.hpp"
#include "hybridrc/simnet.hpp"
#include "hybridrc/topology_io.hpp"
#include "hybridrc/verify.hpp"

namespace hybridrc {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ProtocolKind protocol_arg(const std::string& s) {
  auto p = parse_protocol(s);
  if (!p) throw UsageError("unknown protocol '" + s + "'");
  return *p;
}

Method method_arg(const std::string& s) {
  auto m = parse_method(s);
  if (!m) throw UsageError("unknown method '" + s + "'");
  return *m;
}

Options opts_arg(const std::string& s) {
  try {
    return Options::parse(s);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

std::set<NodeId> node_list(const std::string& s) {
  std::set<NodeId> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      unsigned long v = std::stoul(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.insert(static_cast<NodeId>(v));
    } catch (const std::exception&) {
      throw UsageError("bad node id '" + item + "'");
    }
  }
  return out;
}

void print_verdict(std::ostream& out, const Verdict& v) {
  out << "verdict " << (v.ok ? "ok" : "fail") << '\n';
  if (v.failing_pair) out << "failing-pair " << v.failing_pair->first << ' ' << v.failing_pair->second << '\n';
  if (v.failing_broadcaster) out << "failing-broadcaster " << *v.failing_broadcaster << '\n';
  if (v.witness) {
    out << "witness";
    if (v.witness->empty()) out << " (none)";
    for (NodeId c : *v.witness) out << ' ' << c;
    out << '\n';
  }
}

struct Common {
  std::string file;
  std::string protocol = "dolev_ut";
  std::string method = "maxflow";
  std::optional<std::size_t> f;
  std::uint64_t seed = 1;
  std::string opts = "all";
  bool trace = false;
  std::size_t max_events = 2'000'000;
  bool force_large_oracle = false;
  NodeId broadcaster = 0;
  std::string corrupt;
  std::string strategy = "silent";
  std::string scheduler = "fifo";
  std::size_t seeds = 20;
  std::string family = "random-gnp";
  std::size_t n = 8;
  double param = 0.5;
  std::size_t trusted = 0;
  std::size_t auth = 0;
  std::size_t tc = 0;
  std::size_t count = 10;
  std::string out_dir = ".";
  std::string output;
  bool oracle = false;
};

RunConfig run_config(const Common& c, const TopologyFile& tf) {
  RunConfig cfg;
  cfg.topology = tf.topology;
  cfg.f = c.f.value_or(tf.f);
  cfg.protocol = protocol_arg(c.protocol);
  cfg.broadcaster = c.broadcaster;
  cfg.corrupted = node_list(c.corrupt);
  auto strat = parse_strategy(c.strategy);
  if (!strat) throw UsageError("unknown strategy '" + c.strategy + "'");
  cfg.strategy = *strat;
  auto sched = parse_scheduler(c.scheduler);
  if (!sched) throw UsageError("unknown scheduler '" + c.scheduler + "'");
  cfg.scheduler = *sched;
  cfg.seed = c.seed;
  cfg.opts = opts_arg(c.opts);
  cfg.trace = c.trace;
  cfg.max_events = c.max_events;
  return cfg;
}

GeneratorSpec generator_spec(const Common& c, std::uint64_t seed) {
  GeneratorSpec spec;
  auto fam = parse_family(c.family);
  if (!fam) throw UsageError("unknown family '" + c.family + "'");
  spec.family = *fam;
  spec.n = c.n;
  spec.param = c.param;
  spec.trusted = c.trusted;
  spec.authenticated = c.auth;
  spec.tc = c.tc;
  spec.seed = seed;
  return spec;
}

int do_verify(const Common& c, std::ostream& out) {
  TopologyFile tf = load_topology(c.file);
  const std::size_t f = c.f.value_or(tf.f);
  const ProtocolKind p = protocol_arg(c.protocol);
  const Method m = method_arg(c.method);
  Verdict v = verify(tf.topology, f, p, m);
  out << "protocol " << to_string(p) << " method " << to_string(m) << " f " << f << '\n';
  if (!v.ok) attach_witness(v, tf.topology, f, p);
  print_verdict(out, v);
  if (c.oracle) {
    Verdict o = oracle_check(tf.topology, f, p, c.force_large_oracle);
    out << "oracle " << (o.ok ? "ok" : "fail") << (o.ok == v.ok ? " (agrees)" : " (disagrees)") << '\n';
  }
  return v.ok ? kExitOk : kExitVerdictFalse;
}

int do_simulate(const Common& c, std::ostream& out) {
  TopologyFile tf = load_topology(c.file);
  RunConfig cfg = run_config(c, tf);
  RunReport r = run(cfg);
  out << "protocol " << to_string(cfg.protocol) << " broadcaster " << cfg.broadcaster << " strategy "
      << strategy_name(cfg.strategy) << " scheduler " << to_string(cfg.scheduler) << " seed " << cfg.seed << '\n';
  out << format_summary(r);
  if (c.trace) out << format_trace(r);
  if (r.error) return kExitInternal;
  return r.all_correct_delivered() && r.violations.empty() ? kExitOk : kExitVerdictFalse;
}

int do_sweep(const Common& c, std::ostream& out) {
  TopologyFile tf = load_topology(c.file);
  std::vector<RunConfig> cfgs;
  for (std::size_t i = 0; i < c.seeds; ++i) {
    Common per = c;
    per.seed = c.seed + i;
    per.trace = false;
    cfgs.push_back(run_config(per, tf));
  }
  SweepStats st = sweep(cfgs);
  out << "runs " << st.runs << "\nerrors " << st.errors << "\ndelivery-rate " << st.delivery_rate << "\nmean-per-edge "
      << st.mean_per_edge << "\nmax-per-edge " << st.max_per_edge << "\nviolations " << st.violations << '\n';
  for (const auto& [p, total] : st.messages_by_protocol) out << "messages " << to_string(p) << ' ' << total << '\n';
  return st.errors ? kExitInternal : (st.full_delivery == st.runs && st.violations == 0 ? kExitOk : kExitVerdictFalse);
}

int do_crosscheck(const Common& c, std::ostream& out) {
  const ProtocolKind p = protocol_arg(c.protocol);
  const std::size_t f = c.f.value_or(1);
  std::size_t agree = 0, ok_count = 0, oracle_runs = 0;
  std::optional<std::string> counterexample;
  for (std::size_t i = 0; i < c.count; ++i) {
    Topology g = generate(generator_spec(c, c.seed + i));
    if (p == ProtocolKind::sigflood_t)
      for (NodeId u : g.vertices()) g.set_authenticated(u);
    bool same = true;
    const Verdict primary = verify(g, f, p, Method::maxflow);
    if (p != ProtocolKind::dualrc) same = verify(g, f, p, Method::simplify).ok == primary.ok;
    if (same && (g.vertex_count() <= kOracleMaxNodes || c.force_large_oracle)) {
      same = oracle_check(g, f, p, c.force_large_oracle).ok == primary.ok;
      ++oracle_runs;
    }
    if (primary.ok) ++ok_count;
    if (same) {
      ++agree;
    } else if (!counterexample) {
      std::filesystem::path path = std::filesystem::path(c.out_dir) / ("counterexample-" + std::to_string(c.seed + i) + ".topo");
      save_topology(path.string(), g, f);
      counterexample = path.string();
    }
  }
  out << "protocol " << to_string(p) << " family " << c.family << " count " << c.count << '\n';
  out << "agreement " << agree << '/' << c.count << "\naccepted " << ok_count << "\noracle-checked " << oracle_runs << '\n';
  if (counterexample) out << "counterexample " << *counterexample << '\n';
  return agree == c.count ? kExitOk : kExitVerdictFalse;
}

int do_gen(const Common& c, std::ostream& out) {
  Topology g = generate(generator_spec(c, c.seed));
  const std::size_t f = c.f.value_or(1);
  if (c.output.empty()) out << emit_topology(g, f);
  else save_topology(c.output, g, f);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reliable communication protocols, topology verifiers and simulator"};
  app.require_subcommand(1);
  Common c;

  auto add_protocol = [&](CLI::App* sub) {
    sub->add_option("--protocol", c.protocol, "dolev_ut | sigflood_t | dualrc");
    sub->add_option("--f", c.f, "fault bound (defaults to the file's)");
  };
  auto add_run = [&](CLI::App* sub) {
    add_protocol(sub);
    sub->add_option("--broadcaster", c.broadcaster);
    sub->add_option("--corrupt", c.corrupt, "comma-separated corrupted nodes");
    sub->add_option("--strategy", c.strategy, "silent | crash:<k> | forge-paths | replay-sigs");
    sub->add_option("--scheduler", c.scheduler, "fifo | random | adversarial-delay");
    sub->add_option("--seed", c.seed);
    sub->add_option("--opts", c.opts, "md1..md5,mbd1,mbd10,sig-prune | all | none");
    sub->add_option("--max-events", c.max_events);
  };
  auto add_gen = [&](CLI::App* sub) {
    sub->add_option("--family", c.family, "random-gnp | random-regular | ring-of-cliques | star | two-tier-gateway");
    sub->add_option("--n", c.n);
    sub->add_option("--param", c.param, "edge probability, degree, clique size or gateway count");
    sub->add_option("--trusted", c.trusted);
    sub->add_option("--auth", c.auth);
    sub->add_option("--tc", c.tc);
    sub->add_option("--seed", c.seed);
    sub->add_option("--f", c.f);
  };

  auto* verify_cmd = app.add_subcommand("verify", "check a topology file");
  verify_cmd->add_option("file", c.file)->required();
  add_protocol(verify_cmd);
  verify_cmd->add_option("--method", c.method, "maxflow | simplify");
  verify_cmd->add_flag("--oracle", c.oracle, "also run the exhaustive oracle");
  verify_cmd->add_flag("--force-large-oracle", c.force_large_oracle);

  auto* sim_cmd = app.add_subcommand("simulate", "run one broadcast");
  sim_cmd->add_option("file", c.file)->required();
  add_run(sim_cmd);
  sim_cmd->add_flag("--trace", c.trace, "print the event log");

  auto* sweep_cmd = app.add_subcommand("sweep", "run one broadcast over consecutive seeds");
  sweep_cmd->add_option("file", c.file)->required();
  add_run(sweep_cmd);
  sweep_cmd->add_option("--seeds", c.seeds, "number of seeds");

  auto* cross_cmd = app.add_subcommand("crosscheck", "compare verifiers and oracle on generated topologies");
  add_gen(cross_cmd);
  cross_cmd->add_option("--protocol", c.protocol);
  cross_cmd->add_option("--count", c.count);
  cross_cmd->add_option("--out-dir", c.out_dir);
  cross_cmd->add_flag("--force-large-oracle", c.force_large_oracle);

  auto* gen_cmd = app.add_subcommand("gen", "generate a topology file");
  add_gen(gen_cmd);
  gen_cmd->add_option("-o,--output", c.output);

  std::vector<std::string> rev(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(rev.begin(), rev.end());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (verify_cmd->parsed()) return do_verify(c, out);
    if (sim_cmd->parsed()) return do_simulate(c, out);
    if (sweep_cmd->parsed()) return do_sweep(c, out);
    if (cross_cmd->parsed()) return do_crosscheck(c, out);
    if (gen_cmd->parsed()) return do_gen(c, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const OracleRefused& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace hybridrc
