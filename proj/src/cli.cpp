#include "relnet/cli.hpp"

#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "relnet/corpus.hpp"
#include "relnet/dedalus.hpp"
#include "relnet/harness.hpp"
#include "relnet/netsim.hpp"

namespace relnet::cli {

namespace {

using json = nlohmann::ordered_json;

class NoInput : public Error {
 public:
  using Error::Error;
};

// A parse or schema error prefixed with the offending file.
class BadInput : public Error {
 public:
  using Error::Error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NoInput("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Re-raises parse errors with the file name in front.
template <typename F>
auto parse_file(const std::string& path, F&& parse) {
  std::string text = read_file(path);
  try {
    return parse(text);
  } catch (const ParseError& e) {
    throw BadInput(path + ": parse error: " + e.what());
  } catch (const SchemaError& e) {
    throw BadInput(path + ": " + e.what());
  }
}

struct Common {
  std::string program;
  std::string corpus;
  std::string network;
  std::vector<std::string> networks;
  std::string instance;
  std::string partition;
  std::string partition_mode = "full";
  std::uint64_t seed = 0;
  std::size_t max_steps = 10000;
  std::size_t budget = 100;
  std::size_t schedules = 5;
  std::size_t jobs = 1;
  std::size_t heartbeat_period = 4;
  std::size_t delivery_bound = 64;
  bool exhaustive = false;
  std::string format = "text";
};

TransducerProgram load_program(const Common& c) {
  if (!c.corpus.empty()) return corpus_entry(c.corpus).program;
  if (c.program.empty()) throw PreconditionError("one of --program or --corpus is required");
  return parse_file(c.program, [](const std::string& t) { return parse_program(t); });
}

Network load_network(const std::string& path) {
  if (path.empty()) throw PreconditionError("--network is required");
  return parse_file(path, [](const std::string& t) { return parse_network(t); });
}

Instance load_instance(const std::string& path) {
  if (path.empty()) return Instance{};
  return parse_file(path, [](const std::string& t) { return parse_instance(t); });
}

HorizontalPartition make_partition(const Common& c, const Instance& instance,
                                   const Network& network) {
  if (!c.partition.empty()) {
    return parse_file(c.partition, [](const std::string& t) { return parse_partition(t); });
  }
  const std::string& m = c.partition_mode;
  if (m == "full") return full_replication(instance, network.nodes());
  if (m == "disjoint") return round_robin_partition(instance, network.nodes());
  if (m == "one-node") return one_node_partition(instance, network.nodes());
  if (m.starts_with("random:")) {
    return random_partition(instance, network.nodes(), std::stoull(m.substr(7)));
  }
  throw PreconditionError("unknown partition mode '" + m + "'");
}

CheckOptions check_options(const Common& c) {
  CheckOptions o;
  o.budget = c.budget;
  o.schedules = c.schedules;
  o.seed = c.seed;
  o.max_steps = c.max_steps;
  o.partition_mode = c.exhaustive ? PartitionMode::Exhaustive : PartitionMode::Auto;
  o.heartbeat_period = c.heartbeat_period;
  o.delivery_bound = c.delivery_bound;
  o.jobs = c.jobs;
  if (!c.partition.empty()) {
    o.partitions.push_back(
        parse_file(c.partition, [](const std::string& t) { return parse_partition(t); }));
  }
  return o;
}

TraceFormat trace_format(const std::string& f) {
  if (f == "text") return TraceFormat::Text;
  if (f == "jsonl") return TraceFormat::Jsonl;
  throw PreconditionError("unknown format '" + f + "'");
}

void add_program_flags(CLI::App* app, Common& c) {
  app->add_option("--program", c.program, "transducer program file");
  app->add_option("--corpus", c.corpus, "built-in corpus program instead of --program");
  app->add_option("--instance", c.instance, "global input instance file");
  app->add_option("--seed", c.seed, "random seed");
  app->add_option("--max-steps", c.max_steps, "step limit per run");
  app->add_option("--heartbeat-period", c.heartbeat_period, "fair scheduler heartbeat period p");
  app->add_option("--delivery-bound", c.delivery_bound, "fair scheduler delivery bound d");
}

// ------------------------------------------------------------------- run

struct RunArgs {
  std::string scheduler = "random-fair";
  std::string script;
};

int cmd_run(const Common& c, const RunArgs& r, std::ostream& out) {
  TransducerProgram program = load_program(c);
  Network network = load_network(c.network);
  Instance instance = load_instance(c.instance);
  HorizontalPartition partition = make_partition(c, instance, network);
  Configuration initial = make_initial(program, network, partition);

  std::unique_ptr<Scheduler> scheduler;
  auto fair = [&] {
    return std::make_unique<RandomFairScheduler>(c.seed, c.heartbeat_period, c.delivery_bound);
  };
  if (!r.script.empty()) {
    auto script = parse_file(r.script, [](const std::string& t) { return parse_script(t); });
    scheduler = std::make_unique<ScriptedScheduler>(std::move(script), fair());
  } else if (r.scheduler == "random-fair") {
    scheduler = fair();
  } else if (r.scheduler == "round-robin-fifo") {
    scheduler = std::make_unique<RoundRobinFifoScheduler>();
  } else {
    throw PreconditionError("unknown scheduler '" + r.scheduler + "'");
  }
  RunOptions opts;
  opts.max_steps = c.max_steps;
  RunTrace trace = run(program, network, initial, *scheduler, opts);
  out << format_trace(trace, trace_format(c.format));
  return trace.quiescent() ? 0 : 2;
}

// ----------------------------------------------------------------- check

struct CheckArgs {
  std::string expected;
  std::string superset;
};

Relation load_expected(const std::string& path, std::size_t arity) {
  Instance inst = load_instance(path);
  const Relation* r = inst.find(kOut);
  if (r == nullptr) return Relation(arity);
  if (r->arity() != arity) throw SchemaError(path + ": Out has the wrong arity");
  return *r;
}

std::vector<InstancePair> subset_pairs(const Instance& j, std::size_t budget,
                                       std::uint64_t seed) {
  auto facts = j.facts();
  std::vector<InstancePair> pairs;
  auto from_mask = [&](auto&& bit) {
    Instance i;
    for (std::size_t k = 0; k < facts.size(); ++k) {
      if (bit(k)) i.add(facts[k]);
    }
    return i;
  };
  if (facts.size() < 63 && (std::size_t{1} << facts.size()) <= budget) {
    for (std::size_t mask = 0; mask < (std::size_t{1} << facts.size()); ++mask) {
      pairs.emplace_back(from_mask([&](std::size_t k) { return ((mask >> k) & 1U) != 0; }), j);
    }
    return pairs;
  }
  std::mt19937_64 rng(seed);
  for (std::size_t n = 0; n < budget; ++n) {
    pairs.emplace_back(from_mask([&](std::size_t) { return (rng() & 1U) != 0; }), j);
  }
  return pairs;
}

int cmd_check(const std::string& property, const Common& c, const CheckArgs& a,
              std::ostream& out) {
  TransducerProgram program = load_program(c);
  Instance instance = load_instance(c.instance);
  CheckOptions opts = check_options(c);
  CheckVerdict v;
  if (property == "consistency") {
    v = check_consistency(program, load_network(c.network), instance, opts);
  } else if (property == "topology") {
    std::vector<Network> nets;
    if (!c.network.empty()) nets.push_back(load_network(c.network));
    for (const auto& f : c.networks) nets.push_back(load_network(f));
    bool has_single = std::any_of(nets.begin(), nets.end(),
                                  [](const Network& n) { return n.size() == 1; });
    if (!has_single) nets.insert(nets.begin(), Network::single());
    v = check_topology_independence(program, nets, instance, opts);
  } else if (property == "coordination") {
    Network network = load_network(c.network);
    Relation expected(program.schema().output_arity);
    if (!a.expected.empty()) {
      expected = load_expected(a.expected, program.schema().output_arity);
    } else {
      RandomFairScheduler sched(c.seed, c.heartbeat_period, c.delivery_bound);
      RunOptions ro;
      ro.max_steps = c.max_steps;
      ro.record_steps = false;
      RunTrace t = run(program, network,
                       make_initial(program, network, full_replication(instance, network.nodes())),
                       sched, ro);
      if (!t.quiescent()) {
        v.property = Property::CoordinationFree;
        v.result = Verdict::Inconclusive;
        v.note = "the reference fair run did not quiesce within --max-steps";
        out << verdict_json(v) << '\n';
        return v.exit_code();
      }
      expected = t.cumulative_output;
    }
    v = check_coordination_free(program, network, instance, expected, opts);
  } else if (property == "monotone") {
    Network network = load_network(c.network);
    std::vector<InstancePair> pairs;
    if (!a.superset.empty()) {
      pairs.emplace_back(instance, load_instance(a.superset));
    } else {
      pairs = subset_pairs(instance, c.budget, c.seed);
    }
    v = check_monotone(program, network, pairs, opts);
  } else {
    throw PreconditionError("unknown property '" + property + "'");
  }
  out << verdict_json(v) << '\n';
  return v.exit_code();
}

// ------------------------------------------------------------------ demo

int cmd_demo(const std::string& name, const Common& c, std::ostream& out) {
  const CorpusEntry& e = corpus_entry(name);
  Network network = c.network.empty() ? Network::ring(4) : load_network(c.network);
  Instance instance = c.instance.empty() ? random_instance(e.input, 4, 4, c.seed)
                                         : load_instance(c.instance);
  HorizontalPartition partition = make_partition(c, instance, network);
  RandomFairScheduler sched(c.seed, c.heartbeat_period, c.delivery_bound);
  RunOptions ro;
  ro.max_steps = c.max_steps;
  RunTrace t = run(e.program, network, make_initial(e.program, network, partition), sched, ro);

  out << e.name << ": " << e.anchor << '\n' << e.description << "\n\n";
  out << "program:\n" << format_program(e.program) << '\n';
  out << "network: " << network.size() << " nodes, " << network.edges().size() << " edges\n";
  out << "instance:\n" << format_instance(instance);
  out << "steps: " << t.length << '\n';
  out << "output: {";
  bool first = true;
  for (const auto& tup : t.cumulative_output) {
    out << (first ? "" : ", ") << to_string(tup);
    first = false;
  }
  out << "}\n";
  if (!t.quiescent()) {
    out << "quiescent: no (step limit reached)\n";
    return 2;
  }
  out << "quiescent: yes, index " << *t.quiescence_index << '\n';
  if (e.oracle) {
    bool ok = (*e.oracle)(instance) == t.cumulative_output;
    out << "oracle: " << (ok ? "agrees" : "DISAGREES") << '\n';
    return ok ? 0 : 1;
  }
  return 0;
}

// --------------------------------------------------------------- dedalus

struct DedalusArgs {
  std::string program;
  std::string input;
  std::string machine;
  std::string word;
  std::size_t max_time = 50;
  std::size_t horizon = 0;
  bool print_program = false;
};

int cmd_dedalus_run(const DedalusArgs& d, std::ostream& out) {
  if (d.program.empty()) throw PreconditionError("--program is required");
  DedalusProgram p =
      parse_file(d.program, [](const std::string& t) { return parse_dedalus(t); });
  TemporalInstance input;
  if (!d.input.empty()) {
    input = parse_file(d.input, [](const std::string& t) { return parse_temporal_instance(t); });
  }
  out << format_temporal_instance(eval_dedalus(p, input, d.max_time));
  if (d.horizon > 0) {
    StabilityReport s = check_eventual_consistency(p, input, d.horizon);
    json j{{"stable", s.stable},
           {"stabilization_time",
            s.stabilization_time ? json(*s.stabilization_time) : json(nullptr)},
           {"horizon", s.horizon}};
    out << "% stability " << j.dump() << '\n';
  }
  return 0;
}

int cmd_dedalus_tm(const DedalusArgs& d, std::ostream& out) {
  if (d.machine.empty()) throw PreconditionError("--machine is required");
  TuringMachine m =
      parse_file(d.machine, [](const std::string& t) { return parse_turing_machine(t); });
  if (d.print_program) {
    out << tm_program_source(m);
    return 0;
  }
  for (char ch : d.word) {
    if (std::find(m.alphabet.begin(), m.alphabet.end(), std::string(1, ch)) ==
        m.alphabet.end()) {
      throw PreconditionError(std::string("letter '") + ch + "' is not in the input alphabet");
    }
  }
  DedalusProgram p = build_tm_program(m);
  TemporalInstance result = eval_dedalus(p, word_structure(d.word), d.max_time);
  std::optional<std::size_t> accept_time;
  for (const auto& [t, s] : result.slices()) {
    if (s.find("Accept") != nullptr) {
      accept_time = t;
      break;
    }
  }
  json j{{"word", d.word},
         {"accepted", accept_time.has_value()},
         {"accept_time", accept_time ? json(*accept_time) : json(nullptr)},
         {"max_time", d.max_time}};
  if (d.horizon > 0) {
    StabilityReport s = check_eventual_consistency(p, word_structure(d.word), d.horizon);
    j["stable"] = s.stable;
    j["stabilization_time"] = s.stabilization_time ? json(*s.stabilization_time) : json(nullptr);
  }
  out << j.dump() << '\n';
  return accept_time ? 0 : 1;
}

}  // namespace

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"relnet: relational transducer networks", "relnet"};
  app.require_subcommand(1);
  Common c;
  std::function<int()> action;

  auto* run_cmd = app.add_subcommand("run", "simulate one run and print its trace");
  RunArgs r;
  add_program_flags(run_cmd, c);
  run_cmd->add_option("--network", c.network, "network file")->required();
  run_cmd->add_option("--partition", c.partition, "explicit partition file");
  run_cmd->add_option("--partition-mode", c.partition_mode, "full|disjoint|one-node|random:<seed>");
  run_cmd->add_option("--scheduler", r.scheduler, "random-fair|round-robin-fifo");
  run_cmd->add_option("--script", r.script, "scripted prefix, then random-fair");
  run_cmd->add_option("--format", c.format, "text|jsonl");
  run_cmd->callback([&] { action = [&] { return cmd_run(c, r, out); }; });

  auto* check_cmd = app.add_subcommand("check", "budgeted property checks");
  check_cmd->require_subcommand(1);
  CheckArgs ca;
  const std::pair<const char*, const char*> props[] = {
      {"consistency", "same output over partitions and schedules"},
      {"topology", "same output across networks, one of them single-node"},
      {"coordination", "search for a heartbeat-only witness partition"},
      {"monotone", "output on a subset stays within output on the superset"}};
  for (const auto& [prop, help] : props) {
    auto* sub = check_cmd->add_subcommand(prop, help);
    add_program_flags(sub, c);
    sub->add_option("--network", c.network, "network file");
    sub->add_option("--budget", c.budget, "maximum cells / partitions / pairs");
    sub->add_option("--schedules", c.schedules, "schedules per partition");
    sub->add_option("--partition", c.partition, "explicit partition file");
    sub->add_flag("--exhaustive", c.exhaustive, "enumerate every partition");
    sub->add_option("--jobs", c.jobs, "worker threads for independent cells");
    if (std::string_view(prop) == "topology") {
      sub->add_option("--networks", c.networks, "network files")->expected(1, -1);
    }
    if (std::string_view(prop) == "coordination") {
      sub->add_option("--expected", ca.expected, "instance file holding the expected Out facts");
    }
    if (std::string_view(prop) == "monotone") {
      sub->add_option("--superset", ca.superset, "instance J with --instance as I");
    }
    std::string p = prop;
    sub->callback([&, p] { action = [&, p] { return cmd_check(p, c, ca, out); }; });
  }

  auto* demo_cmd = app.add_subcommand("demo", "run a corpus program end to end");
  std::string demo_name;
  demo_cmd->add_option("name", demo_name, "corpus entry")->required();
  add_program_flags(demo_cmd, c);
  demo_cmd->add_option("--network", c.network, "network file (default ring of 4)");
  demo_cmd->add_option("--partition-mode", c.partition_mode, "full|disjoint|one-node|random:<seed>");
  demo_cmd->callback([&] { action = [&] { return cmd_demo(demo_name, c, out); }; });

  auto* ded_cmd = app.add_subcommand("dedalus", "Dedalus evaluation");
  ded_cmd->require_subcommand(1);
  DedalusArgs d;
  auto* ded_run = ded_cmd->add_subcommand("run", "evaluate a program on a temporal instance");
  ded_run->add_option("--program", d.program, "Dedalus program file")->required();
  ded_run->add_option("--input", d.input, "temporal instance file");
  ded_run->add_option("--max-time", d.max_time, "last timestamp to compute");
  ded_run->add_option("--stability-horizon", d.horizon, "also report eventual consistency");
  ded_run->callback([&] { action = [&] { return cmd_dedalus_run(d, out); }; });
  auto* ded_tm = ded_cmd->add_subcommand("tm", "run the compiled program of a Turing machine");
  ded_tm->add_option("--machine", d.machine, "machine file")->required();
  ded_tm->add_option("--word", d.word, "input word");
  ded_tm->add_option("--max-time", d.max_time, "last timestamp to compute");
  ded_tm->add_option("--stability-horizon", d.horizon, "also report eventual consistency");
  ded_tm->add_flag("--print-program", d.print_program, "print the compiled program");
  ded_tm->callback([&] { action = [&] { return cmd_dedalus_tm(d, out); }; });

  auto* list_cmd = app.add_subcommand("corpus-list", "list the built-in programs");
  list_cmd->callback([&] {
    action = [&] {
      for (const auto& e : corpus()) out << e.name << "\t" << e.anchor << '\n';
      return 0;
    };
  });
  auto* show_cmd = app.add_subcommand("corpus-show", "print a built-in program");
  std::string show_name;
  show_cmd->add_option("name", show_name)->required();
  show_cmd->callback([&] {
    action = [&] {
      out << corpus_entry(show_name).source;
      return 0;
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    err << "relnet: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    return action ? action() : kExitUsage;
  } catch (const BadInput& e) {
    err << "relnet: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NoInput& e) {
    err << "relnet: " << e.what() << '\n';
    return kExitNoInput;
  } catch (const ParseError& e) {
    err << "relnet: parse error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SchemaError& e) {
    err << "relnet: " << e.what() << '\n';
    return kExitUsage;
  } catch (const PreconditionError& e) {
    err << "relnet: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "relnet: " << e.what() << '\n';
    return 70;
  }
}

}  // namespace relnet::cli
