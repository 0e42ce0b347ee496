#include "relnet/harness.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <mutex>
#include <random>
#include <set>
#include <thread>

#include "json.hpp"
#include "lexer.hpp"

namespace relnet {

namespace {

std::uint64_t mix(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

HorizontalPartition empty_partition(const std::vector<DataElement>& nodes) {
  HorizontalPartition h;
  for (auto v : nodes) h[v];
  return h;
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (std::size_t j = 0; j < jobs; ++j) {
    workers.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

// ---------------------------------------------------------------- partitions

std::size_t partition_count(std::size_t facts, std::size_t nodes) {
  constexpr std::size_t kMax = std::numeric_limits<std::size_t>::max();
  if (nodes >= 63) return facts == 0 ? 1 : kMax;
  const std::size_t base = (std::size_t{1} << nodes) - 1;
  std::size_t out = 1;
  for (std::size_t i = 0; i < facts; ++i) {
    if (base != 0 && out > kMax / base) return kMax;
    out *= base;
  }
  return out;
}

HorizontalPartition full_replication(const Instance& instance,
                                     const std::vector<DataElement>& nodes) {
  HorizontalPartition h;
  for (auto v : nodes) h[v] = instance;
  return h;
}

HorizontalPartition round_robin_partition(const Instance& instance,
                                          const std::vector<DataElement>& nodes) {
  HorizontalPartition h = empty_partition(nodes);
  std::size_t i = 0;
  for (const auto& f : instance.facts()) h[nodes[i++ % nodes.size()]].add(f);
  return h;
}

HorizontalPartition one_node_partition(const Instance& instance,
                                       const std::vector<DataElement>& nodes,
                                       std::optional<DataElement> at) {
  HorizontalPartition h = empty_partition(nodes);
  DataElement v = at.value_or(nodes.front());
  if (!h.contains(v)) throw PreconditionError("unknown node " + v.name());
  h[v] = instance;
  return h;
}

HorizontalPartition random_partition(const Instance& instance,
                                     const std::vector<DataElement>& nodes,
                                     std::uint64_t seed) {
  HorizontalPartition h = empty_partition(nodes);
  std::mt19937_64 rng(seed);
  const std::size_t n = nodes.size();
  std::uniform_int_distribution<std::uint64_t> pick(1, (std::uint64_t{1} << n) - 1);
  for (const auto& f : instance.facts()) {
    std::uint64_t mask = pick(rng);
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::uint64_t{1} << i)) h[nodes[i]].add(f);
    }
  }
  return h;
}

std::vector<HorizontalPartition> enumerate_partitions(const Instance& instance,
                                                      const std::vector<DataElement>& nodes,
                                                      const PartitionOptions& options) {
  if (nodes.empty()) throw PreconditionError("no nodes to partition over");
  const auto facts = instance.facts();
  const std::size_t total = partition_count(facts.size(), nodes.size());
  bool exhaustive = options.mode == PartitionMode::Exhaustive ||
                    (options.mode == PartitionMode::Auto && total <= options.budget);
  if (exhaustive && total > options.budget) {
    throw PreconditionError("exhaustive enumeration needs " + std::to_string(total) +
                            " partitions, over the budget of " +
                            std::to_string(options.budget));
  }
  std::vector<HorizontalPartition> out;
  if (exhaustive) {
    const std::size_t base = (std::size_t{1} << nodes.size()) - 1;
    std::vector<std::size_t> digit(facts.size(), 0);  // mask - 1 per fact
    out.reserve(total);
    for (std::size_t k = 0; k < total; ++k) {
      HorizontalPartition h = empty_partition(nodes);
      for (std::size_t f = 0; f < facts.size(); ++f) {
        std::size_t mask = digit[f] + 1;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
          if (mask & (std::size_t{1} << i)) h[nodes[i]].add(facts[f]);
        }
      }
      out.push_back(std::move(h));
      for (std::size_t f = 0; f < facts.size(); ++f) {
        if (++digit[f] < base) break;
        digit[f] = 0;
      }
    }
    return out;
  }

  std::set<HorizontalPartition> seen;
  auto offer = [&](HorizontalPartition h) {
    if (out.size() < std::max<std::size_t>(options.budget, 1) && seen.insert(h).second) {
      out.push_back(std::move(h));
    }
  };
  offer(full_replication(instance, nodes));
  offer(round_robin_partition(instance, nodes));
  offer(one_node_partition(instance, nodes));
  // Draws may repeat on tiny instances; stop after a bounded number of tries.
  for (std::size_t k = 0, drawn = 0; drawn < options.samples && k < 20 * options.samples + 20;
       ++k) {
    std::size_t before = out.size();
    offer(random_partition(instance, nodes, mix(options.seed + k)));
    if (out.size() > before) ++drawn;
    if (out.size() >= options.budget) break;
  }
  return out;
}

HorizontalPartition parse_partition(std::string_view text) {
  using detail::Tok;
  detail::TokenStream ts(detail::tokenize(text));
  HorizontalPartition out;
  while (!ts.at(Tok::End)) {
    ts.expect_word("node");
    const auto& name = ts.expect(Tok::Word, "node name");
    DataElement v(name.text);
    if (out.contains(v)) detail::TokenStream::fail_at(name, "node " + name.text + " repeated");
    Instance& share = out[v];
    ts.expect(Tok::LBrace);
    while (!ts.at(Tok::RBrace)) {
      const auto& rel = ts.expect(Tok::Word, "relation name");
      ts.expect(Tok::LParen);
      Tuple args;
      if (!ts.at(Tok::RParen)) {
        do {
          args.emplace_back(ts.expect(Tok::Word, "data element").text);
        } while (ts.accept(Tok::Comma));
      }
      ts.expect(Tok::RParen);
      ts.expect(Tok::Dot);
      try {
        share.add(rel.text, std::move(args));
      } catch (const SchemaError& e) {
        detail::TokenStream::fail_at(rel, e.what());
      }
    }
    ts.expect(Tok::RBrace);
  }
  return out;
}

std::string format_partition(const HorizontalPartition& partition) {
  std::string out;
  for (const auto& [v, share] : partition) {
    out += "node " + v.name() + " {";
    if (share.empty()) {
      out += " }\n";
      continue;
    }
    out += "\n";
    for (const auto& f : share.facts()) out += "  " + to_string(f) + ".\n";
    out += "}\n";
  }
  return out;
}

// ------------------------------------------------------------------- verdicts

std::string_view to_string(Property p) {
  switch (p) {
    case Property::Consistency: return "consistency";
    case Property::TopologyIndependence: return "topology-independence";
    case Property::CoordinationFree: return "coordination-free";
    case Property::Monotone: return "monotone";
  }
  return "?";
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::WitnessFound: return "witness-found";
    case Verdict::NoWitness: return "no-witness";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

int CheckVerdict::exit_code() const noexcept {
  switch (result) {
    case Verdict::Pass:
    case Verdict::WitnessFound: return 0;
    case Verdict::Fail:
    case Verdict::NoWitness: return 1;
    case Verdict::Inconclusive: return 2;
  }
  return 2;
}

std::string verdict_json(const CheckVerdict& verdict) {
  using json = nlohmann::ordered_json;
  auto tuples = [](const Relation& r) {
    json a = json::array();
    for (const auto& t : r) a.push_back(to_string(t));
    return a;
  };
  auto facts = [](const Instance& inst) {
    json a = json::array();
    for (const auto& f : inst.facts()) a.push_back(to_string(f));
    return a;
  };
  json j;
  j["property"] = std::string(to_string(verdict.property));
  j["result"] = std::string(to_string(verdict.result));
  j["budget"] = {{"cells", verdict.cells},
                 {"partitions", verdict.partitions},
                 {"schedules", verdict.schedules},
                 {"networks", verdict.networks}};
  j["inconclusive_cells"] = verdict.inconclusive_cells;
  j["output"] = verdict.output ? tuples(*verdict.output) : json(nullptr);
  json ev = json::array();
  for (const auto& e : verdict.evidence) {
    json x;
    x["label"] = e.label;
    if (e.network) {
      json edges = json::array();
      for (const auto& [a, b] : e.network->edges()) {
        edges.push_back(json::array({a.name(), b.name()}));
      }
      json nodes = json::array();
      for (auto v : e.network->nodes()) nodes.push_back(v.name());
      x["network"] = {{"nodes", nodes}, {"edges", edges}};
    }
    if (!e.instance.empty()) x["instance"] = facts(e.instance);
    json part = json::object();
    for (const auto& [v, share] : e.partition) part[v.name()] = facts(share);
    x["partition"] = part;
    x["schedule"] = e.schedule;
    x["output"] = tuples(e.output);
    x["quiescent"] = e.quiescent;
    x["steps"] = e.steps;
    ev.push_back(std::move(x));
  }
  j["evidence"] = ev;
  if (!verdict.note.empty()) j["note"] = verdict.note;
  return j.dump();
}

// -------------------------------------------------------------- consistency

namespace {

struct Cell {
  std::size_t partition;
  std::size_t schedule;
};

std::string schedule_name(std::size_t j, std::uint64_t seed) {
  return j == 0 ? std::string("round-robin-fifo") : "random-fair:" + std::to_string(seed);
}

std::uint64_t cell_seed(const CheckOptions& o, std::size_t partition, std::size_t j) {
  return mix(mix(o.seed) ^ (partition * 1000003ULL + j));
}

std::vector<HorizontalPartition> partitions_for(const Instance& instance, const Network& network,
                                                const CheckOptions& o) {
  if (!o.partitions.empty()) return o.partitions;
  PartitionOptions po;
  po.budget = std::max<std::size_t>(1, o.budget / std::max<std::size_t>(1, o.schedules));
  po.mode = o.partition_mode;
  po.samples = po.budget;
  po.seed = o.seed;
  return enumerate_partitions(instance, network.nodes(), po);
}

}  // namespace

CheckVerdict check_consistency(const TransducerProgram& program, const Network& network,
                               const Instance& instance, const CheckOptions& options) {
  instance.check_conforms(program.schema().input);
  const auto parts = partitions_for(instance, network, options);
  const std::size_t schedules = std::max<std::size_t>(1, options.schedules);
  std::vector<Cell> cells;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    for (std::size_t j = 0; j < schedules; ++j) cells.push_back({p, j});
  }
  if (cells.size() > std::max<std::size_t>(1, options.budget)) {
    cells.resize(std::max<std::size_t>(1, options.budget));
  }

  std::vector<Evidence> results(cells.size());
  auto run_cell = [&](std::size_t i) {
    const Cell c = cells[i];
    const std::uint64_t seed = cell_seed(options, c.partition, c.schedule);
    Configuration init = make_initial(program, network, parts[c.partition]);
    RunOptions ro;
    ro.max_steps = options.max_steps;
    ro.record_steps = false;
    ro.keep_initial = false;
    RunTrace trace;
    if (c.schedule == 0) {
      RoundRobinFifoScheduler s;
      trace = run(program, network, init, s, ro);
    } else {
      RandomFairScheduler s(seed, options.heartbeat_period, options.delivery_bound);
      trace = run(program, network, init, s, ro);
    }
    Evidence& e = results[i];
    e.label = "cell " + std::to_string(i);
    e.network = network;
    e.partition = parts[c.partition];
    e.schedule = schedule_name(c.schedule, seed);
    e.output = std::move(trace.cumulative_output);
    e.quiescent = trace.quiescent();
    e.steps = trace.length;
  };

  CheckVerdict v;
  v.property = Property::Consistency;
  v.networks = 1;
  v.schedules = schedules;

  // Sequential runs stop at the first disagreement.
  std::optional<std::size_t> reference, differing;
  std::size_t done = 0;
  auto scan = [&](std::size_t i) {
    if (!results[i].quiescent) {
      ++v.inconclusive_cells;
      return;
    }
    if (!reference) {
      reference = i;
    } else if (!differing && !(results[i].output == results[*reference].output)) {
      differing = i;
    }
  };
  if (options.jobs <= 1) {
    for (; done < cells.size() && !differing; ++done) {
      run_cell(done);
      scan(done);
    }
  } else {
    parallel_for(cells.size(), options.jobs, run_cell);
    for (; done < cells.size(); ++done) scan(done);
  }
  v.cells = done;
  std::set<std::size_t> used;
  for (std::size_t i = 0; i < done; ++i) used.insert(cells[i].partition);
  v.partitions = used.size();

  if (differing) {
    v.result = Verdict::Fail;
    v.evidence = {results[*reference], results[*differing]};
    v.note = "two fair runs produced different outputs";
  } else if (v.inconclusive_cells > 0) {
    v.result = Verdict::Inconclusive;
    for (std::size_t i = 0; i < done; ++i) {
      if (!results[i].quiescent) {
        v.evidence.push_back(results[i]);
        break;
      }
    }
    v.note = "some runs reached max_steps before quiescence";
    if (reference) v.output = results[*reference].output;
  } else {
    v.result = Verdict::Pass;
    if (reference) v.output = results[*reference].output;
  }
  return v;
}

CheckVerdict check_topology_independence(const TransducerProgram& program,
                                         const std::vector<Network>& networks,
                                         const Instance& instance,
                                         const CheckOptions& options) {
  if (networks.size() < 2 ||
      std::none_of(networks.begin(), networks.end(),
                   [](const Network& n) { return n.size() == 1; })) {
    throw PreconditionError(
        "topology independence needs at least two networks including a single-node one");
  }
  CheckVerdict v;
  v.property = Property::TopologyIndependence;
  v.networks = networks.size();
  std::optional<Evidence> first;
  bool inconclusive = false;
  for (std::size_t k = 0; k < networks.size(); ++k) {
    CheckOptions o = options;
    o.seed = mix(options.seed + k);
    CheckVerdict c = check_consistency(program, networks[k], instance, o);
    v.cells += c.cells;
    v.partitions += c.partitions;
    v.schedules = c.schedules;
    v.inconclusive_cells += c.inconclusive_cells;
    if (c.result == Verdict::Fail) {
      v.result = Verdict::Fail;
      v.evidence = c.evidence;
      v.note = "inconsistent on network " + std::to_string(k);
      return v;
    }
    if (c.result == Verdict::Inconclusive) inconclusive = true;
    if (!c.output) continue;
    Evidence here;
    for (const auto& e : c.evidence) here = e;
    here.label = "network " + std::to_string(k);
    here.network = networks[k];
    here.output = *c.output;
    if (!first) {
      first = here;
    } else if (!(first->output == here.output)) {
      v.result = Verdict::Fail;
      v.evidence = {*first, here};
      v.note = "networks computed different outputs";
      return v;
    }
  }
  if (inconclusive) {
    v.result = Verdict::Inconclusive;
    v.note = "some runs reached max_steps before quiescence";
  }
  if (first) v.output = first->output;
  return v;
}

// --------------------------------------------------------- coordination-free

Relation heartbeat_only_output(const TransducerProgram& program, const Network& network,
                               const HorizontalPartition& partition,
                               std::size_t max_iterations) {
  Configuration config = make_initial(program, network, partition);
  Relation out(program.schema().output_arity);
  const Instance none;
  for (auto& [v, start] : config.state) {
    LocalState s = start;
    std::set<LocalState> seen{s};
    for (std::size_t i = 0; i < max_iterations; ++i) {
      StepEffects fx = advance(program, s, none);
      out.merge(fx.output);
      if (!seen.insert(s).second) break;
    }
  }
  return out;
}

CheckVerdict check_coordination_free(const TransducerProgram& program,
                                     const Network& network, const Instance& instance,
                                     const Relation& expected, const CheckOptions& options) {
  instance.check_conforms(program.schema().input);
  std::vector<HorizontalPartition> parts = options.partitions;
  if (parts.empty()) {
    PartitionOptions po;
    po.budget = std::max<std::size_t>(1, options.budget);
    po.mode = options.partition_mode;
    po.samples = po.budget;
    po.seed = options.seed;
    parts = enumerate_partitions(instance, network.nodes(), po);
  }
  CheckVerdict v;
  v.property = Property::CoordinationFree;
  v.networks = 1;
  v.schedules = 1;
  v.output = expected;
  Evidence closest;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    Relation out = heartbeat_only_output(program, network, parts[i]);
    ++v.cells;
    ++v.partitions;
    Evidence e;
    e.label = "partition " + std::to_string(i);
    e.network = network;
    e.partition = parts[i];
    e.instance = instance;
    e.schedule = "heartbeat-only";
    e.output = std::move(out);
    if (e.output == expected) {
      v.result = Verdict::WitnessFound;
      v.evidence = {std::move(e)};
      return v;
    }
    if (i == 0) closest = std::move(e);
  }
  v.result = Verdict::NoWitness;
  if (!parts.empty()) v.evidence = {std::move(closest)};
  v.note = "no partition reaches the expected output with heartbeats only";
  return v;
}

CheckVerdict check_coordination_free_family(const TransducerProgram& program,
                                            const Network& network,
                                            const std::vector<Instance>& instances,
                                            const Oracle& oracle,
                                            const CheckOptions& options) {
  CheckVerdict total;
  total.property = Property::CoordinationFree;
  total.result = Verdict::WitnessFound;
  total.networks = 1;
  total.schedules = 1;
  for (const auto& inst : instances) {
    CheckVerdict v = check_coordination_free(program, network, inst, oracle(inst), options);
    total.cells += v.cells;
    total.partitions += v.partitions;
    if (v.result == Verdict::NoWitness) {
      total.result = Verdict::NoWitness;
      total.evidence = v.evidence;
      total.output = v.output;
      total.note = "instance without a heartbeat-only witness";
      return total;
    }
  }
  return total;
}

// ---------------------------------------------------------------- monotone

namespace {

CheckVerdict monotone_violation(const Instance& I, const Relation& qi, const Instance& J,
                                const Relation& qj) {
  CheckVerdict v;
  v.property = Property::Monotone;
  v.result = Verdict::Fail;
  Evidence a, b;
  a.label = "I";
  a.instance = I;
  a.output = qi;
  b.label = "J";
  b.instance = J;
  b.output = qj;
  v.evidence = {a, b};
  v.note = "Q(I) is not contained in Q(J)";
  return v;
}

}  // namespace

CheckVerdict check_monotone(const TransducerProgram& program, const Network& network,
                            const std::vector<InstancePair>& pairs,
                            const CheckOptions& options) {
  CheckVerdict total;
  total.property = Property::Monotone;
  total.networks = 1;
  std::size_t inconclusive_pairs = 0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto& [I, J] = pairs[k];
    if (!I.subset_of(J)) throw PreconditionError("instance pair " + std::to_string(k) +
                                                 " is not ordered by inclusion");
    CheckOptions o = options;
    o.seed = mix(options.seed + k);
    CheckVerdict vi = check_consistency(program, network, I, o);
    CheckVerdict vj = check_consistency(program, network, J, o);
    total.cells += vi.cells + vj.cells;
    total.partitions += vi.partitions + vj.partitions;
    total.schedules = vi.schedules;
    total.inconclusive_cells += vi.inconclusive_cells + vj.inconclusive_cells;
    if (vi.result != Verdict::Pass || vj.result != Verdict::Pass || !vi.output ||
        !vj.output) {
      ++inconclusive_pairs;
      continue;
    }
    if (!vi.output->subset_of(*vj.output)) {
      CheckVerdict fail = monotone_violation(I, *vi.output, J, *vj.output);
      fail.cells = total.cells;
      fail.partitions = total.partitions;
      fail.schedules = total.schedules;
      fail.networks = 1;
      for (auto& e : fail.evidence) e.network = network;
      return fail;
    }
  }
  if (inconclusive_pairs > 0) {
    total.result = Verdict::Inconclusive;
    total.note = std::to_string(inconclusive_pairs) +
                 " pairs had inconsistent or non-quiescent runs";
  }
  return total;
}

CheckVerdict check_monotone(const Oracle& oracle, const std::vector<InstancePair>& pairs) {
  CheckVerdict total;
  total.property = Property::Monotone;
  for (const auto& [I, J] : pairs) {
    if (!I.subset_of(J)) throw PreconditionError("instance pair is not ordered by inclusion");
    Relation qi = oracle(I), qj = oracle(J);
    ++total.cells;
    if (!qi.subset_of(qj)) return monotone_violation(I, qi, J, qj);
  }
  return total;
}

// ------------------------------------------------------ adversarial extension

AdversarialResult theorem4_adversarial_test(const TransducerProgram& program,
                                            const Network& network, const Instance& I,
                                            const Instance& J, const Tuple& t,
                                            const CheckOptions& options) {
  if (!I.subset_of(J)) throw PreconditionError("I must be contained in J");
  if (network.size() < 2) throw PreconditionError("the construction needs at least two nodes");
  if (t.size() != program.schema().output_arity) {
    throw PreconditionError("tuple arity differs from the output arity");
  }
  const HorizontalPartition H = full_replication(I, network.nodes());
  Configuration config = make_initial(program, network, H);
  const Instance none;

  AdversarialResult result;
  bool found = false;
  for (auto& [v, start] : config.state) {
    LocalState s = start;
    std::set<LocalState> seen{s};
    for (std::size_t k = 1; k <= 10000; ++k) {
      StepEffects fx = advance(program, s, none);
      if (fx.output.contains(t)) {
        result.node = v;
        result.prefix_heartbeats = k;
        found = true;
        break;
      }
      if (!seen.insert(s).second) break;
    }
    if (found) break;
  }
  if (!found) {
    throw PreconditionError("tuple " + to_string(t) +
                            " is not produced by heartbeats alone on the full replication of I");
  }

  const Instance extra = instance_difference(J, I);
  result.partition = H;
  for (auto& [u, share] : result.partition) {
    if (u != result.node) share.merge(extra);
  }
  result.script.assign(result.prefix_heartbeats,
                       Directive{StepKind::Heartbeat, result.node, std::nullopt});
  ScriptedScheduler sched(result.script,
                          std::make_unique<RandomFairScheduler>(mix(options.seed),
                                                                options.heartbeat_period,
                                                                options.delivery_bound));
  RunOptions ro;
  ro.max_steps = options.max_steps;
  result.trace = run(program, network, make_initial(program, network, result.partition),
                     sched, ro);
  const auto& steps = result.trace.steps;
  const bool in_prefix = steps.size() >= result.prefix_heartbeats &&
                         steps[result.prefix_heartbeats - 1].output.contains(t);
  result.holds = in_prefix && result.trace.cumulative_output.contains(t);
  return result;
}

// ----------------------------------------------------------------- ring replay

namespace {

struct NodeSnapshot {
  LocalState state;
  std::vector<Fact> queue;

  friend bool operator==(const NodeSnapshot&, const NodeSnapshot&) = default;
};

NodeSnapshot snapshot(const Configuration& c, DataElement v) {
  NodeSnapshot s{c.state.at(v), {}};
  for (const auto& b : c.buf.at(v).queue()) s.queue.push_back(b.fact);
  return s;
}

NetTransition apply_action(const TransducerProgram& program, const Network& network,
                           Configuration& config, const Action& a, std::size_t now) {
  if (a.kind == StepKind::Heartbeat) return apply_heartbeat(program, network, config, a.node, now);
  return apply_delivery_at(program, network, config, a.node, a.position.value_or(0), now);
}

}  // namespace

RingReplayResult ring_fifo_replay(const TransducerProgram& program, const Instance& I,
                                  const Instance& J, std::size_t max_rounds) {
  if (program.flags().uses_id) {
    throw PreconditionError("the ring construction requires a program that does not use Id");
  }
  if (!I.subset_of(J)) throw PreconditionError("I must be contained in J");
  const Network ring = Network::ring(4);
  const auto& nodes = ring.nodes();
  const DataElement n1 = nodes[0], n2 = nodes[1], n3 = nodes[2], n4 = nodes[3];
  auto edges = ring.edges();
  edges.emplace_back(n2, n4);
  const Network chord = Network::make(nodes, edges);
  const std::vector<DataElement> watched{n1, n2, n4};

  RingReplayResult result;

  // Ring run with I everywhere, one snapshot per round.
  Configuration a = make_initial(program, ring, full_replication(I, nodes));
  RoundRobinFifoScheduler sched_a;
  const std::size_t len_a = sched_a.round_length(ring);
  std::vector<std::vector<NodeSnapshot>> rounds;
  Relation cumulative(program.schema().output_arity);
  std::size_t step = 0;
  for (std::size_t r = 1; r <= max_rounds; ++r) {
    Relation node1(program.schema().output_arity);
    for (std::size_t i = 0; i < len_a; ++i, ++step) {
      Action act = *sched_a.next(ring, a, step);
      NetTransition t = apply_action(program, ring, a, act, step);
      cumulative.merge(t.output);
      if (t.node == n1) node1.merge(t.output);
    }
    std::vector<NodeSnapshot> snap;
    for (auto v : watched) snap.push_back(snapshot(a, v));
    rounds.push_back(std::move(snap));
    if (!node1.empty()) {
      result.tuple = *node1.begin();
      result.round = r;
      break;
    }
    if (a.buffers_empty() && detect_quiescence(program, ring, a, cumulative)) break;
  }

  // Chord run: node 3 holds J \ I and never takes a step.
  HorizontalPartition h;
  for (auto v : nodes) h[v] = I;
  h[n3] = instance_difference(J, I);
  Configuration b = make_initial(program, chord, h);
  RoundRobinFifoScheduler sched_b(watched);
  const std::size_t len_b = sched_b.round_length(chord);
  Relation node1_b(program.schema().output_arity);
  step = 0;
  for (std::size_t r = 0; r < rounds.size(); ++r) {
    for (std::size_t i = 0; i < len_b; ++i, ++step) {
      Action act = *sched_b.next(chord, b, step);
      NetTransition t = apply_action(program, chord, b, act, step);
      if (t.node == n1) node1_b.merge(t.output);
    }
    for (std::size_t k = 0; k < watched.size(); ++k) {
      if (!(snapshot(b, watched[k]) == rounds[r][k])) {
        result.failure = "node " + watched[k].name() + " differs after round " +
                         std::to_string(r + 1);
        result.rounds_compared = r + 1;
        return result;
      }
    }
    result.rounds_compared = r + 1;
  }
  if (result.tuple && !node1_b.contains(*result.tuple)) {
    result.failure = "node 1 did not output " + to_string(*result.tuple) + " on the chord network";
    return result;
  }
  result.holds = true;
  return result;
}

// -------------------------------------------------------------- CALM suite

Instance random_instance(const DatabaseSchema& schema, std::size_t facts, std::size_t domain,
                         std::uint64_t seed) {
  if (schema.empty() || domain == 0) return {};
  std::mt19937_64 rng(seed);
  std::vector<std::pair<std::string, std::size_t>> rels(schema.begin(), schema.end());
  std::uniform_int_distribution<std::size_t> pick_rel(0, rels.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_elem(1, domain);
  // Cap at the number of distinct facts available.
  std::size_t available = 0;
  for (const auto& [_, arity] : rels) {
    std::size_t c = 1;
    for (std::size_t i = 0; i < arity && c <= facts; ++i) c *= domain;
    available += c;
  }
  facts = std::min(facts, available);
  Instance out;
  while (out.size() < facts) {
    const auto& [name, arity] = rels[pick_rel(rng)];
    Tuple t;
    for (std::size_t i = 0; i < arity; ++i) t.emplace_back(std::to_string(pick_elem(rng)));
    out.add(name, std::move(t));
  }
  return out;
}

std::vector<const CorpusEntry*> calm_suite_entries(const CheckOptions& options) {
  std::vector<const CorpusEntry*> out;
  const std::vector<Network> networks{Network::single(), Network::path(2), Network::ring(3)};
  CheckOptions o = options;
  o.budget = std::min<std::size_t>(o.budget, 10);
  o.schedules = std::min<std::size_t>(o.schedules, 2);
  for (const auto& e : corpus()) {
    if (!e.program.flags().oblivious || !e.oracle) continue;
    Instance probe = random_instance(e.input, 3, 3, mix(options.seed));
    CheckVerdict v = check_topology_independence(e.program, networks, probe, o);
    if (v.result == Verdict::Pass) out.push_back(&e);
  }
  return out;
}

}  // namespace relnet
