#include <random>
#include <set>

#include "doctest.h"
#include "relnet/corpus.hpp"
#include "relnet/harness.hpp"
#include "support/oracles.hpp"

using namespace relnet;

namespace {

DataElement E(const std::string& s) { return DataElement(s); }

Relation tc_of(const Instance& i) {
  const Relation* s = i.find("S");
  return s ? relnet::testing::bfs_reachability(*s) : Relation(2);
}

}  // namespace

TEST_CASE("partition counts") {
  CHECK(partition_count(1, 2) == 3);
  CHECK(partition_count(3, 1) == 1);
  CHECK(partition_count(2, 2) == 9);
  CHECK(partition_count(0, 5) == 1);
  CHECK(partition_count(200, 8) == SIZE_MAX);

  std::vector<DataElement> two{E("1"), E("2")};
  Instance one = parse_instance("S(a).");
  CHECK(enumerate_partitions(one, two).size() == 3);
  CHECK(enumerate_partitions(one, {E("1")}).size() == 1);

  // Exhaustive enumeration against the counting formula, with uniqueness
  // and the union property.
  for (std::size_t nodes = 1; nodes <= 3; ++nodes) {
    for (std::size_t facts = 0; facts <= 3; ++facts) {
      Instance inst;
      for (std::size_t k = 0; k < facts; ++k) inst.add("S", Tuple{E("e" + std::to_string(k))});
      std::vector<DataElement> ns;
      for (std::size_t k = 1; k <= nodes; ++k) ns.push_back(E(std::to_string(k)));
      PartitionOptions o;
      o.mode = PartitionMode::Exhaustive;
      auto parts = enumerate_partitions(inst, ns, o);
      CHECK(parts.size() == partition_count(facts, nodes));
      std::set<std::vector<Instance>> seen;
      for (const auto& h : parts) {
        CHECK(partition_union(h) == inst);
        std::vector<Instance> shares;
        for (const auto& [_, share] : h) shares.push_back(share);
        CHECK(h.size() == nodes);
        seen.insert(shares);
      }
      CHECK(seen.size() == parts.size());
    }
  }

  PartitionOptions tight;
  tight.mode = PartitionMode::Exhaustive;
  tight.budget = 2;
  CHECK_THROWS_AS(enumerate_partitions(one, two, tight), PreconditionError);

  PartitionOptions sample;
  sample.mode = PartitionMode::Sample;
  sample.samples = 5;
  Instance big = parse_instance("S(a). S(b). S(c). S(d).");
  auto drawn = enumerate_partitions(big, two, sample);
  CHECK(drawn.size() >= 3);
  for (const auto& h : drawn) CHECK(partition_union(h) == big);
}

TEST_CASE("canonical partitions") {
  Instance i = parse_instance("S(a). S(b). S(c).");
  std::vector<DataElement> ns{E("1"), E("2")};
  auto full = full_replication(i, ns);
  CHECK(full.at(E("1")) == i);
  CHECK(full.at(E("2")) == i);
  auto rr = round_robin_partition(i, ns);
  CHECK(rr.at(E("1")).size() == 2);
  CHECK(rr.at(E("2")).size() == 1);
  auto one = one_node_partition(i, ns, E("2"));
  CHECK(one.at(E("1")).empty());
  CHECK(one.at(E("2")) == i);
  CHECK(random_partition(i, ns, 4) == random_partition(i, ns, 4));
  CHECK(partition_union(random_partition(i, ns, 4)) == i);
}

TEST_CASE("partition text round-trips") {
  Instance i = parse_instance("S(a,b). S(b,c). T(x).");
  HorizontalPartition h = random_partition(i, {E("1"), E("2"), E("3")}, 11);
  CHECK(parse_partition(format_partition(h)) == h);
  auto p = parse_partition("node 1 { S(a). }\nnode 2 { }\n");
  CHECK(p.size() == 2);
  CHECK(p.at(E("2")).empty());
  CHECK_THROWS_AS(parse_partition("node 1 { S(a). \n"), ParseError);
}

TEST_CASE("consistency checks") {
  CheckOptions o;
  o.seed = 3;
  {
    auto v = check_consistency(corpus_entry("first_element").program, Network::path(2),
                               parse_instance("S(a). S(b)."), o);
    CHECK(v.result == Verdict::Fail);
    CHECK(v.evidence.size() == 2);
    CHECK(v.cells <= o.budget);
    CHECK(v.evidence[0].output != v.evidence[1].output);
    CHECK(v.exit_code() == 1);
  }
  {
    Instance g = parse_instance("S(1,2). S(2,3). S(3,1). S(3,4).");
    auto v = check_consistency(corpus_entry("tc_flood").program, Network::ring(4), g, o);
    CHECK(v.result == Verdict::Pass);
    REQUIRE(v.output.has_value());
    CHECK(*v.output == tc_of(g));
    CHECK(v.exit_code() == 0);
  }
  for (const auto& e : corpus()) {
    if (e.name == "datalog_runner" || e.name == "flood_acked") continue;
    Instance i = random_instance(e.input, 3, 3, 5);
    auto v = check_consistency(e.program, Network::single(), i, o);
    CHECK_MESSAGE(v.result == Verdict::Pass, e.name);
  }
  {
    CheckOptions starved = o;
    starved.max_steps = 3;
    auto v = check_consistency(corpus_entry("tc_flood").program, Network::ring(4),
                               parse_instance("S(1,2). S(2,3)."), starved);
    CHECK(v.result == Verdict::Inconclusive);
    CHECK(v.inconclusive_cells > 0);
    CHECK(v.exit_code() == 2);
  }
}

TEST_CASE("topology independence checks") {
  CheckOptions o;
  o.seed = 4;
  o.budget = 20;
  {
    auto v = check_topology_independence(corpus_entry("fwd_identity").program,
                                         {Network::single(), Network::path(2)},
                                         parse_instance("S(a). S(b)."), o);
    CHECK(v.result == Verdict::Fail);
  }
  {
    Instance g = parse_instance("S(1,2). S(2,3). S(3,4).");
    auto v = check_topology_independence(corpus_entry("tc_flood").program,
                                         {Network::single(), Network::path(3), Network::ring(4)},
                                         g, o);
    CHECK(v.result == Verdict::Pass);
    CHECK(v.networks == 3);
    CHECK(*v.output == tc_of(g));
  }
  for (const char* text : {"", "S(a)."}) {
    Instance i = parse_instance(text);
    auto v = check_topology_independence(corpus_entry("emptiness").program,
                                         {Network::single(), Network::ring(4)}, i, o);
    CHECK(v.result == Verdict::Pass);
    CHECK(*v.output == oracles::emptiness(i.find("S") ? *i.find("S") : Relation(1)));
  }
  CHECK_THROWS_AS(check_topology_independence(corpus_entry("tc_flood").program,
                                              {Network::ring(4)}, Instance{}, o),
                  PreconditionError);
  CHECK_THROWS_AS(check_topology_independence(corpus_entry("tc_flood").program,
                                              {Network::path(2), Network::ring(4)}, Instance{}, o),
                  PreconditionError);
}

TEST_CASE("coordination-freeness checks") {
  Network two = Network::path(2);
  {
    Instance g = parse_instance("S(1,2). S(2,3).");
    CheckOptions o;
    o.partitions = {full_replication(g, two.nodes())};
    auto v = check_coordination_free(corpus_entry("tc_flood").program, two, g, tc_of(g), o);
    CHECK(v.result == Verdict::WitnessFound);
    CHECK(v.exit_code() == 0);
  }
  {
    CheckOptions o;
    o.partition_mode = PartitionMode::Exhaustive;
    auto v = check_coordination_free(corpus_entry("emptiness").program, two, Instance{},
                                     Relation(0, {Tuple{}}), o);
    CHECK(v.result == Verdict::NoWitness);
    CHECK(v.partitions == 1);
    CHECK(v.exit_code() == 1);
  }
  {
    Instance i = parse_instance("A(a). B(b).");
    const auto& p = corpus_entry("a_or_b_nonempty").program;
    Relation yes(0, {Tuple{}});
    CheckOptions split;
    split.partitions = {{{E("1"), parse_instance("A(a).")}, {E("2"), parse_instance("B(b).")}}};
    CHECK(check_coordination_free(p, two, i, yes, split).result == Verdict::WitnessFound);
    CheckOptions full;
    full.partitions = {full_replication(i, two.nodes())};
    CHECK(check_coordination_free(p, two, i, yes, full).result == Verdict::NoWitness);
    CHECK(heartbeat_only_output(p, two, full_replication(i, two.nodes())).empty());
  }
  {
    Instance i = parse_instance("S(a). S(b).");
    const auto& e = corpus_entry("identity_ping");
    CheckOptions o;
    o.partition_mode = PartitionMode::Exhaustive;
    auto v = check_coordination_free(e.program, two, i, (*e.oracle)(i), o);
    CHECK(v.result == Verdict::NoWitness);
    CHECK(v.partitions == 9);
  }
}

TEST_CASE("monotonicity checks") {
  CheckOptions o;
  o.budget = 10;
  std::mt19937_64 rng(6);
  {
    std::vector<InstancePair> pairs;
    for (int k = 0; k < 4; ++k) {
      Instance j = relnet::testing::edges_instance(relnet::testing::random_graph(rng, 4, 4));
      pairs.emplace_back(relnet::testing::random_subset(rng, j), j);
    }
    CHECK(check_monotone(corpus_entry("tc_flood").program, Network::path(2), pairs, o).result ==
          Verdict::Pass);
    CHECK(check_monotone(*corpus_entry("tc_flood").oracle, pairs).result == Verdict::Pass);
  }
  {
    std::vector<InstancePair> pairs{{Instance{}, parse_instance("S(a).")}};
    auto v = check_monotone(corpus_entry("emptiness").program, Network::path(2), pairs, o);
    CHECK(v.result == Verdict::Fail);
    CHECK(check_monotone(*corpus_entry("emptiness").oracle, pairs).result == Verdict::Fail);
  }
  {
    const auto& e = corpus_entry("identity_ping");
    std::vector<InstancePair> pairs{{parse_instance("S(a)."), parse_instance("S(a). S(b).")},
                                    {Instance{}, parse_instance("S(c).")}};
    CHECK(check_monotone(e.program, Network::path(2), pairs, o).result == Verdict::Pass);
  }
  CHECK_THROWS_AS(check_monotone(*corpus_entry("tc_flood").oracle,
                                 {{parse_instance("S(1,2)."), Instance{}}}),
                  PreconditionError);
}

TEST_CASE("adversarial extension") {
  const auto& p = corpus_entry("tc_flood").program;
  Instance i = parse_instance("S(1,2). S(2,3).");
  Instance j = parse_instance("S(1,2). S(2,3). S(3,4).");
  Tuple t{E("1"), E("3")};
  auto r = theorem4_adversarial_test(p, Network::path(2), i, j, t);
  CHECK(r.holds);
  CHECK(r.trace.cumulative_output.contains(t));
  CHECK(r.partition.at(r.node) == i);
  CHECK(r.script.size() == r.prefix_heartbeats);
  for (const auto& d : r.script) {
    CHECK(d.kind == StepKind::Heartbeat);
    CHECK(d.node == r.node);
  }
  for (const auto& [v, share] : r.partition) {
    if (v != r.node) CHECK(share == j);
  }
  CHECK(theorem4_adversarial_test(p, Network::ring(4), i, i, t).holds);
  CHECK_THROWS_AS(theorem4_adversarial_test(p, Network::path(2), j, i, t), PreconditionError);
  CHECK_THROWS_AS(theorem4_adversarial_test(p, Network::path(2), i, j, Tuple{E("3"), E("1")}),
                  PreconditionError);
}

TEST_CASE("ring replay") {
  Instance i = parse_instance("S(1,2). S(2,3).");
  Instance j = parse_instance("S(1,2). S(2,3). S(3,4). S(4,1).");
  for (const char* name : {"tc_flood", "flood_plain"}) {
    auto r = ring_fifo_replay(corpus_entry(name).program, i, j);
    CHECK_MESSAGE(r.holds, name << ": " << r.failure);
    CHECK(r.tuple.has_value());
    CHECK(r.rounds_compared >= r.round);
  }
  auto constant = parse_program(R"(
schema { in: S/1; msg: ; mem: ; out: 1 }
output { Out(x) :- Adom(x), x = x. }
)");
  auto c = ring_fifo_replay(constant, parse_instance("S(a)."), parse_instance("S(a). S(b)."));
  CHECK(c.holds);
  CHECK(c.round == 1);
  CHECK_THROWS_AS(ring_fifo_replay(corpus_entry("emptiness").program, Instance{}, Instance{}),
                  PreconditionError);
}

TEST_CASE("verdict json") {
  auto v = check_consistency(corpus_entry("first_element").program, Network::path(2),
                             parse_instance("S(a). S(b)."));
  std::string j = verdict_json(v);
  CHECK(j.find(R"("property":"consistency")") != std::string::npos);
  CHECK(j.find(R"("result":"fail")") != std::string::npos);
}

TEST_CASE("calm suite selection") {
  std::set<std::string> names;
  for (const auto* e : calm_suite_entries()) names.insert(e->name);
  CHECK(names == std::set<std::string>{"eq_select", "tc_flood", "flood_plain", "datalog_runner"});
}
