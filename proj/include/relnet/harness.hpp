#pragma once

// Budgeted empirical checks over partitions, schedules and networks:
// consistency, network-topology independence, coordination-freeness,
// monotonicity, plus the adversarial and ring-replay constructions.
// A pass means no counterexample was found within the budget.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "relnet/corpus.hpp"
#include "relnet/netsim.hpp"

namespace relnet {

// ---------------------------------------------------------------- partitions

enum class PartitionMode { Auto, Exhaustive, Sample };

struct PartitionOptions {
  std::size_t budget = 1000;   // maximum number of partitions
  PartitionMode mode = PartitionMode::Auto;
  std::size_t samples = 8;     // random draws in sampling mode
  std::uint64_t seed = 0;
};

/// (2^nodes - 1)^facts, saturating at SIZE_MAX.
std::size_t partition_count(std::size_t facts, std::size_t nodes);

HorizontalPartition full_replication(const Instance& instance,
                                     const std::vector<DataElement>& nodes);
/// Fact i (canonical order) goes to node i mod n.
HorizontalPartition round_robin_partition(const Instance& instance,
                                          const std::vector<DataElement>& nodes);
/// Everything at `at` (default: the first node).
HorizontalPartition one_node_partition(const Instance& instance,
                                       const std::vector<DataElement>& nodes,
                                       std::optional<DataElement> at = std::nullopt);
/// Every fact to a uniformly random nonempty set of nodes.
HorizontalPartition random_partition(const Instance& instance,
                                     const std::vector<DataElement>& nodes,
                                     std::uint64_t seed);

/// Exhaustive mode: every assignment of each fact to a nonempty node subset,
/// exactly once (PreconditionError when over budget). Sampling mode: the
/// three canonical partitions followed by distinct seeded draws. Auto picks
/// exhaustive when it fits the budget.
std::vector<HorizontalPartition> enumerate_partitions(const Instance& instance,
                                                      const std::vector<DataElement>& nodes,
                                                      const PartitionOptions& options = {});

/// `node v { R(a,b). ... }` blocks.
HorizontalPartition parse_partition(std::string_view text);
std::string format_partition(const HorizontalPartition& partition);

// ------------------------------------------------------------------- verdicts

enum class Property { Consistency, TopologyIndependence, CoordinationFree, Monotone };
enum class Verdict { Pass, Fail, WitnessFound, NoWitness, Inconclusive };

std::string_view to_string(Property p);
std::string_view to_string(Verdict v);

/// One reproducible observation: enough to replay the run.
struct Evidence {
  std::string label;
  std::optional<Network> network;
  HorizontalPartition partition;
  Instance instance;
  std::string schedule;  // "random-fair:<seed>", "round-robin-fifo", "heartbeat-only"
  Relation output;
  bool quiescent = true;
  std::size_t steps = 0;
};

struct CheckVerdict {
  Property property = Property::Consistency;
  Verdict result = Verdict::Pass;
  std::vector<Evidence> evidence;
  std::size_t cells = 0;
  std::size_t partitions = 0;
  std::size_t schedules = 0;
  std::size_t networks = 0;
  std::size_t inconclusive_cells = 0;
  /// The agreed output when every conclusive cell agreed.
  std::optional<Relation> output;
  std::string note;

  /// 0 for pass / witness-found, 1 for fail / no-witness, 2 for inconclusive.
  int exit_code() const noexcept;
};

std::string verdict_json(const CheckVerdict& verdict);

// ---------------------------------------------------------------- the checks

struct CheckOptions {
  std::size_t budget = 100;      // maximum cells (partition x schedule) per network
  std::size_t schedules = 5;     // schedules per partition; the first is round-robin fifo
  std::uint64_t seed = 0;
  std::size_t max_steps = 20000;
  PartitionMode partition_mode = PartitionMode::Auto;
  std::size_t heartbeat_period = 4;
  std::size_t delivery_bound = 64;
  std::size_t jobs = 1;
  /// Explicit partitions replace enumeration when nonempty.
  std::vector<HorizontalPartition> partitions;
};

/// Runs every (partition, schedule) cell; pass iff all quiescent outputs
/// agree. Cells that hit max_steps are counted as inconclusive.
CheckVerdict check_consistency(const TransducerProgram& program, const Network& network,
                               const Instance& instance, const CheckOptions& options = {});

/// Requires at least two networks, one of them single-node.
CheckVerdict check_topology_independence(const TransducerProgram& program,
                                         const std::vector<Network>& networks,
                                         const Instance& instance,
                                         const CheckOptions& options = {});

/// Union of outputs when every node performs heartbeats only, each until
/// its local state repeats.
Relation heartbeat_only_output(const TransducerProgram& program, const Network& network,
                               const HorizontalPartition& partition,
                               std::size_t max_iterations = 10000);

/// Searches partitions for one whose heartbeat-only output equals
/// `expected` (the intended query's answer on `instance`).
CheckVerdict check_coordination_free(const TransducerProgram& program,
                                     const Network& network, const Instance& instance,
                                     const Relation& expected,
                                     const CheckOptions& options = {});

/// No-witness as soon as one instance of the family has no witness.
CheckVerdict check_coordination_free_family(const TransducerProgram& program,
                                            const Network& network,
                                            const std::vector<Instance>& instances,
                                            const Oracle& oracle,
                                            const CheckOptions& options = {});

using InstancePair = std::pair<Instance, Instance>;

/// Evaluates the distributed query on I and J (through consistency checks
/// on `network`) and fails on the first pair with Q(I) not within Q(J).
CheckVerdict check_monotone(const TransducerProgram& program, const Network& network,
                            const std::vector<InstancePair>& pairs,
                            const CheckOptions& options = {});

/// Same over a direct oracle.
CheckVerdict check_monotone(const Oracle& oracle, const std::vector<InstancePair>& pairs);

struct AdversarialResult {
  bool holds = false;
  DataElement node;                 // where t is produced heartbeat-only
  std::size_t prefix_heartbeats = 0;
  std::vector<Directive> script;
  HorizontalPartition partition;    // H'
  RunTrace trace;
};

/// With H the full replication of I on `network` (at least two nodes),
/// find a node v producing t heartbeat-only; give v the same share, every
/// other node its share plus J \ I, replay v's heartbeats as a script,
/// extend fairly and require t in the output. PreconditionError when I is
/// not within J or t is not produced heartbeat-only.
AdversarialResult theorem4_adversarial_test(const TransducerProgram& program,
                                            const Network& network, const Instance& I,
                                            const Instance& J, const Tuple& t,
                                            const CheckOptions& options = {});

struct RingReplayResult {
  bool holds = false;
  std::optional<Tuple> tuple;       // first output of node 1 on the ring
  std::size_t round = 0;            // round in which it appeared (1-based)
  std::size_t rounds_compared = 0;
  std::string failure;
};

/// Round-robin fifo run on the ring 1-2-3-4-1 with I everywhere, then on
/// the ring plus chord 2-4 with J \ I at node 3, which never moves. Nodes
/// 1, 2 and 4 must match state and buffer order after every round, and
/// node 1 must still output the tuple. PreconditionError for programs
/// that use Id.
RingReplayResult ring_fifo_replay(const TransducerProgram& program, const Instance& I,
                                  const Instance& J, std::size_t max_rounds = 500);

/// `facts` distinct random facts over `schema` with elements drawn from
/// the first `domain` of 1, 2, 3, ...
Instance random_instance(const DatabaseSchema& schema, std::size_t facts,
                         std::size_t domain, std::uint64_t seed);

/// Corpus entries the CALM suite covers: oblivious, with an oracle, and
/// passing a topology-independence probe on a small random instance.
std::vector<const CorpusEntry*> calm_suite_entries(const CheckOptions& options = {});

}  // namespace relnet
