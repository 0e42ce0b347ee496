#pragma once

// Transducer networks: topology, configurations with multiset message
// buffers, heartbeat and delivery transitions, schedulers and runs.

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "relnet/relcore.hpp"
#include "relnet/transducer.hpp"

namespace relnet {

/// Finite, connected, undirected graph without self-loops. Nodes and
/// adjacency lists are kept in canonical element order.
class Network {
 public:
  using Edge = std::pair<DataElement, DataElement>;

  static Network make(std::vector<DataElement> nodes, const std::vector<Edge>& edges);

  /// Nodes named 1..n.
  static Network single();
  static Network path(std::size_t n);
  static Network ring(std::size_t n);
  static Network complete(std::size_t n);

  const std::vector<DataElement>& nodes() const noexcept { return nodes_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  bool contains(DataElement v) const;
  std::size_t index(DataElement v) const;  // throws PreconditionError
  const std::vector<DataElement>& neighbors(DataElement v) const;
  std::vector<Edge> edges() const;  // each edge once, endpoints ordered

  friend bool operator==(const Network&, const Network&) = default;

 private:
  std::vector<DataElement> nodes_;
  std::vector<std::vector<DataElement>> adjacency_;
};

/// Lines `node a` and `edge a b`; `%`/`#` comments. Edge endpoints are
/// declared implicitly.
Network parse_network(std::string_view text);
std::string format_network(const Network& network);

/// Maps every node to its share of the global input.
using HorizontalPartition = std::map<DataElement, Instance>;

Instance partition_union(const HorizontalPartition& partition);

struct BufferedFact {
  Fact fact;
  std::size_t enqueued;  // run step at which it was sent

  friend bool operator==(const BufferedFact&, const BufferedFact&) = default;
};

/// A multiset of facts that also remembers arrival order, so the same
/// buffer serves random delivery and fifo replay.
class MessageBuffer {
 public:
  void push(Fact fact, std::size_t step);
  bool empty() const noexcept { return queue_.empty(); }
  std::size_t size() const noexcept { return queue_.size(); }
  std::size_t count(const Fact& fact) const;
  const std::deque<BufferedFact>& queue() const noexcept { return queue_; }
  const std::map<Fact, std::size_t>& multiset() const noexcept { return counts_; }

  /// Removes the oldest occurrence of `fact`; PreconditionError if absent.
  BufferedFact take(const Fact& fact);
  BufferedFact take_at(std::size_t position);

  /// Multiset equality (arrival order ignored).
  friend bool operator==(const MessageBuffer& a, const MessageBuffer& b) {
    return a.counts_ == b.counts_;
  }

 private:
  std::deque<BufferedFact> queue_;
  std::map<Fact, std::size_t> counts_;
};

struct Configuration {
  std::map<DataElement, LocalState> state;
  std::map<DataElement, MessageBuffer> buf;

  bool buffers_empty() const;

  friend bool operator==(const Configuration&, const Configuration&) = default;
};

/// Every node starts with its share of the input, Id = {v}, All = nodes,
/// empty memory and an empty buffer. Throws PreconditionError when the
/// partition's node set differs from the network's or SchemaError when a
/// share does not conform to the input schema.
Configuration make_initial(const TransducerProgram& program, const Network& network,
                           const HorizontalPartition& partition);

enum class StepKind { Heartbeat, Delivery };

struct NetTransition {
  StepKind kind;
  DataElement node;
  std::optional<Fact> received;
  Relation output;
  Instance sent;

  friend bool operator==(const NetTransition&, const NetTransition&) = default;
};

/// In-place transitions; `now` stamps the enqueued messages.
NetTransition apply_heartbeat(const TransducerProgram& program, const Network& network,
                              Configuration& config, DataElement node,
                              std::size_t now = 0);
NetTransition apply_delivery(const TransducerProgram& program, const Network& network,
                             Configuration& config, DataElement node,
                             const Fact& fact, std::size_t now = 0);
NetTransition apply_delivery_at(const TransducerProgram& program, const Network& network,
                                Configuration& config, DataElement node,
                                std::size_t position, std::size_t now = 0);

/// Pure variants.
std::pair<Configuration, NetTransition> heartbeat(const TransducerProgram& program,
                                                  const Network& network,
                                                  const Configuration& config,
                                                  DataElement node);
std::pair<Configuration, NetTransition> delivery(const TransducerProgram& program,
                                                 const Network& network,
                                                 const Configuration& config,
                                                 DataElement node, const Fact& fact);

/// True iff all buffers are empty and, at every node, iterating heartbeats
/// from its current state revisits a state without producing output
/// outside `already_output` and (when the node has neighbors) without
/// sending anything. Gives up (false) after `max_iterations` heartbeats at
/// a single node.
bool detect_quiescence(const TransducerProgram& program, const Network& network,
                       const Configuration& config, const Relation& already_output,
                       std::size_t max_iterations = 10000);

// ---------------------------------------------------------------- scheduling

struct Action {
  StepKind kind;
  DataElement node;
  std::optional<Fact> fact;              // scripted delivery of a named fact
  std::optional<std::size_t> position;   // delivery of the queue entry at this index

  friend bool operator==(const Action&, const Action&) = default;
};

class Scheduler {
 public:
  virtual ~Scheduler() = default;
  /// The next transition to take, or nullopt when the schedule has ended.
  /// Called once per executed step.
  virtual std::optional<Action> next(const Network& network, const Configuration& config,
                                     std::size_t step) = 0;
};

/// Uniform choice among all heartbeats and one delivery option per
/// nonempty buffer (uniform occurrence within it), with two overrides that
/// make every prefix fair: a node that has not heartbeated for
/// p·n − n + 1 steps is forced (most overdue first), which bounds the gap
/// between its heartbeats by p·n; otherwise the oldest buffered occurrence
/// is forced once it has waited `delivery_bound` steps.
class RandomFairScheduler final : public Scheduler {
 public:
  explicit RandomFairScheduler(std::uint64_t seed, std::size_t heartbeat_period = 4,
                               std::size_t delivery_bound = 64);
  std::optional<Action> next(const Network& network, const Configuration& config,
                             std::size_t step) override;

  std::size_t heartbeat_period() const noexcept { return period_; }
  std::size_t delivery_bound() const noexcept { return delivery_bound_; }

 private:
  std::mt19937_64 rng_;
  std::size_t period_;
  std::size_t delivery_bound_;
  std::vector<std::size_t> last_heartbeat_;  // step + 1, 0 = never
};

/// Rounds over the participating nodes (all by default) in canonical
/// order: a heartbeat at every node, then at every node a delivery of the
/// first-in fact or, if its buffer is empty, a second heartbeat.
class RoundRobinFifoScheduler final : public Scheduler {
 public:
  RoundRobinFifoScheduler() = default;
  explicit RoundRobinFifoScheduler(std::vector<DataElement> participants)
      : participants_(std::move(participants)) {}
  std::optional<Action> next(const Network& network, const Configuration& config,
                             std::size_t step) override;

  /// Steps per round for the given network.
  std::size_t round_length(const Network& network) const;

 private:
  std::vector<DataElement> participants_;
  std::size_t cursor_ = 0;
};

struct Directive {
  StepKind kind;
  DataElement node;
  std::optional<Fact> fact;

  friend bool operator==(const Directive&, const Directive&) = default;
};

/// Lines `hb <node>` and `dlv <node> <fact>`.
std::vector<Directive> parse_script(std::string_view text);
std::string format_script(const std::vector<Directive>& script);

/// Replays a script, then hands over to `continuation` (if any).
class ScriptedScheduler final : public Scheduler {
 public:
  explicit ScriptedScheduler(std::vector<Directive> script,
                             std::unique_ptr<Scheduler> continuation = nullptr)
      : script_(std::move(script)), continuation_(std::move(continuation)) {}
  std::optional<Action> next(const Network& network, const Configuration& config,
                             std::size_t step) override;

 private:
  std::vector<Directive> script_;
  std::size_t cursor_ = 0;
  std::unique_ptr<Scheduler> continuation_;
};

// ----------------------------------------------------------------------- runs

struct RunTrace {
  Configuration initial;
  std::vector<NetTransition> steps;
  Configuration final;
  Relation cumulative_output;
  std::size_t length = 0;  // executed steps, recorded or not
  /// Set when quiescence was detected: the length of the shortest prefix
  /// whose outputs already make up the cumulative output.
  std::optional<std::size_t> quiescence_index;

  bool quiescent() const noexcept { return quiescence_index.has_value(); }
};

struct RunOptions {
  std::size_t max_steps = 10000;
  bool detect_quiescence = true;
  bool record_steps = true;
  bool keep_initial = true;
};

/// Executes scheduler actions until quiescence is detected (checked
/// whenever every buffer is empty), the schedule ends, or max_steps.
/// Throws PreconditionError when a scripted directive is not enabled.
RunTrace run(const TransducerProgram& program, const Network& network,
             const Configuration& initial, Scheduler& scheduler,
             const RunOptions& options = {});

/// Per-node output: the tuples each node produced.
std::map<DataElement, Relation> outputs_by_node(const RunTrace& trace,
                                                std::size_t output_arity);

enum class TraceFormat { Text, Jsonl };

/// One line per transition plus a trailer with the cumulative output and
/// quiescence index.
std::string format_trace(const RunTrace& trace, TraceFormat format);
std::string format_transition(const NetTransition& t, std::size_t index,
                              TraceFormat format);

}  // namespace relnet
