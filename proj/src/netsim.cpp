#include "relnet/netsim.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "lexer.hpp"

namespace relnet {

// ------------------------------------------------------------------ Network

Network Network::make(std::vector<DataElement> nodes, const std::vector<Edge>& edges) {
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  if (nodes.empty()) throw PreconditionError("a network needs at least one node");
  Network net;
  net.nodes_ = std::move(nodes);
  net.adjacency_.resize(net.nodes_.size());
  for (const auto& [a, b] : edges) {
    if (a == b) throw PreconditionError("self-loop at node " + a.name());
    std::size_t i = net.index(a);
    std::size_t j = net.index(b);
    net.adjacency_[i].push_back(b);
    net.adjacency_[j].push_back(a);
  }
  for (auto& adj : net.adjacency_) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  std::vector<bool> seen(net.nodes_.size(), false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    std::size_t i = stack.back();
    stack.pop_back();
    for (auto u : net.adjacency_[i]) {
      std::size_t j = net.index(u);
      if (!seen[j]) {
        seen[j] = true;
        stack.push_back(j);
      }
    }
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) {
      throw PreconditionError("network is not connected: node " +
                              net.nodes_[i].name() + " is unreachable");
    }
  }
  return net;
}

namespace {

std::vector<DataElement> numbered(std::size_t n) {
  std::vector<DataElement> out;
  for (std::size_t i = 1; i <= n; ++i) out.emplace_back(std::to_string(i));
  return out;
}

}  // namespace

Network Network::single() { return make(numbered(1), {}); }

Network Network::path(std::size_t n) {
  auto v = numbered(n);
  std::vector<Edge> edges;
  for (std::size_t i = 1; i < n; ++i) edges.emplace_back(v[i - 1], v[i]);
  return make(v, edges);
}

Network Network::ring(std::size_t n) {
  if (n < 3) return path(n);
  auto v = numbered(n);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) edges.emplace_back(v[i], v[(i + 1) % n]);
  return make(v, edges);
}

Network Network::complete(std::size_t n) {
  auto v = numbered(n);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(v[i], v[j]);
  }
  return make(v, edges);
}

bool Network::contains(DataElement v) const {
  return std::binary_search(nodes_.begin(), nodes_.end(), v);
}

std::size_t Network::index(DataElement v) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), v);
  if (it == nodes_.end() || *it != v) {
    throw PreconditionError("unknown node " + v.name());
  }
  return static_cast<std::size_t>(it - nodes_.begin());
}

const std::vector<DataElement>& Network::neighbors(DataElement v) const {
  return adjacency_[index(v)];
}

std::vector<Network::Edge> Network::edges() const {
  std::vector<Edge> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    for (auto u : adjacency_[i]) {
      if (nodes_[i] < u) out.emplace_back(nodes_[i], u);
    }
  }
  return out;
}

Network parse_network(std::string_view text) {
  detail::TokenStream ts(detail::tokenize(text));
  std::vector<DataElement> nodes;
  std::vector<Network::Edge> edges;
  while (!ts.at(detail::Tok::End)) {
    const auto& kw = ts.expect(detail::Tok::Word, "'node' or 'edge'");
    if (kw.text == "node") {
      nodes.emplace_back(ts.expect(detail::Tok::Word, "node name").text);
    } else if (kw.text == "edge") {
      DataElement a(ts.expect(detail::Tok::Word, "node name").text);
      const auto& second = ts.expect(detail::Tok::Word, "node name");
      DataElement b(second.text);
      if (a == b) detail::TokenStream::fail_at(second, "self-loop at node " + a.name());
      nodes.push_back(a);
      nodes.push_back(b);
      edges.emplace_back(a, b);
    } else {
      detail::TokenStream::fail_at(kw, "expected 'node' or 'edge', found '" + kw.text + "'");
    }
  }
  if (nodes.empty()) throw ParseError("network declares no nodes", 1, 1);
  return Network::make(std::move(nodes), edges);
}

std::string format_network(const Network& network) {
  std::string out;
  for (auto v : network.nodes()) out += "node " + v.name() + "\n";
  for (const auto& [a, b] : network.edges()) out += "edge " + a.name() + " " + b.name() + "\n";
  return out;
}

Instance partition_union(const HorizontalPartition& partition) {
  Instance out;
  for (const auto& [_, share] : partition) out.merge(share);
  return out;
}

// ------------------------------------------------------------ MessageBuffer

void MessageBuffer::push(Fact fact, std::size_t step) {
  ++counts_[fact];
  queue_.push_back(BufferedFact{std::move(fact), step});
}

std::size_t MessageBuffer::count(const Fact& fact) const {
  auto it = counts_.find(fact);
  return it == counts_.end() ? 0 : it->second;
}

BufferedFact MessageBuffer::take(const Fact& fact) {
  for (std::size_t i = 0; i < queue_.size(); ++i) {
    if (queue_[i].fact == fact) return take_at(i);
  }
  throw PreconditionError("fact " + to_string(fact) + " is not in the buffer");
}

BufferedFact MessageBuffer::take_at(std::size_t position) {
  if (position >= queue_.size()) {
    throw PreconditionError("buffer position out of range");
  }
  BufferedFact out = std::move(queue_[position]);
  queue_.erase(queue_.begin() + static_cast<std::ptrdiff_t>(position));
  auto it = counts_.find(out.fact);
  if (--it->second == 0) counts_.erase(it);
  return out;
}

bool Configuration::buffers_empty() const {
  return std::all_of(buf.begin(), buf.end(), [](const auto& kv) { return kv.second.empty(); });
}

Configuration make_initial(const TransducerProgram& program, const Network& network,
                           const HorizontalPartition& partition) {
  if (partition.size() != network.size() ||
      !std::all_of(partition.begin(), partition.end(),
                   [&](const auto& kv) { return network.contains(kv.first); })) {
    throw PreconditionError("partition node set differs from the network's nodes");
  }
  Configuration config;
  for (const auto& [v, share] : partition) {
    share.check_conforms(program.schema().input);
    config.state.emplace(v, LocalState(share, v, network.nodes()));
    config.buf.emplace(v, MessageBuffer{});
  }
  return config;
}

// -------------------------------------------------------------- transitions

namespace {

LocalState& state_of(Configuration& config, DataElement node) {
  auto it = config.state.find(node);
  if (it == config.state.end()) throw PreconditionError("unknown node " + node.name());
  return it->second;
}

NetTransition transition(const TransducerProgram& program, const Network& network,
                         Configuration& config, DataElement node,
                         std::optional<Fact> received, std::size_t now) {
  LocalState& st = state_of(config, node);
  Instance rcv;
  if (received) rcv.add(*received);
  StepEffects fx = advance(program, st, rcv);
  if (!fx.sent.empty()) {
    const auto facts = fx.sent.facts();
    for (auto u : network.neighbors(node)) {
      auto& b = config.buf[u];
      for (const auto& f : facts) b.push(f, now);
    }
  }
  return NetTransition{received ? StepKind::Delivery : StepKind::Heartbeat, node,
                       std::move(received), std::move(fx.output), std::move(fx.sent)};
}

}  // namespace

NetTransition apply_heartbeat(const TransducerProgram& program, const Network& network,
                              Configuration& config, DataElement node, std::size_t now) {
  return transition(program, network, config, node, std::nullopt, now);
}

NetTransition apply_delivery(const TransducerProgram& program, const Network& network,
                             Configuration& config, DataElement node, const Fact& fact,
                             std::size_t now) {
  state_of(config, node);
  BufferedFact taken = config.buf[node].take(fact);
  return transition(program, network, config, node, std::move(taken.fact), now);
}

NetTransition apply_delivery_at(const TransducerProgram& program, const Network& network,
                                Configuration& config, DataElement node,
                                std::size_t position, std::size_t now) {
  state_of(config, node);
  BufferedFact taken = config.buf[node].take_at(position);
  return transition(program, network, config, node, std::move(taken.fact), now);
}

std::pair<Configuration, NetTransition> heartbeat(const TransducerProgram& program,
                                                  const Network& network,
                                                  const Configuration& config,
                                                  DataElement node) {
  Configuration next = config;
  NetTransition t = apply_heartbeat(program, network, next, node);
  return {std::move(next), std::move(t)};
}

std::pair<Configuration, NetTransition> delivery(const TransducerProgram& program,
                                                 const Network& network,
                                                 const Configuration& config,
                                                 DataElement node, const Fact& fact) {
  Configuration next = config;
  NetTransition t = apply_delivery(program, network, next, node, fact);
  return {std::move(next), std::move(t)};
}

bool detect_quiescence(const TransducerProgram& program, const Network& network,
                       const Configuration& config, const Relation& already_output,
                       std::size_t max_iterations) {
  if (!config.buffers_empty()) return false;
  const Instance none;
  for (const auto& [v, start] : config.state) {
    const bool has_neighbors = !network.neighbors(v).empty();
    LocalState s = start;
    std::set<LocalState> seen{s};
    bool cycled = false;
    for (std::size_t i = 0; i < max_iterations; ++i) {
      StepEffects fx = advance(program, s, none);
      if (!fx.output.empty() && !fx.output.subset_of(already_output)) return false;
      if (has_neighbors && !fx.sent.empty()) return false;
      if (!seen.insert(s).second) {
        cycled = true;
        break;
      }
    }
    if (!cycled) return false;
  }
  return true;
}

// --------------------------------------------------------------- schedulers

RandomFairScheduler::RandomFairScheduler(std::uint64_t seed, std::size_t heartbeat_period,
                                         std::size_t delivery_bound)
    : rng_(seed), period_(heartbeat_period), delivery_bound_(delivery_bound) {
  if (period_ < 2) throw PreconditionError("heartbeat period must be at least 2");
  if (delivery_bound_ < 1) throw PreconditionError("delivery bound must be positive");
}

std::optional<Action> RandomFairScheduler::next(const Network& network,
                                                const Configuration& config,
                                                std::size_t step) {
  const auto& nodes = network.nodes();
  const std::size_t n = nodes.size();
  if (last_heartbeat_.size() != n) last_heartbeat_.assign(n, 0);

  auto heartbeat_at = [&](std::size_t i) {
    last_heartbeat_[i] = step + 1;
    return Action{StepKind::Heartbeat, nodes[i], std::nullopt, std::nullopt};
  };

  // gap = steps since the previous heartbeat (a node that never
  // heartbeated counts from a virtual heartbeat at step -1)
  const std::size_t threshold = period_ * n - n + 1;
  std::size_t overdue = n;
  std::size_t worst = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t gap = step + 1 - last_heartbeat_[i];
    if (gap >= threshold && gap > worst) {
      worst = gap;
      overdue = i;
    }
  }
  if (overdue < n) return heartbeat_at(overdue);

  std::optional<std::size_t> oldest_node;
  std::size_t oldest_time = 0;
  std::vector<std::size_t> nonempty;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& b = config.buf.at(nodes[i]);
    if (b.empty()) continue;
    nonempty.push_back(i);
    std::size_t t = b.queue().front().enqueued;
    if (!oldest_node || t < oldest_time) {
      oldest_node = i;
      oldest_time = t;
    }
  }
  if (oldest_node && step - oldest_time >= delivery_bound_) {
    return Action{StepKind::Delivery, nodes[*oldest_node], std::nullopt, std::size_t{0}};
  }

  std::uniform_int_distribution<std::size_t> pick(0, n + nonempty.size() - 1);
  std::size_t choice = pick(rng_);
  if (choice < n) return heartbeat_at(choice);
  DataElement v = nodes[nonempty[choice - n]];
  std::uniform_int_distribution<std::size_t> pos(0, config.buf.at(v).size() - 1);
  return Action{StepKind::Delivery, v, std::nullopt, pos(rng_)};
}

std::size_t RoundRobinFifoScheduler::round_length(const Network& network) const {
  return 2 * (participants_.empty() ? network.size() : participants_.size());
}

std::optional<Action> RoundRobinFifoScheduler::next(const Network& network,
                                                    const Configuration& config,
                                                    std::size_t) {
  const auto& order = participants_.empty() ? network.nodes() : participants_;
  const std::size_t k = order.size();
  const std::size_t pos = cursor_++ % (2 * k);
  if (pos < k) return Action{StepKind::Heartbeat, order[pos], std::nullopt, std::nullopt};
  DataElement v = order[pos - k];
  if (config.buf.at(v).empty()) {
    return Action{StepKind::Heartbeat, v, std::nullopt, std::nullopt};
  }
  return Action{StepKind::Delivery, v, std::nullopt, std::size_t{0}};
}

std::vector<Directive> parse_script(std::string_view text) {
  std::vector<Directive> out;
  std::istringstream lines{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (auto c = line.find_first_of("%#"); c != std::string::npos) line.erase(c);
    std::istringstream words(line);
    std::string kw, node, tail;
    if (!(words >> kw)) continue;
    if (!(words >> node)) throw ParseError("directive needs a node", line_no, 1);
    std::getline(words, tail);
    if (kw == "hb") {
      if (tail.find_first_not_of(" \t\r") != std::string::npos) {
        throw ParseError("unexpected text after 'hb <node>'", line_no, 1);
      }
      out.push_back(Directive{StepKind::Heartbeat, DataElement(node), std::nullopt});
    } else if (kw == "dlv") {
      Fact f;
      try {
        f = parse_fact(tail);
      } catch (const ParseError& e) {
        throw ParseError(std::string("bad fact in 'dlv': ") + e.what(), line_no, 1);
      }
      out.push_back(Directive{StepKind::Delivery, DataElement(node), std::move(f)});
    } else {
      throw ParseError("expected 'hb' or 'dlv', found '" + kw + "'", line_no, 1);
    }
  }
  return out;
}

std::string format_script(const std::vector<Directive>& script) {
  std::string out;
  for (const auto& d : script) {
    if (d.kind == StepKind::Heartbeat) {
      out += "hb " + d.node.name() + "\n";
    } else {
      out += "dlv " + d.node.name() + " " + to_string(*d.fact) + "\n";
    }
  }
  return out;
}

std::optional<Action> ScriptedScheduler::next(const Network& network,
                                              const Configuration& config,
                                              std::size_t step) {
  if (cursor_ < script_.size()) {
    const Directive& d = script_[cursor_++];
    return Action{d.kind, d.node, d.fact, std::nullopt};
  }
  if (continuation_) return continuation_->next(network, config, step);
  return std::nullopt;
}

// --------------------------------------------------------------------- runs

RunTrace run(const TransducerProgram& program, const Network& network,
             const Configuration& initial, Scheduler& scheduler,
             const RunOptions& options) {
  RunTrace trace;
  if (options.keep_initial) trace.initial = initial;
  Configuration config = initial;
  trace.cumulative_output = Relation(program.schema().output_arity);
  std::size_t last_new = 0;
  for (std::size_t step = 0;; ++step) {
    if (options.detect_quiescence && config.buffers_empty() &&
        detect_quiescence(program, network, config, trace.cumulative_output)) {
      trace.quiescence_index = last_new;
      break;
    }
    if (step == options.max_steps) break;
    std::optional<Action> action = scheduler.next(network, config, step);
    if (!action) break;
    if (!network.contains(action->node)) {
      throw PreconditionError("step " + std::to_string(step) + ": unknown node " +
                              action->node.name());
    }
    NetTransition t;
    if (action->kind == StepKind::Heartbeat) {
      t = apply_heartbeat(program, network, config, action->node, step);
    } else if (action->fact) {
      if (config.buf.at(action->node).count(*action->fact) == 0) {
        throw PreconditionError("step " + std::to_string(step) + ": " +
                                to_string(*action->fact) + " is not buffered at node " +
                                action->node.name());
      }
      t = apply_delivery(program, network, config, action->node, *action->fact, step);
    } else {
      t = apply_delivery_at(program, network, config, action->node,
                            action->position.value_or(0), step);
    }
    if (!t.output.empty()) {
      std::size_t before = trace.cumulative_output.size();
      trace.cumulative_output.merge(t.output);
      if (trace.cumulative_output.size() > before) last_new = step + 1;
    }
    ++trace.length;
    if (options.record_steps) trace.steps.push_back(std::move(t));
  }
  trace.final = std::move(config);
  return trace;
}

std::map<DataElement, Relation> outputs_by_node(const RunTrace& trace,
                                                std::size_t output_arity) {
  std::map<DataElement, Relation> out;
  for (auto& [v, _] : trace.final.state) out.emplace(v, Relation(output_arity));
  for (const auto& t : trace.steps) {
    auto it = out.try_emplace(t.node, Relation(output_arity)).first;
    it->second.merge(t.output);
  }
  return out;
}

}  // namespace relnet
