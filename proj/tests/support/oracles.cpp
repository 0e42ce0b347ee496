#include "support/oracles.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

namespace relnet::testing {

bool truth_table(bool in_old, bool in_ins, bool in_del) {
  // old ins del -> new
  if (!in_old && !in_ins && !in_del) return false;
  if (!in_old && !in_ins && in_del) return false;
  if (!in_old && in_ins && !in_del) return true;
  if (!in_old && in_ins && in_del) return false;  // conflict on an absent tuple
  if (in_old && !in_ins && !in_del) return true;  // untouched
  if (in_old && !in_ins && in_del) return false;
  if (in_old && in_ins && !in_del) return true;
  return true;                                    // conflict on a present tuple
}

Relation bfs_reachability(const Relation& edges) {
  std::map<DataElement, std::vector<DataElement>> succ;
  for (const auto& t : edges) succ[t[0]].push_back(t[1]);
  Relation out(2);
  for (const auto& [src, _] : succ) {
    std::set<DataElement> seen;
    std::deque<DataElement> queue{src};
    while (!queue.empty()) {
      DataElement u = queue.front();
      queue.pop_front();
      auto it = succ.find(u);
      if (it == succ.end()) continue;
      for (DataElement w : it->second) {
        if (seen.insert(w).second) queue.push_back(w);
      }
    }
    for (DataElement w : seen) out.insert(Tuple{src, w});
  }
  return out;
}

namespace {

bool atom_holds(const Atom& a, const std::vector<DataElement>& val, const Instance& edb,
                const Instance& idb, const Relation& dom) {
  const Relation* r = nullptr;
  if (a.predicate == kAdom) {
    r = &dom;
  } else {
    r = idb.find(a.predicate);
    if (r == nullptr) r = edb.find(a.predicate);
  }
  if (r == nullptr) return false;
  for (const auto& row : *r) {
    bool match = row.size() == a.args.size();
    for (std::size_t i = 0; match && i < a.args.size(); ++i) {
      int v = a.args[i];
      if (v != kWildcard && row[i] != val[static_cast<std::size_t>(v)]) match = false;
    }
    if (match) return true;
  }
  return false;
}

}  // namespace

Instance naive_datalog(const std::vector<Rule>& rules, const Instance& edb) {
  std::vector<DataElement> dom_list;
  for (DataElement e : adom(edb)) dom_list.push_back(e);
  Relation dom(1);
  for (DataElement e : dom_list) dom.insert(Tuple{e});

  Instance idb;
  for (int round = 0; round < 10000; ++round) {
    Instance next;
    for (const auto& rule : rules) {
      const std::size_t k = rule.variables.size();
      std::vector<DataElement> val(k);
      std::vector<std::size_t> idx(k, 0);
      if (k > 0 && dom_list.empty()) continue;
      while (true) {
        for (std::size_t i = 0; i < k; ++i) val[i] = dom_list[idx[i]];
        bool ok = true;
        for (const auto& a : rule.positive) ok = ok && atom_holds(a, val, edb, idb, dom);
        for (const auto& a : rule.negative) ok = ok && !atom_holds(a, val, edb, idb, dom);
        for (const auto& c : rule.comparisons) {
          bool eq = val[static_cast<std::size_t>(c.lhs)] == val[static_cast<std::size_t>(c.rhs)];
          ok = ok && (c.negated ? !eq : eq);
        }
        if (ok) {
          Tuple t;
          for (int v : rule.head.args) t.push_back(val[static_cast<std::size_t>(v)]);
          next.add(rule.head.predicate, t);
        }
        std::size_t i = 0;
        while (i < k && ++idx[i] == dom_list.size()) idx[i++] = 0;
        if (i == k) break;
      }
    }
    if (next == idb) return idb;
    idb = std::move(next);
  }
  return idb;
}

Instance semi_naive_datalog(const std::vector<Rule>& rules, const Instance& edb) {
  std::set<std::string> idb_names;
  for (const auto& r : rules) idb_names.insert(r.head.predicate);
  const auto edb_dom = adom(edb);
  std::vector<DataElement> dom_list(edb_dom.begin(), edb_dom.end());
  Relation dom(1);
  for (DataElement e : dom_list) dom.insert(Tuple{e});

  Instance total;
  Instance delta;
  for (int round = 0;; ++round) {
    Instance fresh;
    for (const auto& rule : rules) {
      const std::size_t k = rule.variables.size();
      if (k > 0 && dom_list.empty()) continue;
      bool reads_idb = false;
      for (const auto& a : rule.positive) reads_idb = reads_idb || idb_names.contains(a.predicate);
      if (round > 0 && !reads_idb) continue;
      std::vector<DataElement> val(k);
      std::vector<std::size_t> idx(k, 0);
      while (true) {
        for (std::size_t i = 0; i < k; ++i) val[i] = dom_list[idx[i]];
        bool ok = true;
        bool touches_delta = round == 0;
        for (const auto& a : rule.positive) {
          if (idb_names.contains(a.predicate)) {
            ok = ok && atom_holds(a, val, Instance{}, total, dom);
            touches_delta = touches_delta || atom_holds(a, val, Instance{}, delta, dom);
          } else {
            ok = ok && atom_holds(a, val, edb, Instance{}, dom);
          }
        }
        for (const auto& c : rule.comparisons) {
          bool eq = val[static_cast<std::size_t>(c.lhs)] == val[static_cast<std::size_t>(c.rhs)];
          ok = ok && (c.negated ? !eq : eq);
        }
        if (ok && touches_delta) {
          Tuple t;
          for (int v : rule.head.args) t.push_back(val[static_cast<std::size_t>(v)]);
          Fact f{rule.head.predicate, t};
          if (!total.contains(f)) fresh.add(f);
        }
        std::size_t i = 0;
        while (i < k && ++idx[i] == dom_list.size()) idx[i++] = 0;
        if (i == k) break;
      }
    }
    if (fresh.empty()) return total;
    total.merge(fresh);
    delta = std::move(fresh);
  }
}

TmOutcome run_tm(const TuringMachine& m, const std::string& word, std::size_t max_steps) {
  std::vector<std::string> tape;
  for (char c : word) tape.emplace_back(1, c);
  if (tape.empty()) tape.push_back(m.blank);
  std::size_t head = 0;
  std::string state = m.start;
  for (std::size_t step = 0; step <= max_steps; ++step) {
    if (std::find(m.accepting.begin(), m.accepting.end(), state) != m.accepting.end()) {
      return TmOutcome::Accept;
    }
    auto it = m.delta.find({state, tape[head]});
    if (it == m.delta.end()) return TmOutcome::Reject;
    tape[head] = it->second.write;
    state = it->second.next_state;
    if (it->second.move == Move::Right) {
      ++head;
      if (head == tape.size()) tape.push_back(m.blank);
    } else if (it->second.move == Move::Left && head > 0) {
      --head;
    }
  }
  return TmOutcome::Running;
}

std::vector<std::string> words_of_length(const std::vector<char>& letters, std::size_t n) {
  std::vector<std::string> out{""};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> next;
    for (const auto& w : out) {
      for (char c : letters) next.push_back(w + c);
    }
    out = std::move(next);
  }
  return out;
}

Relation random_graph(std::mt19937_64& rng, std::size_t n, std::size_t edges) {
  Relation r(2);
  edges = std::min(edges, n * n);
  std::uniform_int_distribution<std::size_t> pick(1, n);
  while (r.size() < edges) {
    r.insert(Tuple{DataElement(std::to_string(pick(rng))), DataElement(std::to_string(pick(rng)))});
  }
  return r;
}

Instance edges_instance(const Relation& edges, const std::string& name) {
  Instance i;
  if (!edges.empty()) i.set(name, edges);
  return i;
}

Instance random_subset(std::mt19937_64& rng, const Instance& j) {
  Instance i;
  for (const auto& f : j.facts()) {
    if ((rng() & 1U) != 0) i.add(f);
  }
  return i;
}

std::vector<Network> connected_networks(std::size_t n) {
  std::vector<DataElement> nodes;
  for (std::size_t i = 1; i <= n; ++i) nodes.emplace_back(std::to_string(i));
  std::vector<Network::Edge> all;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) all.emplace_back(nodes[i], nodes[j]);
  }
  std::vector<Network> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << all.size()); ++mask) {
    std::vector<Network::Edge> edges;
    for (std::size_t k = 0; k < all.size(); ++k) {
      if ((mask >> k) & 1U) edges.push_back(all[k]);
    }
    // Connectivity by union-find over indices.
    std::vector<std::size_t> parent(n);
    for (std::size_t i = 0; i < n; ++i) parent[i] = i;
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (const auto& [a, b] : edges) {
      parent[find(std::stoul(a.name()) - 1)] = find(std::stoul(b.name()) - 1);
    }
    bool connected = true;
    for (std::size_t i = 1; i < n; ++i) connected = connected && find(i) == find(0);
    if (connected) out.push_back(Network::make(nodes, edges));
  }
  return out;
}

std::string random_positive_program(std::mt19937_64& rng, std::size_t max_rules) {
  auto uniform = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  const std::size_t nrules = uniform(1, max_rules);
  std::vector<std::string> heads{"A"};
  for (std::size_t i = 1; i < nrules; ++i) heads.push_back(uniform(0, 2) == 0 ? "B" : "A");
  bool has_b = std::find(heads.begin(), heads.end(), "B") != heads.end();

  struct Pred {
    std::string name;
    std::size_t arity;
  };
  std::vector<Pred> body_preds{{"E", 2}, {"U", 1}, {"A", 2}};
  if (has_b) body_preds.push_back({"B", 1});
  const std::vector<std::string> vars{"x", "y", "z"};

  std::string text;
  for (std::size_t r = 0; r < nrules; ++r) {
    std::size_t natoms = uniform(1, 3);
    std::vector<std::string> body;
    std::vector<std::string> used;
    for (std::size_t k = 0; k < natoms; ++k) {
      // The first atom of every rule reads an EDB relation so rules fire.
      const Pred& p = k == 0 ? body_preds[uniform(0, 1)] : body_preds[uniform(0, body_preds.size() - 1)];
      std::string atom = p.name + "(";
      for (std::size_t i = 0; i < p.arity; ++i) {
        const std::string& v = vars[uniform(0, vars.size() - 1)];
        if (std::find(used.begin(), used.end(), v) == used.end()) used.push_back(v);
        atom += (i > 0 ? "," : "") + v;
      }
      body.push_back(atom + ")");
    }
    if (used.size() >= 2 && uniform(0, 3) == 0) body.push_back(used[0] + " != " + used[1]);
    std::size_t harity = heads[r] == "A" ? 2 : 1;
    std::string head = heads[r] + "(";
    for (std::size_t i = 0; i < harity; ++i) {
      head += (i > 0 ? "," : "") + used[uniform(0, used.size() - 1)];
    }
    head += ")";
    text += head + " :- ";
    for (std::size_t i = 0; i < body.size(); ++i) text += (i > 0 ? ", " : "") + body[i];
    text += ".\n";
  }
  text += "?- A.\n";
  return text;
}

std::optional<std::string> audit_flood_acked(const TransducerProgram& program,
                                             const Network& network,
                                             const HorizontalPartition& partition,
                                             std::uint64_t seed, std::size_t max_steps) {
  Instance global;
  for (const auto& [_, share] : partition) global.merge(share);
  const Relation want = global.find("S") ? *global.find("S") : Relation(2);

  Configuration c = make_initial(program, network, partition);
  RandomFairScheduler sched(seed);
  for (std::size_t step = 0; step < max_steps; ++step) {
    std::size_t ready = 0;
    for (const auto& [v, st] : c.state) {
      if (st.find("Ready") == nullptr) continue;
      ++ready;
      const Relation* copy = st.find("Copy");
      if (!want.empty() && (copy == nullptr || !want.subset_of(*copy))) {
        return "node " + v.name() + " is Ready without the full instance at step " +
               std::to_string(step);
      }
    }
    if (ready == network.size()) return std::nullopt;
    Action a = *sched.next(network, c, step);
    if (a.kind == StepKind::Heartbeat) {
      apply_heartbeat(program, network, c, a.node, step);
    } else {
      apply_delivery_at(program, network, c, a.node, a.position.value_or(0), step);
    }
  }
  return "not every node became Ready within " + std::to_string(max_steps) + " steps";
}

}  // namespace relnet::testing
