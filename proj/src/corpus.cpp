#include "relnet/corpus.hpp"

#include <algorithm>
#include <set>

namespace relnet {

namespace {

constexpr std::string_view kEqSelect = R"(% Each node outputs the identical pairs of its own part of S.
schema { in: S/2; msg: ; mem: ; out: 2 }
output { Out(x,x) :- S(x,x). }
)";

constexpr std::string_view kTcFlood = R"(% Naive distributed transitive closure: flood S, close T locally.
schema { in: S/2; msg: M/2; mem: R/2, T/2; out: 2 }
send M {
  M(x,y) :- S(x,y), not R(x,y).
  M(x,y) :- M(x,y), not R(x,y).
}
insert R {
  R(x,y) :- S(x,y).
  R(x,y) :- M(x,y).
}
insert T {
  T(x,y) :- S(x,y).
  T(x,y) :- R(x,y).
  T(x,y) :- T(x,y).
  T(x,y) :- T(x,z), T(z,y).
}
output { Out(x,y) :- T(x,y). }
)";

constexpr std::string_view kFirstElement = R"(% Sends its elements once, then outputs whatever arrives first.
schema { in: S/1; msg: M/1; mem: Sent/0, Done/0; out: 1 }
send M { M(x) :- S(x), not Sent(). }
insert Sent { Sent(). }
insert Done { Done() :- M(_). }
output { Out(x) :- M(x), not Done(). }
)";

constexpr std::string_view kFwdIdentity = R"(% Outputs only elements it receives; forwards each new one once.
schema { in: S/1; msg: M/1; mem: Sent/0, Seen/1; out: 1 }
send M {
  M(x) :- S(x), not Sent().
  M(x) :- M(x), not Seen(x).
}
insert Sent { Sent(). }
insert Seen { Seen(x) :- M(x). }
output { Out(x) :- M(x). }
)";

constexpr std::string_view kEmptiness = R"(% A node whose S is empty announces its identifier; true once every
% node of All is known to be empty.
schema { in: S/1; msg: E/1; mem: Sent/0, Known/1; out: 0 }
send E {
  E(v) :- Id(v), not S(_), not Sent().
  E(v) :- E(v), not Known(v).
}
insert Sent { Sent(). }
insert Known {
  Known(v) :- Id(v), not S(_).
  Known(v) :- E(v).
}
output {
  Have(v) :- Known(v).
  Have(v) :- Id(v), not S(_).
  Have(v) :- E(v).
  Missing() :- All(v), not Have(v).
  Out() :- not Missing().
}
)";

constexpr std::string_view kAOrB = R"(% True iff A or B is nonempty. A node that sees exactly one of them
% (or is alone) answers directly; a node seeing both asks a neighbor.
schema { in: A/1, B/1; msg: Yes/0; mem: Sent/0; out: 0 }
send Yes {
  Other() :- All(u), not Id(u).
  Both() :- A(_), B(_).
  Yes() :- Other(), Both(), not Sent().
}
insert Sent { Sent(). }
output {
  Other() :- All(u), not Id(u).
  Both() :- A(_), B(_).
  Out() :- A(_), not Other().
  Out() :- B(_), not Other().
  Out() :- A(_), Other(), not Both().
  Out() :- B(_), Other(), not Both().
  Out() :- Yes().
}
)";

constexpr std::string_view kIdentityPing = R"(% Identity on S, but with a neighbor present a node waits for a ping.
schema { in: S/1; msg: Ping/0; mem: Sent/0; out: 1 }
send Ping { Ping() :- not Sent(). }
insert Sent { Sent(). }
output {
  Many() :- All(u), All(w), u != w.
  Out(x) :- S(x), not Many().
  Out(x) :- S(x), Ping().
}
)";

constexpr std::string_view kFloodAcked = R"(% Multicast with acknowledgements. F(v,x,y) carries a fact of node v,
% Ack(v,x,y,a) says node a holds it, Done(v,a) says node a holds all of
% v's facts. Ready once Done(w,self) is known for every node w.
schema {
  in: S/2;
  msg: F/3, Ack/4, Done/2;
  mem: Sent/0, Copy/2, SeenF/3, AckSeen/4, DoneSeen/2, Ready/0;
  out: 2
}
send F {
  F(v,x,y) :- Id(v), S(x,y), not Sent().
  F(v,x,y) :- F(v,x,y), not SeenF(v,x,y).
}
send Ack {
  Ack(v,x,y,a) :- F(v,x,y), Id(a), not SeenF(v,x,y).
  Ack(v,x,y,a) :- Ack(v,x,y,a), not AckSeen(v,x,y,a).
}
send Done {
  Pending(a) :- Id(v), S(x,y), All(a), not AckSeen(v,x,y,a).
  Done(v,a) :- Id(v), All(a), not Pending(a), not DoneSeen(v,a).
  Done(v,a) :- Done(v,a), not DoneSeen(v,a).
}
insert Sent { Sent(). }
insert Copy {
  Copy(x,y) :- S(x,y).
  Copy(x,y) :- F(_,x,y).
}
insert SeenF {
  SeenF(v,x,y) :- F(v,x,y).
  SeenF(v,x,y) :- Id(v), S(x,y).
}
insert AckSeen {
  AckSeen(v,x,y,a) :- Ack(v,x,y,a).
  AckSeen(v,x,y,a) :- F(v,x,y), Id(a).
  AckSeen(v,x,y,v) :- Id(v), S(x,y).
}
insert DoneSeen {
  Pending(a) :- Id(v), S(x,y), All(a), not AckSeen(v,x,y,a).
  DoneSeen(v,a) :- Done(v,a).
  DoneSeen(v,a) :- Id(v), All(a), not Pending(a).
}
insert Ready {
  Miss() :- Id(a), All(w), not DoneSeen(w,a).
  Ready() :- Id(a), not Miss().
}
output { Out(x,y) :- Copy(x,y), Ready(). }
)";

constexpr std::string_view kFloodPlain = R"(% Every node sends its input and forwards what it receives; outputs
% everything it has seen.
schema { in: S/2; msg: M/2; mem: Copy/2; out: 2 }
send M {
  M(x,y) :- S(x,y), not Copy(x,y).
  M(x,y) :- M(x,y), not Copy(x,y).
}
insert Copy {
  Copy(x,y) :- S(x,y).
  Copy(x,y) :- M(x,y).
}
output {
  Out(x,y) :- Copy(x,y).
  Out(x,y) :- S(x,y).
  Out(x,y) :- M(x,y).
}
)";

const Relation& rel_or_empty(const Instance& I, std::string_view name, std::size_t arity,
                             Relation& scratch) {
  if (const Relation* r = I.find(name)) return *r;
  scratch = Relation(arity);
  return scratch;
}

Oracle over(std::string name, std::size_t arity, Relation (*f)(const Relation&)) {
  return [name = std::move(name), arity, f](const Instance& I) {
    Relation scratch;
    return f(rel_or_empty(I, name, arity, scratch));
  };
}

Relation identity(const Relation& r) { return r; }

std::string edb_message(const std::string& e) { return "Msg_" + e; }
std::string edb_copy(const std::string& e) { return "Have_" + e; }

std::vector<CorpusEntry> build_corpus() {
  std::vector<CorpusEntry> out;
  auto add = [&](std::string name, std::string anchor, std::string description,
                 std::string_view source, std::optional<Oracle> oracle) {
    CorpusEntry e{std::move(name), std::move(anchor), std::move(description),
                  std::string(source), parse_program(source), std::move(oracle), {}};
    e.input = e.program.schema().input;
    out.push_back(std::move(e));
  };
  add("eq_select", "Example: \"outputs the identical pairs from its part\"",
      "equality selection on S, no communication", kEqSelect,
      over("S", 2, oracles::equality_selection));
  add("tc_flood",
      "Example: \"computes the transitive closure of S in a distributed fashion\"",
      "naive flooding transitive closure", kTcFlood, over("S", 2, oracles::reachability));
  add("first_element", "Example: \"outputs the first element it receives\"",
      "inconsistent: output depends on message order", kFirstElement, std::nullopt);
  add("fwd_identity", "Example: \"only outputs the elements it receives\"",
      "identity on networks with at least two nodes, empty on one node",
      kFwdIdentity, over("S", 1, identity));
  add("emptiness", "Example: \"computes the emptiness query on an input set S\"",
      "true iff S is empty; needs Id and All", kEmptiness,
      over("S", 1, oracles::emptiness));
  add("a_or_b_nonempty", "Example: \"at least one of A and B are nonempty\"",
      "contrived coordination-free program using Id and All", kAOrB,
      Oracle([](const Instance& I) {
        Relation sa, sb;
        return oracles::a_or_b_nonempty(rel_or_empty(I, "A", 1, sa),
                                        rel_or_empty(I, "B", 1, sb));
      }));
  add("identity_ping", "Example: \"he sends out a ping message\"",
      "identity using All only; not coordination-free", kIdentityPing,
      over("S", 1, identity));
  add("flood_acked", "Acknowledged flooding: \"it sends out a message done(v,v')\"",
      "acknowledged multicast with a Ready flag; outputs S once Ready", kFloodAcked,
      over("S", 2, identity));
  add("flood_plain",
      "Plain flooding: \"All nodes simply send out their local input facts and forward "
      "any message they receive\"",
      "oblivious flooding; outputs everything seen", kFloodPlain, over("S", 2, identity));
  add("datalog_runner",
      "Datalog characterization: \"apply continuously the T_P-operator of the Datalog program\"",
      "flood the EDB, apply T_P on every transition (default P: transitive closure)",
      datalog_runner_source(transitive_closure_query()),
      over("S", 2, oracles::reachability));
  return out;
}

}  // namespace

const std::vector<CorpusEntry>& corpus() {
  static const std::vector<CorpusEntry> kCorpus = build_corpus();
  return kCorpus;
}

const CorpusEntry& corpus_entry(std::string_view name) {
  for (const auto& e : corpus()) {
    if (e.name == name) return e;
  }
  throw PreconditionError("no corpus entry named " + std::string(name));
}

const QueryProgram& transitive_closure_query() {
  static const QueryProgram kTc = parse_query(
      "T(x,y) :- S(x,y).\n"
      "T(x,y) :- S(x,z), T(z,y).\n");
  return kTc;
}

std::string datalog_runner_source(const QueryProgram& datalog) {
  if (datalog.empty()) throw PreconditionError("datalog runner needs a nonempty program");
  for (const auto& r : datalog.rules()) {
    if (!r.negative.empty()) {
      throw PreconditionError("datalog runner takes positive Datalog programs");
    }
    for (const auto& a : r.positive) {
      if (a.predicate == kAdom) throw PreconditionError("datalog runner does not support Adom");
    }
  }
  const auto& edb = datalog.extensional();
  const auto& idb = datalog.intensional();

  auto list = [](const DatabaseSchema& d, auto rename) {
    std::string s;
    for (const auto& [name, arity] : d) {
      if (!s.empty()) s += ", ";
      s += rename(name) + "/" + std::to_string(arity);
    }
    return s;
  };
  auto same = [](const std::string& n) { return n; };
  DatabaseSchema memory;
  for (const auto& [name, arity] : edb) memory.emplace(edb_copy(name), arity);
  for (const auto& [name, arity] : idb) memory.emplace(name, arity);

  std::string s = "% Generated: floods the EDB relations and applies T_P.\n";
  s += "schema {\n  in: " + list(edb, same) + ";\n  msg: " + list(edb, edb_message) +
       ";\n  mem: " + list(memory, same) + ";\n  out: " +
       std::to_string(datalog.arity()) + "\n}\n";

  auto vars = [](std::size_t arity) {
    std::string v;
    for (std::size_t i = 0; i < arity; ++i) {
      if (i > 0) v += ",";
      v += "x" + std::to_string(i);
    }
    return v;
  };
  for (const auto& [name, arity] : edb) {
    const std::string m = edb_message(name), c = edb_copy(name), x = vars(arity);
    s += "send " + m + " {\n";
    s += "  " + m + "(" + x + ") :- " + name + "(" + x + "), not " + c + "(" + x + ").\n";
    s += "  " + m + "(" + x + ") :- " + m + "(" + x + "), not " + c + "(" + x + ").\n";
    s += "}\n";
    s += "insert " + c + " {\n";
    s += "  " + c + "(" + x + ") :- " + name + "(" + x + ").\n";
    s += "  " + c + "(" + x + ") :- " + m + "(" + x + ").\n";
    s += "}\n";
  }
  for (const auto& [name, arity] : idb) {
    s += "insert " + name + " {\n";
    for (Rule r : datalog.rules()) {
      if (r.head.predicate != name) continue;
      for (auto& a : r.positive) {
        if (edb.contains(a.predicate)) a.predicate = edb_copy(a.predicate);
      }
      s += "  " + format_rule(r) + "\n";
    }
    s += "}\n";
  }
  const std::string x = vars(datalog.arity());
  s += "output { Out(" + x + ") :- " + datalog.answer() + "(" + x + "). }\n";
  return s;
}

TransducerProgram make_datalog_runner(const QueryProgram& datalog) {
  return parse_program(datalog_runner_source(datalog));
}

namespace oracles {

Relation reachability(const Relation& edges) {
  std::set<DataElement> nodes;
  for (const auto& t : edges) {
    nodes.insert(t[0]);
    nodes.insert(t[1]);
  }
  std::vector<DataElement> v(nodes.begin(), nodes.end());
  const std::size_t n = v.size();
  auto at = [&](DataElement e) {
    return static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), e) - v.begin());
  };
  std::vector<std::vector<bool>> m(n, std::vector<bool>(n, false));
  for (const auto& t : edges) m[at(t[0])][at(t[1])] = true;
  // m := m or m*m until stable; after k rounds paths of length <= 2^k
  for (bool changed = true; changed;) {
    changed = false;
    auto next = m;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        if (!m[i][k]) continue;
        for (std::size_t j = 0; j < n; ++j) {
          if (m[k][j] && !next[i][j]) {
            next[i][j] = true;
            changed = true;
          }
        }
      }
    }
    m = std::move(next);
  }
  Relation out(2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (m[i][j]) out.insert(Tuple{v[i], v[j]});
    }
  }
  return out;
}

Relation equality_selection(const Relation& s) {
  Relation out(2);
  for (const auto& t : s) {
    if (t[0] == t[1]) out.insert(t);
  }
  return out;
}

Relation emptiness(const Relation& s) {
  Relation out(0);
  if (s.empty()) out.insert(Tuple{});
  return out;
}

Relation a_or_b_nonempty(const Relation& a, const Relation& b) {
  Relation out(0);
  if (!a.empty() || !b.empty()) out.insert(Tuple{});
  return out;
}

}  // namespace oracles

}  // namespace relnet
