#include "relnet/transducer.hpp"

#include <algorithm>
#include <set>

#include "syntax.hpp"

namespace relnet {

namespace {

const QueryProgram& lookup(const TransducerProgram::QueryMap& map,
                           std::string_view relation,
                           const DatabaseSchema& declared, const char* kind) {
  auto it = map.find(relation);
  if (it != map.end()) return it->second;
  if (!declared.contains(relation)) {
    throw SchemaError(std::string("no ") + kind + " relation named " +
                      std::string(relation));
  }
  // Empty queries are materialized in make(); reaching here means the
  // relation was declared after construction, which cannot happen.
  throw SchemaError("missing query for " + std::string(relation));
}

bool mentions(const QueryProgram& q, std::string_view relation) {
  for (const auto& r : q.rules()) {
    for (const auto& a : r.positive) {
      if (a.predicate == relation) return true;
    }
    for (const auto& a : r.negative) {
      if (a.predicate == relation) return true;
    }
  }
  return false;
}

}  // namespace

const DatabaseSchema& TransducerSchema::system() {
  static const DatabaseSchema kSystem{{std::string(kId), 1}, {std::string(kAll), 1}};
  return kSystem;
}

DatabaseSchema TransducerSchema::combined() const {
  DatabaseSchema out = state();
  out.insert(message.begin(), message.end());
  return out;
}

DatabaseSchema TransducerSchema::state() const {
  DatabaseSchema out = input;
  out.insert(system().begin(), system().end());
  out.insert(memory.begin(), memory.end());
  return out;
}

void TransducerSchema::validate() const {
  std::set<std::string, std::less<>> seen;
  for (const auto* part : {&input, &message, &memory}) {
    for (const auto& [name, _] : *part) {
      if (name == kId || name == kAll || name == kAdom || name == kOut) {
        throw SchemaError("relation name " + name + " is reserved");
      }
      if (!seen.insert(name).second) {
        throw SchemaError("relation " + name + " is declared in more than one schema");
      }
    }
  }
}

TransducerProgram TransducerProgram::make(TransducerSchema schema, QueryMap send,
                                          QueryMap insert, QueryMap remove,
                                          std::optional<QueryProgram> output) {
  schema.validate();
  TransducerProgram p;
  p.schema_ = std::move(schema);
  const auto combined = p.schema_.combined();

  auto check_reads = [&](const QueryProgram& q, const std::string& block) {
    for (const auto& [name, arity] : q.extensional()) {
      auto it = combined.find(name);
      if (it == combined.end()) {
        throw SchemaError(block + ": undeclared predicate " + name);
      }
      if (it->second != arity) {
        throw SchemaError(block + ": relation " + name + " used with arity " +
                          std::to_string(arity) + " but declared with arity " +
                          std::to_string(it->second));
      }
    }
  };

  auto fill = [&](QueryMap& in, const DatabaseSchema& declared,
                  const char* kind) {
    QueryMap out;
    for (auto& [name, q] : in) {
      auto it = declared.find(name);
      if (it == declared.end()) {
        throw SchemaError(std::string(kind) + " block for undeclared relation " + name);
      }
      if (q.arity() != it->second || q.answer() != name) {
        throw SchemaError(std::string(kind) + " query for " + name +
                          " must define " + name + "/" + std::to_string(it->second));
      }
      check_reads(q, std::string(kind) + " " + name);
      out.emplace(name, std::move(q));
    }
    for (const auto& [name, arity] : declared) {
      if (!out.contains(name)) out.emplace(name, QueryProgram(name, arity));
    }
    return out;
  };
  p.send_ = fill(send, p.schema_.message, "send");
  p.insert_ = fill(insert, p.schema_.memory, "insert");
  p.delete_ = fill(remove, p.schema_.memory, "delete");
  if (output) {
    if (output->answer() != kOut || output->arity() != p.schema_.output_arity) {
      throw SchemaError("output query must define Out/" +
                        std::to_string(p.schema_.output_arity));
    }
    check_reads(*output, "output");
    p.output_ = std::move(*output);
  } else {
    p.output_ = QueryProgram(std::string(kOut), p.schema_.output_arity);
  }

  auto visit = [&](const QueryProgram& q) {
    if (mentions(q, kId)) p.flags_.uses_id = true;
    if (mentions(q, kAll)) p.flags_.uses_all = true;
  };
  for (const auto* m : {&p.send_, &p.insert_, &p.delete_}) {
    for (const auto& [_, q] : *m) visit(q);
  }
  visit(p.output_);
  p.flags_.oblivious = !p.flags_.uses_id && !p.flags_.uses_all;
  p.flags_.inflationary = std::all_of(p.delete_.begin(), p.delete_.end(),
                                      [](const auto& kv) { return kv.second.empty(); });
  return p;
}

const QueryProgram& TransducerProgram::send_query(std::string_view relation) const {
  return lookup(send_, relation, schema_.message, "message");
}

const QueryProgram& TransducerProgram::insert_query(std::string_view relation) const {
  return lookup(insert_, relation, schema_.memory, "memory");
}

const QueryProgram& TransducerProgram::delete_query(std::string_view relation) const {
  return lookup(delete_, relation, schema_.memory, "memory");
}

// ------------------------------------------------------------- LocalState

LocalState::LocalState(const Instance& input, DataElement id,
                       std::span<const DataElement> all)
    : instance_(input) {
  if (std::find(all.begin(), all.end(), id) == all.end()) {
    throw PreconditionError("All must contain the node " + id.name());
  }
  instance_.erase(kId);
  instance_.erase(kAll);
  instance_.add(kId, Tuple{id});
  for (auto v : all) instance_.add(kAll, Tuple{v});
}

LocalState LocalState::from_instance(Instance instance) {
  const Relation* id = instance.find(kId);
  const Relation* all = instance.find(kAll);
  if (id == nullptr || id->size() != 1 || id->arity() != 1) {
    throw PreconditionError("Id must hold exactly one node");
  }
  if (all == nullptr || all->arity() != 1 || !all->contains(*id->begin())) {
    throw PreconditionError("All must be nonempty and contain the Id node");
  }
  return LocalState(std::move(instance));
}

DataElement LocalState::id() const {
  return (*instance_.find(kId)->begin())[0];
}

void LocalState::set_relation(std::string_view relation, Relation r) {
  if (relation == kId || relation == kAll) {
    throw PreconditionError("system relations are read-only");
  }
  instance_.set(relation, std::move(r));
}

// ------------------------------------------------------------- transitions

Relation memory_update(const Relation& old, const Relation& ins,
                       const Relation& del) {
  std::size_t arity = old.arity();
  for (const auto* r : {&ins, &del}) {
    if (!r->empty() && !old.empty() && r->arity() != old.arity()) {
      throw SchemaError("memory_update: arity mismatch");
    }
    if (old.empty() && !r->empty()) arity = r->arity();
  }
  if (!ins.empty() && !del.empty() && ins.arity() != del.arity()) {
    throw SchemaError("memory_update: arity mismatch");
  }
  if (ins.empty() && del.empty()) return old;
  Relation kept_inserts = relation_difference(ins, del);
  Relation conflicts = relation_intersection(relation_intersection(ins, del), old);
  Relation untouched = relation_difference(old, relation_union(ins, del));
  Relation out = relation_union(relation_union(kept_inserts, conflicts), untouched);
  return out.empty() ? Relation(arity) : out;
}

StepEffects advance(const TransducerProgram& program, LocalState& state,
                    const Instance& received) {
  StepEffects fx;
  const auto& schema = program.schema();
  InstanceView view(state.instance(), received);
  for (const auto& [name, _] : schema.message) {
    fx.sent.set(name, evaluate(program.send_query(name), view));
  }
  fx.output = evaluate(program.output_query(), view);

  std::vector<std::pair<std::string, Relation>> updates;
  for (const auto& [name, arity] : schema.memory) {
    const auto& ins_q = program.insert_query(name);
    const auto& del_q = program.delete_query(name);
    if (ins_q.empty() && del_q.empty()) continue;
    Relation ins = evaluate(ins_q, view);
    Relation del = evaluate(del_q, view);
    const Relation* old = state.find(name);
    updates.emplace_back(name, memory_update(old != nullptr ? *old : Relation(arity),
                                             ins, del));
  }
  // All queries read I' before any memory relation changes.
  for (auto& [name, rel] : updates) state.set_relation(name, std::move(rel));
  return fx;
}

LocalTransition step(const TransducerProgram& program, const LocalState& state,
                     const Instance& received) {
  received.check_conforms(program.schema().message);
  LocalState after = state;
  StepEffects fx = advance(program, after, received);
  return LocalTransition{state, received, std::move(fx.sent), std::move(fx.output),
                         std::move(after)};
}

TransducerProgram make_assignment_program(const TransducerSchema& schema,
                                          const std::string& relation,
                                          const QueryProgram& assigned) {
  auto it = schema.memory.find(relation);
  if (it == schema.memory.end()) {
    throw SchemaError("assignment target " + relation + " is not a memory relation");
  }
  // The assigned query must be a block-style query for `relation`.
  QueryProgram ins = QueryProgram::make(assigned.rules(), relation, it->second,
                                        std::nullopt, true);
  Rule copy;
  copy.head.predicate = relation;
  Atom body{relation, {}};
  for (std::size_t i = 0; i < it->second; ++i) {
    copy.variables.push_back("x" + std::to_string(i));
    copy.head.args.push_back(static_cast<int>(i));
    body.args.push_back(static_cast<int>(i));
  }
  copy.positive.push_back(body);
  QueryProgram del = QueryProgram::make({copy}, relation, it->second, std::nullopt, true);
  TransducerProgram::QueryMap insert_map, delete_map;
  insert_map.emplace(relation, std::move(ins));
  delete_map.emplace(relation, std::move(del));
  return TransducerProgram::make(schema, {}, std::move(insert_map),
                                 std::move(delete_map), std::nullopt);
}

bool assign_emulation_check(
    const TransducerProgram& program, std::string_view relation,
    const QueryProgram& assigned,
    std::span<const std::pair<LocalState, Instance>> samples) {
  for (const auto& [state, received] : samples) {
    LocalTransition t = step(program, state, received);
    Relation expected = evaluate(assigned, InstanceView(state.instance(), received));
    const Relation* got = t.after.find(relation);
    Relation actual = got != nullptr ? *got : Relation(expected.arity());
    if (!(actual.rows() == expected.rows())) return false;
  }
  return true;
}

// ------------------------------------------------------------------ syntax

namespace {

using detail::Tok;
using detail::TokenStream;

void parse_relation_list(TokenStream& ts, DatabaseSchema& into) {
  if (ts.at(Tok::Semicolon) || ts.at(Tok::RBrace)) return;
  do {
    const auto& name = ts.expect(Tok::Word, "relation name");
    ts.expect(Tok::Slash);
    std::size_t arity = ts.expect_number();
    if (!into.emplace(name.text, arity).second) {
      TokenStream::fail_at(name, "relation " + name.text + " declared twice");
    }
  } while (ts.accept(Tok::Comma));
}

TransducerSchema parse_schema(TokenStream& ts) {
  ts.expect_word("schema");
  ts.expect(Tok::LBrace);
  TransducerSchema schema;
  std::set<std::string> sections;
  while (!ts.at(Tok::RBrace)) {
    const auto& key = ts.expect(Tok::Word, "schema section");
    if (!sections.insert(key.text).second) {
      TokenStream::fail_at(key, "section '" + key.text + "' repeated");
    }
    ts.expect(Tok::Colon);
    if (key.text == "in") {
      parse_relation_list(ts, schema.input);
    } else if (key.text == "msg") {
      parse_relation_list(ts, schema.message);
    } else if (key.text == "mem") {
      parse_relation_list(ts, schema.memory);
    } else if (key.text == "out") {
      schema.output_arity = ts.expect_number();
    } else {
      TokenStream::fail_at(key, "unknown schema section '" + key.text +
                                    "' (expected in, msg, mem or out)");
    }
    if (!ts.accept(Tok::Semicolon)) break;
  }
  ts.expect(Tok::RBrace);
  try {
    schema.validate();
  } catch (const SchemaError& e) {
    ts.fail(e.what());
  }
  return schema;
}

// Resolves every body predicate of a block against the schema, the block's
// own auxiliary predicates and Adom; reports the first unknown one.
void check_block_names(const std::vector<Rule>& rules, const std::string& answer,
                       const DatabaseSchema& combined, const detail::Token& at) {
  std::map<std::string, std::size_t> aux;
  for (const auto& r : rules) {
    if (r.head.predicate != answer) {
      if (combined.contains(r.head.predicate)) {
        throw ParseError("auxiliary predicate " + r.head.predicate +
                             " shadows a schema relation",
                         r.line, 1);
      }
      aux.emplace(r.head.predicate, r.head.args.size());
    }
  }
  for (const auto& r : rules) {
    for (const auto* atoms : {&r.positive, &r.negative}) {
      for (const auto& a : *atoms) {
        if (a.predicate == kAdom || aux.contains(a.predicate)) continue;
        auto it = combined.find(a.predicate);
        if (it == combined.end()) {
          throw ParseError("undeclared predicate " + a.predicate, r.line, 1);
        }
        if (it->second != a.args.size()) {
          throw ParseError("relation " + a.predicate + " has arity " +
                               std::to_string(it->second) + ", used with " +
                               std::to_string(a.args.size()) + " arguments",
                           r.line, 1);
        }
      }
    }
  }
  (void)at;
}

std::vector<Rule> parse_block_rules(TokenStream& ts) {
  ts.expect(Tok::LBrace);
  std::vector<Rule> rules;
  while (!ts.at(Tok::RBrace)) {
    if (ts.at(Tok::End)) ts.fail("unterminated block");
    rules.push_back(detail::parse_rule(ts));
  }
  ts.expect(Tok::RBrace);
  return rules;
}

}  // namespace

TransducerProgram parse_program(std::string_view text) {
  TokenStream ts(detail::tokenize(text));
  TransducerSchema schema = parse_schema(ts);
  const auto combined = schema.combined();
  TransducerProgram::QueryMap send, insert, remove;
  std::optional<QueryProgram> output;

  while (!ts.at(Tok::End)) {
    const auto kw = ts.expect(Tok::Word, "block keyword");
    std::string target;
    const DatabaseSchema* declared = nullptr;
    TransducerProgram::QueryMap* into = nullptr;
    if (kw.text == "send") {
      declared = &schema.message;
      into = &send;
    } else if (kw.text == "insert") {
      declared = &schema.memory;
      into = &insert;
    } else if (kw.text == "delete") {
      declared = &schema.memory;
      into = &remove;
    } else if (kw.text != "output") {
      TokenStream::fail_at(kw, "expected send, insert, delete or output, found '" +
                                   kw.text + "'");
    }
    std::size_t arity = schema.output_arity;
    if (into != nullptr) {
      const auto& name = ts.expect(Tok::Word, "relation name");
      auto it = declared->find(name.text);
      if (it == declared->end()) {
        TokenStream::fail_at(name, kw.text + " block names undeclared relation " +
                                       name.text);
      }
      if (into->contains(name.text)) {
        TokenStream::fail_at(name, "duplicate " + kw.text + " block for " + name.text);
      }
      target = name.text;
      arity = it->second;
    } else {
      if (output) TokenStream::fail_at(kw, "duplicate output block");
      target = std::string(kOut);
    }
    auto rules = parse_block_rules(ts);
    check_block_names(rules, target, combined, kw);
    QueryProgram q(target, arity);
    if (!rules.empty()) {
      try {
        q = QueryProgram::make(std::move(rules), target, arity, std::nullopt, true);
      } catch (const SchemaError& e) {
        TokenStream::fail_at(kw, e.what());
      }
    }
    if (into != nullptr) {
      into->emplace(target, std::move(q));
    } else {
      output = std::move(q);
    }
  }
  try {
    return TransducerProgram::make(std::move(schema), std::move(send),
                                   std::move(insert), std::move(remove),
                                   std::move(output));
  } catch (const SchemaError& e) {
    ts.fail(e.what());
  }
}

std::string format_program(const TransducerProgram& program) {
  const auto& s = program.schema();
  auto list = [](const DatabaseSchema& d) {
    std::string out;
    for (const auto& [name, arity] : d) {
      if (!out.empty()) out += ", ";
      out += name + "/" + std::to_string(arity);
    }
    return out;
  };
  std::string out = "schema { in: " + list(s.input) + "; msg: " + list(s.message) +
                    "; mem: " + list(s.memory) +
                    "; out: " + std::to_string(s.output_arity) + " }\n";
  auto block = [&](const std::string& header, const QueryProgram& q) {
    if (q.empty()) return;
    out += "\n" + header + " {\n";
    for (const auto& r : q.rules()) out += "  " + format_rule(r) + "\n";
    out += "}\n";
  };
  for (const auto& [name, _] : s.message) block("send " + name, program.send_query(name));
  for (const auto& [name, _] : s.memory) block("insert " + name, program.insert_query(name));
  for (const auto& [name, _] : s.memory) block("delete " + name, program.delete_query(name));
  block("output", program.output_query());
  return out;
}

}  // namespace relnet
