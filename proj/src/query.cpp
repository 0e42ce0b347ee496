#include "relnet/query.hpp"

#include <algorithm>
#include <map>

#include "engine.hpp"
#include "syntax.hpp"

namespace relnet {

std::string_view to_string(Dialect d) {
  switch (d) {
    case Dialect::NonrecursiveNegation: return "nonrecursive-negation";
    case Dialect::PositiveRecursive: return "positive-recursive";
    case Dialect::UcqNegation: return "ucq-negation";
  }
  return "?";
}

const Relation* InstanceView::find(std::string_view relation) const {
  for (const Instance* layer : layers_) {
    if (layer == nullptr) continue;
    if (const Relation* r = layer->find(relation)) return r;
  }
  return nullptr;
}

std::set<DataElement> InstanceView::adom() const {
  std::set<DataElement> out;
  for (const Instance* layer : layers_) {
    if (layer == nullptr) continue;
    auto part = relnet::adom(*layer);
    out.insert(part.begin(), part.end());
  }
  return out;
}

QueryProgram::QueryProgram(std::string answer, std::size_t arity)
    : answer_(std::move(answer)), arity_(arity) {
  compiled_ = std::make_shared<detail::CompiledProgram>();
}

QueryProgram QueryProgram::make(std::vector<Rule> rules, std::string answer,
                                std::size_t arity,
                                std::optional<Dialect> dialect,
                                bool answer_is_sink) {
  QueryProgram q;
  q.answer_ = std::move(answer);
  q.arity_ = arity;
  q.answer_is_sink_ = answer_is_sink;
  q.rules_ = std::move(rules);

  std::set<std::string, std::less<>> heads;
  for (const auto& r : q.rules_) heads.insert(r.head.predicate);
  if (!q.rules_.empty() && !heads.contains(q.answer_)) {
    throw SchemaError("answer predicate " + q.answer_ + " is not defined by any rule");
  }
  const std::string& ans = q.answer_;
  auto is_idb = [&](std::string_view name) {
    if (answer_is_sink && name == ans) return false;
    return heads.contains(name);
  };
  auto compiled = std::make_shared<detail::CompiledProgram>(
      detail::compile(q.rules_, is_idb));

  for (std::size_t i = 0; i < compiled->idb_names.size(); ++i) {
    q.intensional_.emplace(compiled->idb_names[i], compiled->idb_arity[i]);
  }
  for (std::size_t i = 0; i < compiled->edb_names.size(); ++i) {
    q.extensional_.emplace(compiled->edb_names[i], compiled->edb_arity[i]);
  }
  if (auto it = q.intensional_.find(ans); it != q.intensional_.end() &&
                                          it->second != arity) {
    throw SchemaError("answer predicate " + ans + " has arity " +
                      std::to_string(it->second) + ", expected " +
                      std::to_string(arity));
  }
  if (auto it = q.extensional_.find(ans);
      answer_is_sink && it != q.extensional_.end() && it->second != arity) {
    throw SchemaError("relation " + ans + " read with arity " +
                      std::to_string(it->second) + ", expected " +
                      std::to_string(arity));
  }

  const bool only_answer = q.intensional_.size() <= 1;
  const bool is_ucq = only_answer && !compiled->cyclic;
  Dialect inferred;
  if (is_ucq) {
    inferred = Dialect::UcqNegation;
  } else if (!compiled->cyclic) {
    inferred = Dialect::NonrecursiveNegation;
  } else if (!compiled->has_negation) {
    inferred = Dialect::PositiveRecursive;
  } else {
    throw SchemaError("recursive rules with negation are not supported by any local dialect");
  }

  if (dialect) {
    switch (*dialect) {
      case Dialect::UcqNegation:
        if (!is_ucq) {
          throw SchemaError("ucq-negation programs define only the answer predicate, non-recursively");
        }
        break;
      case Dialect::NonrecursiveNegation:
        if (compiled->cyclic) {
          throw SchemaError("nonrecursive-negation program has a recursive predicate dependency");
        }
        break;
      case Dialect::PositiveRecursive:
        if (compiled->has_negation) {
          throw SchemaError("negation is not allowed in the positive-recursive dialect");
        }
        break;
    }
    q.dialect_ = *dialect;
  } else {
    q.dialect_ = inferred;
  }
  q.compiled_ = std::move(compiled);
  return q;
}

Relation evaluate(const QueryProgram& query, const InstanceView& input) {
  if (query.empty()) return Relation(query.arity());
  const auto& prog = query.compiled();
  std::vector<const Relation*> edb(prog.edb_names.size(), nullptr);
  for (std::size_t i = 0; i < edb.size(); ++i) {
    const Relation* r = input.find(prog.edb_names[i]);
    if (r != nullptr && r->arity() != prog.edb_arity[i]) {
      throw SchemaError("relation " + prog.edb_names[i] + " has arity " +
                        std::to_string(r->arity()) + " but the query reads it with arity " +
                        std::to_string(prog.edb_arity[i]));
    }
    edb[i] = r;
  }
  Relation adom_rel(1);
  if (prog.uses_adom) {
    std::vector<Tuple> rows;
    for (auto e : input.adom()) rows.push_back(Tuple{e});
    adom_rel = Relation(1, std::move(rows));
  }
  auto idb = detail::run(prog, edb, &adom_rel);
  std::size_t slot = prog.idb_slot(query.answer());
  return std::move(idb[slot]);
}

Instance eval(const QueryProgram& query, const Instance& input,
              const DatabaseSchema* schema) {
  if (schema != nullptr) {
    for (const auto& [name, arity] : query.extensional()) {
      auto it = schema->find(name);
      if (it == schema->end()) {
        throw SchemaError("input schema does not contain relation " + name);
      }
      if (it->second != arity) {
        throw SchemaError("relation " + name + " has arity " +
                          std::to_string(it->second) + " in the schema but " +
                          std::to_string(arity) + " in the query");
      }
    }
  }
  Instance out;
  out.set(query.answer(), evaluate(query, InstanceView(input)));
  return out;
}

// ------------------------------------------------------------------ syntax

namespace detail {

Rule build_rule(const RawAtom& head, const std::vector<RawAtom>& positive,
                const std::vector<RawAtom>& negative,
                const std::vector<RawComparison>& comparisons,
                std::size_t line) {
  Rule rule;
  rule.line = line;
  std::map<std::string, int> ids;
  auto id = [&](const std::string& name) {
    if (name == "_") return kWildcard;
    auto [it, fresh] = ids.emplace(name, static_cast<int>(rule.variables.size()));
    if (fresh) rule.variables.push_back(name);
    return it->second;
  };
  auto convert = [&](const RawAtom& raw) {
    Atom a;
    a.predicate = raw.predicate;
    for (const auto& arg : raw.args) a.args.push_back(id(arg));
    return a;
  };
  rule.head = convert(head);
  for (const auto& a : positive) rule.positive.push_back(convert(a));
  for (const auto& a : negative) rule.negative.push_back(convert(a));
  for (const auto& c : comparisons) {
    rule.comparisons.push_back({id(c.lhs), id(c.rhs), c.negated});
  }
  return rule;
}

namespace {

RawAtom parse_atom(TokenStream& ts) {
  RawAtom a;
  a.predicate = ts.expect(Tok::Word, "predicate name").text;
  ts.expect(Tok::LParen);
  if (!ts.at(Tok::RParen)) {
    do {
      a.args.push_back(ts.expect(Tok::Word, "variable").text);
    } while (ts.accept(Tok::Comma));
  }
  ts.expect(Tok::RParen);
  return a;
}

}  // namespace

Rule parse_rule(TokenStream& ts) {
  std::size_t line = ts.peek().line;
  RawAtom head = parse_atom(ts);
  std::vector<RawAtom> pos, neg;
  std::vector<RawComparison> cmps;
  if (ts.accept(Tok::Implies)) {
    do {
      if (ts.at_word("not") && ts.peek(1).kind == Tok::Word) {
        ts.next();
        neg.push_back(parse_atom(ts));
      } else if (ts.at(Tok::Word) &&
                 (ts.peek(1).kind == Tok::Eq || ts.peek(1).kind == Tok::Neq)) {
        RawComparison c;
        c.lhs = ts.next().text;
        c.negated = ts.next().kind == Tok::Neq;
        c.rhs = ts.expect(Tok::Word, "variable").text;
        if (c.lhs == "_" || c.rhs == "_") ts.fail("wildcard in comparison");
        cmps.push_back(std::move(c));
      } else {
        pos.push_back(parse_atom(ts));
      }
    } while (ts.accept(Tok::Comma));
  }
  ts.expect(Tok::Dot);
  return build_rule(head, pos, neg, cmps, line);
}

}  // namespace detail

std::vector<Rule> parse_rules(std::string_view text) {
  detail::TokenStream ts(detail::tokenize(text));
  std::vector<Rule> rules;
  while (!ts.at(detail::Tok::End)) rules.push_back(detail::parse_rule(ts));
  return rules;
}

QueryProgram parse_query(std::string_view text, std::optional<Dialect> dialect) {
  detail::TokenStream ts(detail::tokenize(text));
  std::vector<Rule> rules;
  std::optional<std::string> answer;
  while (!ts.at(detail::Tok::End)) {
    if (ts.accept(detail::Tok::Query)) {
      answer = ts.expect(detail::Tok::Word, "answer predicate").text;
      ts.expect(detail::Tok::Dot);
      continue;
    }
    rules.push_back(detail::parse_rule(ts));
  }
  if (rules.empty()) {
    throw ParseError("query has no rules", ts.peek().line, ts.peek().column);
  }
  std::string ans = answer.value_or(rules.front().head.predicate);
  std::size_t arity = 0;
  bool found = false;
  for (const auto& r : rules) {
    if (r.head.predicate == ans) {
      arity = r.head.args.size();
      found = true;
      break;
    }
  }
  if (!found) throw SchemaError("answer predicate " + ans + " is not defined by any rule");
  return QueryProgram::make(std::move(rules), ans, arity, dialect);
}

std::string format_rule(const Rule& rule) {
  auto var = [&](int v) {
    return v == kWildcard ? std::string("_")
                          : rule.variables.at(static_cast<std::size_t>(v));
  };
  auto atom = [&](const Atom& a) {
    std::string s = a.predicate + "(";
    for (std::size_t i = 0; i < a.args.size(); ++i) {
      if (i > 0) s += ",";
      s += var(a.args[i]);
    }
    return s + ")";
  };
  std::vector<std::string> body;
  for (const auto& a : rule.positive) body.push_back(atom(a));
  for (const auto& a : rule.negative) body.push_back("not " + atom(a));
  for (const auto& c : rule.comparisons) {
    body.push_back(var(c.lhs) + (c.negated ? " != " : " = ") + var(c.rhs));
  }
  std::string s = atom(rule.head);
  if (!body.empty()) {
    s += " :- ";
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (i > 0) s += ", ";
      s += body[i];
    }
  }
  return s + ".";
}

std::string format_query(const QueryProgram& query) {
  std::string s;
  for (const auto& r : query.rules()) s += format_rule(r) + "\n";
  if (!query.rules().empty() && query.rules().front().head.predicate != query.answer()) {
    s += "?- " + query.answer() + ".\n";
  }
  return s;
}

}  // namespace relnet
