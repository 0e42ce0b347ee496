#include "relnet/dedalus.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <sstream>

#include "engine.hpp"
#include "lexer.hpp"
#include "syntax.hpp"

namespace relnet {

using detail::Tok;
using detail::TokenStream;

namespace {

constexpr std::string_view kBaseSuffix = "@base";

DataElement timestamp(std::size_t n) { return DataElement(std::to_string(n)); }

std::string successor_name(const std::string& time_var) { return time_var + "+1"; }

}  // namespace

std::string to_string(const TemporalFact& f) {
  return to_string(Fact{f.relation, f.args}) + "@" + std::to_string(f.time);
}

// ------------------------------------------------------------ instances

bool TemporalInstance::add(const TemporalFact& f) { return add(f.relation, f.args, f.time); }

bool TemporalInstance::add(std::string_view relation, Tuple args, std::size_t time) {
  return slices_[time].add(relation, std::move(args));
}

void TemporalInstance::set_slice(std::size_t time, Instance slice) {
  if (slice.empty()) {
    slices_.erase(time);
  } else {
    slices_[time] = std::move(slice);
  }
}

Instance TemporalInstance::slice(std::size_t time) const {
  auto it = slices_.find(time);
  return it == slices_.end() ? Instance{} : it->second;
}

Instance TemporalInstance::flatten() const {
  Instance out;
  for (const auto& [t, s] : slices_) out.merge(s);
  return out;
}

std::optional<std::size_t> TemporalInstance::max_time() const {
  if (slices_.empty()) return std::nullopt;
  return slices_.rbegin()->first;
}

std::size_t TemporalInstance::size() const {
  std::size_t n = 0;
  for (const auto& [t, s] : slices_) n += s.size();
  return n;
}

std::vector<TemporalFact> TemporalInstance::facts() const {
  std::vector<TemporalFact> out;
  for (const auto& [t, s] : slices_) {
    for (auto& f : s.facts()) out.push_back({std::move(f.relation), std::move(f.args), t});
  }
  return out;
}

TemporalInstance parse_temporal_instance(std::string_view text) {
  TokenStream ts(detail::tokenize(text));
  TemporalInstance out;
  while (!ts.at(Tok::End)) {
    const detail::Token& name = ts.expect(Tok::Word, "relation name");
    ts.expect(Tok::LParen);
    Tuple args;
    if (!ts.at(Tok::RParen)) {
      do {
        args.emplace_back(ts.expect(Tok::Word, "data element").text);
      } while (ts.accept(Tok::Comma));
    }
    ts.expect(Tok::RParen);
    ts.expect(Tok::At, "'@' and a timestamp");
    std::size_t time = ts.expect_number();
    ts.expect(Tok::Dot);
    try {
      out.add(name.text, std::move(args), time);
    } catch (const SchemaError& e) {
      TokenStream::fail_at(name, e.what());
    }
  }
  return out;
}

std::string format_temporal_instance(const TemporalInstance& instance) {
  std::string out;
  for (const auto& f : instance.facts()) out += to_string(f) + ".\n";
  return out;
}

// -------------------------------------------------------------- programs

struct DedalusProgram::Compiled {
  detail::CompiledProgram deductive;
  detail::CompiledProgram inductive;
};

DedalusProgram DedalusProgram::make(std::vector<DedalusRule> rules) {
  DedalusProgram p;
  auto note = [&](const Rule& rule, const Atom& a) {
    auto [it, fresh] = p.schema_.emplace(a.predicate, a.args.size());
    if (!fresh && it->second != a.args.size()) {
      throw SchemaError("line " + std::to_string(rule.line) + ": predicate " + a.predicate +
                        " used with " + std::to_string(a.args.size()) +
                        " data columns but elsewhere with " + std::to_string(it->second));
    }
  };
  for (const auto& r : rules) {
    if (r.rule.head.predicate == kAdom) {
      throw SchemaError("line " + std::to_string(r.rule.line) + ": Adom cannot be defined");
    }
    note(r.rule, r.rule.head);
    for (const auto& a : r.rule.positive) note(r.rule, a);
    for (const auto& a : r.rule.negative) note(r.rule, a);
  }
  p.schema_.erase(std::string(kAdom));

  std::vector<Rule> ded, ind;
  std::vector<std::vector<std::string>> ded_params, ind_params;
  std::set<std::string, std::less<>> ded_heads;
  for (const auto& r : rules) {
    std::vector<std::string> params{r.time_var, successor_name(r.time_var)};
    if (r.inductive) {
      ind.push_back(r.rule);
      ind_params.push_back(std::move(params));
    } else {
      ded.push_back(r.rule);
      ded_params.push_back(std::move(params));
      ded_heads.insert(r.rule.head.predicate);
    }
  }
  // Facts handed to a deductively defined predicate from outside (input or
  // inductive seeding) enter through P :- P@base.
  for (const auto& name : ded_heads) {
    std::size_t arity = p.schema_.at(name);
    detail::RawAtom head{name, {}}, base{name + std::string(kBaseSuffix), {}};
    for (std::size_t i = 0; i < arity; ++i) {
      head.args.push_back("x" + std::to_string(i));
      base.args.push_back("x" + std::to_string(i));
    }
    ded.push_back(detail::build_rule(head, {base}, {}, {}, 0));
    ded_params.emplace_back();
  }

  auto compiled = std::make_shared<Compiled>();
  compiled->deductive = detail::compile(
      ded, [&](std::string_view n) { return ded_heads.contains(n); }, ded_params);
  compiled->inductive =
      detail::compile(ind, [](std::string_view) { return false; }, ind_params);
  p.rules_ = std::move(rules);
  p.compiled_ = std::move(compiled);
  return p;
}

namespace {

struct TimedArg {
  std::string name;
  bool plus_one = false;
  const detail::Token* token = nullptr;
};

struct TimedAtom {
  std::string predicate;
  std::vector<TimedArg> args;
  const detail::Token* token = nullptr;
};

TimedArg parse_arg(TokenStream& ts) {
  TimedArg a;
  a.token = &ts.expect(Tok::Word, "variable");
  a.name = a.token->text;
  if (ts.accept(Tok::Plus)) {
    const detail::Token& one = ts.expect(Tok::Word, "1");
    if (one.text != "1") TokenStream::fail_at(one, "only +1 is allowed after a time variable");
    a.plus_one = true;
  }
  return a;
}

TimedAtom parse_timed_atom(TokenStream& ts) {
  TimedAtom a;
  a.token = &ts.expect(Tok::Word, "predicate name");
  a.predicate = a.token->text;
  ts.expect(Tok::LParen);
  if (!ts.at(Tok::RParen)) {
    do {
      a.args.push_back(parse_arg(ts));
    } while (ts.accept(Tok::Comma));
  }
  ts.expect(Tok::RParen);
  if (a.args.empty()) TokenStream::fail_at(*a.token, "atom " + a.predicate + " has no timestamp");
  return a;
}

// Removes the timestamp column and renames data occurrences of T+1.
detail::RawAtom strip(const TimedAtom& a, const std::string& time_var) {
  detail::RawAtom out{a.predicate, {}};
  for (std::size_t i = 0; i + 1 < a.args.size(); ++i) {
    const auto& arg = a.args[i];
    if (arg.plus_one) {
      if (arg.name != time_var) {
        TokenStream::fail_at(*arg.token, "+1 applies only to the time variable " + time_var);
      }
      out.args.push_back(successor_name(time_var));
    } else {
      out.args.push_back(arg.name);
    }
  }
  return out;
}

DedalusRule parse_dedalus_rule(TokenStream& ts) {
  std::size_t line = ts.peek().line;
  TimedAtom head = parse_timed_atom(ts);
  const TimedArg& htime = head.args.back();
  if (htime.name == "_") TokenStream::fail_at(*htime.token, "the timestamp cannot be a wildcard");
  DedalusRule r;
  r.time_var = htime.name;
  r.inductive = htime.plus_one;

  std::vector<TimedAtom> pos, neg;
  std::vector<std::pair<TimedArg, TimedArg>> cmp_args;
  std::vector<bool> cmp_neg;
  if (ts.accept(Tok::Implies)) {
    do {
      if (ts.at_word("not") && ts.peek(1).kind == Tok::Word) {
        ts.next();
        neg.push_back(parse_timed_atom(ts));
      } else if (ts.at(Tok::Word) && ts.peek(1).kind != Tok::LParen) {
        TimedArg lhs = parse_arg(ts);
        bool negated;
        if (ts.accept(Tok::Neq)) {
          negated = true;
        } else {
          ts.expect(Tok::Eq, "'=' or '!='");
          negated = false;
        }
        TimedArg rhs = parse_arg(ts);
        if (lhs.name == "_" || rhs.name == "_") ts.fail("wildcard in comparison");
        cmp_args.emplace_back(std::move(lhs), std::move(rhs));
        cmp_neg.push_back(negated);
      } else {
        pos.push_back(parse_timed_atom(ts));
      }
    } while (ts.accept(Tok::Comma));
  }
  ts.expect(Tok::Dot);

  for (const auto* group : {&pos, &neg}) {
    for (const auto& a : *group) {
      const TimedArg& t = a.args.back();
      if (t.plus_one || t.name != r.time_var) {
        TokenStream::fail_at(*t.token, "body atom " + a.predicate +
                                           " must be stamped with the rule's time variable " +
                                           r.time_var);
      }
    }
  }

  auto plain = [&](const TimedArg& a) {
    if (!a.plus_one) return a.name;
    if (a.name != r.time_var) {
      TokenStream::fail_at(*a.token, "+1 applies only to the time variable " + r.time_var);
    }
    return successor_name(r.time_var);
  };
  std::vector<detail::RawAtom> rpos, rneg;
  std::vector<detail::RawComparison> rcmp;
  for (const auto& a : pos) rpos.push_back(strip(a, r.time_var));
  for (const auto& a : neg) rneg.push_back(strip(a, r.time_var));
  for (std::size_t i = 0; i < cmp_args.size(); ++i) {
    rcmp.push_back({plain(cmp_args[i].first), plain(cmp_args[i].second), cmp_neg[i]});
  }
  r.rule = detail::build_rule(strip(head, r.time_var), rpos, rneg, rcmp, line);
  return r;
}

}  // namespace

DedalusProgram parse_dedalus(std::string_view text) {
  TokenStream ts(detail::tokenize(text));
  std::vector<DedalusRule> rules;
  while (!ts.at(Tok::End)) rules.push_back(parse_dedalus_rule(ts));
  return DedalusProgram::make(std::move(rules));
}

std::string format_dedalus(const DedalusProgram& program) {
  std::ostringstream out;
  for (const auto& r : program.rules()) {
    const Rule& rule = r.rule;
    auto var = [&](int v) {
      return v == kWildcard ? std::string("_") : rule.variables.at(static_cast<std::size_t>(v));
    };
    auto atom = [&](const Atom& a, const std::string& time) {
      std::string s = a.predicate + "(";
      for (int v : a.args) s += var(v) + ",";
      return s + time + ")";
    };
    out << atom(rule.head, r.inductive ? successor_name(r.time_var) : r.time_var);
    std::vector<std::string> body;
    for (const auto& a : rule.positive) body.push_back(atom(a, r.time_var));
    for (const auto& a : rule.negative) body.push_back("not " + atom(a, r.time_var));
    for (const auto& c : rule.comparisons) {
      body.push_back(var(c.lhs) + (c.negated ? " != " : " = ") + var(c.rhs));
    }
    for (std::size_t i = 0; i < body.size(); ++i) out << (i == 0 ? " :- " : ", ") << body[i];
    out << ".\n";
  }
  return out.str();
}

// ------------------------------------------------------------ evaluation

namespace {

Relation adom_relation(const Instance& slice) {
  std::vector<Tuple> rows;
  for (DataElement e : adom(slice)) rows.push_back(Tuple{e});
  return Relation(1, std::move(rows));
}

std::vector<const Relation*> bind_edb(const detail::CompiledProgram& prog, const Instance& from) {
  std::vector<const Relation*> edb;
  edb.reserve(prog.edb_names.size());
  for (const auto& name : prog.edb_names) {
    std::string_view n = name;
    if (n.ends_with(kBaseSuffix)) n.remove_suffix(kBaseSuffix.size());
    const Relation* r = from.find(n);
    if (r != nullptr && r->arity() != prog.edb_arity[edb.size()]) {
      throw SchemaError("relation " + std::string(n) + " has arity " +
                        std::to_string(r->arity()) + " but the program uses " +
                        std::to_string(prog.edb_arity[edb.size()]));
    }
    edb.push_back(r);
  }
  return edb;
}

}  // namespace

TemporalInstance eval_dedalus(const DedalusProgram& program, const TemporalInstance& input,
                              std::size_t max_time) {
  const auto& c = program.compiled();
  TemporalInstance out;
  Instance seeded;
  for (std::size_t n = 0; n <= max_time; ++n) {
    Instance slice = input.slice(n);
    slice.merge(seeded);
    std::array<DataElement, 2> params{timestamp(n), timestamp(n + 1)};

    Relation dom = adom_relation(slice);
    auto edb = bind_edb(c.deductive, slice);
    auto idb = detail::run(c.deductive, edb, &dom, params);
    for (std::size_t i = 0; i < idb.size(); ++i) {
      if (!idb[i].empty()) slice.set(c.deductive.idb_names[i], std::move(idb[i]));
    }

    dom = adom_relation(slice);
    edb = bind_edb(c.inductive, slice);
    auto next = detail::run(c.inductive, edb, &dom, params);
    seeded = Instance{};
    for (std::size_t i = 0; i < next.size(); ++i) {
      if (!next[i].empty()) seeded.set(c.inductive.idb_names[i], std::move(next[i]));
    }
    out.set_slice(n, std::move(slice));
  }
  return out;
}

StabilityReport check_eventual_consistency(const DedalusProgram& program,
                                           const TemporalInstance& input,
                                           std::size_t horizon) {
  if (horizon == 0) throw PreconditionError("the stability horizon must be at least 1");
  TemporalInstance result = eval_dedalus(program, input, horizon);
  StabilityReport report;
  report.horizon = horizon;
  std::size_t n = horizon;
  while (n >= 1 && result.slice(n) == result.slice(n - 1)) --n;
  if (n < horizon) {
    report.stable = true;
    report.stabilization_time = n + 1;
  }
  return report;
}

bool accepted(const TemporalInstance& result) {
  for (const auto& [t, s] : result.slices()) {
    if (s.find("Accept") != nullptr) return true;
  }
  return false;
}

}  // namespace relnet
