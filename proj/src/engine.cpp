#include "engine.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace relnet::detail {

namespace {

const Relation& empty_relation() {
  static const Relation kEmpty;
  return kEmpty;
}

[[noreturn]] void rule_error(const Rule& rule, const std::string& message) {
  std::string where = rule.line > 0 ? "line " + std::to_string(rule.line) + ": "
                                     : std::string();
  throw SchemaError(where + message + " in rule " + format_rule(rule));
}

std::vector<int> vars_of(const std::vector<int>& args) {
  std::vector<int> out;
  for (int v : args) {
    if (v != kWildcard) out.push_back(v);
  }
  return out;
}

bool all_bound(const std::vector<int>& vars, const std::vector<bool>& bound) {
  return std::all_of(vars.begin(), vars.end(),
                     [&](int v) { return bound[static_cast<std::size_t>(v)]; });
}

Plan make_plan(const CompiledRule& rule, int delta_atom) {
  Plan plan;
  std::vector<bool> bound(rule.var_count, false);
  for (int v : rule.params) {
    if (v >= 0) bound[static_cast<std::size_t>(v)] = true;
  }
  std::vector<bool> neg_done(rule.negative.size(), false);
  std::vector<bool> cmp_done(rule.comparisons.size(), false);

  auto attach_ready = [&](std::vector<int>& negs, std::vector<int>& cmps) {
    for (std::size_t i = 0; i < rule.negative.size(); ++i) {
      if (!neg_done[i] && all_bound(vars_of(rule.negative[i].args), bound)) {
        neg_done[i] = true;
        negs.push_back(static_cast<int>(i));
      }
    }
    for (std::size_t i = 0; i < rule.comparisons.size(); ++i) {
      const auto& c = rule.comparisons[i];
      if (!cmp_done[i] && bound[static_cast<std::size_t>(c.lhs)] &&
          bound[static_cast<std::size_t>(c.rhs)]) {
        cmp_done[i] = true;
        cmps.push_back(static_cast<int>(i));
      }
    }
  };
  attach_ready(plan.pre_negatives, plan.pre_comparisons);

  std::vector<bool> used(rule.positive.size(), false);
  for (std::size_t n = 0; n < rule.positive.size(); ++n) {
    int best = -1;
    long best_score = 0;
    for (std::size_t i = 0; i < rule.positive.size(); ++i) {
      if (used[i]) continue;
      const auto& atom = rule.positive[i];
      long score;
      if (delta_atom >= 0) {
        score = static_cast<int>(i) == delta_atom ? 1'000'000 : 0;
      } else {
        score = 0;
      }
      std::size_t prefix = 0;
      while (prefix < atom.args.size() && atom.args[prefix] != kWildcard &&
             bound[static_cast<std::size_t>(atom.args[prefix])]) {
        ++prefix;
      }
      long bound_count = 0;
      for (int v : atom.args) {
        if (v != kWildcard && bound[static_cast<std::size_t>(v)]) ++bound_count;
      }
      if (atom.source == Source::Adom && bound_count == 0) {
        score -= 1000;
      } else {
        score += static_cast<long>(prefix) * 100 + bound_count * 10;
      }
      if (best < 0 || score > best_score) {
        best = static_cast<int>(i);
        best_score = score;
      }
    }
    used[static_cast<std::size_t>(best)] = true;
    const auto& atom = rule.positive[static_cast<std::size_t>(best)];
    JoinStep step;
    step.atom = best;
    step.delta = best == delta_atom;
    step.prefix_len = 0;
    while (step.prefix_len < atom.args.size() &&
           atom.args[step.prefix_len] != kWildcard &&
           bound[static_cast<std::size_t>(atom.args[step.prefix_len])]) {
      ++step.prefix_len;
    }
    for (int v : atom.args) {
      if (v == kWildcard) {
        step.ops.push_back({ArgOp::Skip, v});
      } else if (bound[static_cast<std::size_t>(v)]) {
        step.ops.push_back({ArgOp::Check, v});
      } else {
        step.ops.push_back({ArgOp::Bind, v});
        bound[static_cast<std::size_t>(v)] = true;
      }
    }
    attach_ready(step.negatives, step.comparisons);
    plan.steps.push_back(std::move(step));
  }
  return plan;
}

// Tarjan's algorithm; components come out dependencies-first because edges
// point from a head predicate to the predicates its body reads.
struct SccFinder {
  const std::vector<std::set<std::size_t>>& edges;
  std::vector<int> index, low;
  std::vector<bool> on_stack;
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> components;
  int counter = 0;

  explicit SccFinder(const std::vector<std::set<std::size_t>>& e)
      : edges(e), index(e.size(), -1), low(e.size(), 0), on_stack(e.size(), false) {}

  void visit(std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (std::size_t w : edges[v]) {
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::size_t> comp;
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp.push_back(w);
      } while (w != v);
      std::sort(comp.begin(), comp.end());
      components.push_back(std::move(comp));
    }
  }

  void run() {
    for (std::size_t v = 0; v < edges.size(); ++v) {
      if (index[v] < 0) visit(v);
    }
  }
};

class Executor {
 public:
  Executor(const CompiledRule& rule, std::span<const Relation* const> edb,
           const std::vector<Relation>& full,
           const std::vector<Relation>* delta, const Relation* adom,
           std::span<const DataElement> params, std::vector<Tuple>& out)
      : rule_(rule),
        edb_(edb),
        full_(full),
        delta_(delta),
        adom_(adom),
        vals_(rule.var_count),
        out_(out) {
    for (std::size_t j = 0; j < rule.params.size(); ++j) {
      int v = rule.params[j];
      if (v >= 0) vals_[static_cast<std::size_t>(v)] = params[j];
    }
  }

  void run(const Plan& plan) {
    plan_ = &plan;
    for (int n : plan.pre_negatives) {
      if (!negative_holds(n)) return;
    }
    for (int c : plan.pre_comparisons) {
      if (!comparison_holds(c)) return;
    }
    go(0);
  }

 private:
  const Relation& relation(const BodyAtom& atom, bool delta) const {
    const Relation* r = nullptr;
    switch (atom.source) {
      case Source::Edb: r = edb_[atom.slot]; break;
      case Source::Idb: r = delta ? &(*delta_)[atom.slot] : &full_[atom.slot]; break;
      case Source::Adom: r = adom_; break;
    }
    return r == nullptr ? empty_relation() : *r;
  }

  bool comparison_holds(int index) const {
    const auto& c = rule_.comparisons[static_cast<std::size_t>(index)];
    bool eq = vals_[static_cast<std::size_t>(c.lhs)] ==
              vals_[static_cast<std::size_t>(c.rhs)];
    return c.negated ? !eq : eq;
  }

  // True when the negated atom has no matching tuple.
  bool negative_holds(int index) const {
    const auto& atom = rule_.negative[static_cast<std::size_t>(index)];
    const Relation& rel = relation(atom, false);
    if (rel.empty()) return true;
    Tuple prefix;
    std::size_t k = 0;
    while (k < atom.args.size() && atom.args[k] != kWildcard) {
      prefix.push_back(vals_[static_cast<std::size_t>(atom.args[k])]);
      ++k;
    }
    if (k == atom.args.size()) return !rel.contains(prefix);
    for (const auto& row : rel.with_prefix({prefix.data(), prefix.size()})) {
      bool match = true;
      for (std::size_t i = k; i < atom.args.size() && match; ++i) {
        int v = atom.args[i];
        if (v != kWildcard && row[i] != vals_[static_cast<std::size_t>(v)]) {
          match = false;
        }
      }
      if (match) return false;
    }
    return true;
  }

  void go(std::size_t depth) {
    if (depth == plan_->steps.size()) {
      Tuple t;
      for (int v : rule_.head_args) t.push_back(vals_[static_cast<std::size_t>(v)]);
      out_.push_back(std::move(t));
      return;
    }
    const JoinStep& step = plan_->steps[depth];
    const BodyAtom& atom = rule_.positive[static_cast<std::size_t>(step.atom)];
    const Relation& rel = relation(atom, step.delta);
    if (rel.empty()) return;
    Tuple prefix;
    for (std::size_t i = 0; i < step.prefix_len; ++i) {
      prefix.push_back(vals_[static_cast<std::size_t>(step.ops[i].var)]);
    }
    for (const auto& row : rel.with_prefix({prefix.data(), prefix.size()})) {
      bool ok = true;
      for (std::size_t i = step.prefix_len; i < step.ops.size(); ++i) {
        const ArgOp& op = step.ops[i];
        if (op.kind == ArgOp::Bind) {
          vals_[static_cast<std::size_t>(op.var)] = row[i];
        } else if (op.kind == ArgOp::Check &&
                   vals_[static_cast<std::size_t>(op.var)] != row[i]) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      for (int n : step.negatives) {
        if (!negative_holds(n)) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      for (int c : step.comparisons) {
        if (!comparison_holds(c)) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      go(depth + 1);
    }
  }

  const CompiledRule& rule_;
  std::span<const Relation* const> edb_;
  const std::vector<Relation>& full_;
  const std::vector<Relation>* delta_;
  const Relation* adom_;
  std::vector<DataElement> vals_;
  std::vector<Tuple>& out_;
  const Plan* plan_ = nullptr;
};

}  // namespace

std::size_t CompiledProgram::idb_slot(std::string_view name) const {
  for (std::size_t i = 0; i < idb_names.size(); ++i) {
    if (idb_names[i] == name) return i;
  }
  return idb_names.size();
}

CompiledProgram compile(std::span<const Rule> rules,
                        const std::function<bool(std::string_view)>& is_idb,
                        std::span<const std::vector<std::string>> params) {
  CompiledProgram prog;
  std::map<std::string, std::size_t, std::less<>> idb_index, edb_index;

  for (const auto& rule : rules) {
    const auto& name = rule.head.predicate;
    if (name == kAdom) rule_error(rule, "Adom is built in and cannot be defined");
    auto it = idb_index.find(name);
    if (it == idb_index.end()) {
      idb_index.emplace(name, prog.idb_names.size());
      prog.idb_names.push_back(name);
      prog.idb_arity.push_back(rule.head.args.size());
    } else if (prog.idb_arity[it->second] != rule.head.args.size()) {
      rule_error(rule, "predicate " + name + " defined with inconsistent arity");
    }
  }

  auto resolve = [&](const Rule& rule, const Atom& atom) {
    BodyAtom out;
    out.args = atom.args;
    const auto& name = atom.predicate;
    if (is_idb(name)) {
      auto it = idb_index.find(name);
      if (it == idb_index.end()) rule_error(rule, "predicate " + name + " is never defined");
      if (prog.idb_arity[it->second] != atom.args.size()) {
        rule_error(rule, "predicate " + name + " used with arity " +
                             std::to_string(atom.args.size()) + " but defined with arity " +
                             std::to_string(prog.idb_arity[it->second]));
      }
      out.source = Source::Idb;
      out.slot = it->second;
    } else if (name == kAdom) {
      if (atom.args.size() != 1) rule_error(rule, "Adom is unary");
      out.source = Source::Adom;
      out.slot = 0;
      prog.uses_adom = true;
    } else {
      auto it = edb_index.find(name);
      if (it == edb_index.end()) {
        it = edb_index.emplace(name, prog.edb_names.size()).first;
        prog.edb_names.push_back(name);
        prog.edb_arity.push_back(atom.args.size());
      } else if (prog.edb_arity[it->second] != atom.args.size()) {
        rule_error(rule, "relation " + name + " used with inconsistent arity");
      }
      out.source = Source::Edb;
      out.slot = it->second;
    }
    return out;
  };

  std::vector<std::set<std::size_t>> edges(prog.idb_names.size());
  std::vector<std::set<std::size_t>> neg_edges(prog.idb_names.size());

  for (std::size_t ri = 0; ri < rules.size(); ++ri) {
    const Rule& rule = rules[ri];
    CompiledRule cr;
    cr.line = rule.line;
    cr.head_slot = idb_index.at(rule.head.predicate);
    cr.head_args = rule.head.args;
    cr.var_count = rule.variables.size();
    cr.comparisons = rule.comparisons;
    if (ri < params.size()) {
      for (const auto& pname : params[ri]) {
        auto it = std::find(rule.variables.begin(), rule.variables.end(), pname);
        cr.params.push_back(it == rule.variables.end()
                                ? -1
                                : static_cast<int>(it - rule.variables.begin()));
      }
    }
    for (const auto& a : rule.positive) cr.positive.push_back(resolve(rule, a));
    for (const auto& a : rule.negative) cr.negative.push_back(resolve(rule, a));
    if (!rule.negative.empty()) prog.has_negation = true;

    // Range restriction.
    std::vector<bool> bound(cr.var_count, false);
    for (int v : cr.params) {
      if (v >= 0) bound[static_cast<std::size_t>(v)] = true;
    }
    for (const auto& a : rule.positive) {
      for (int v : a.args) {
        if (v != kWildcard) bound[static_cast<std::size_t>(v)] = true;
      }
    }
    for (int v : rule.head.args) {
      if (v == kWildcard) rule_error(rule, "wildcard in rule head");
      if (!bound[static_cast<std::size_t>(v)]) {
        rule_error(rule, "head variable " + rule.variables[static_cast<std::size_t>(v)] +
                             " does not occur in a positive body atom");
      }
    }
    for (const auto& a : rule.negative) {
      for (int v : a.args) {
        if (v != kWildcard && !bound[static_cast<std::size_t>(v)]) {
          rule_error(rule, "variable " + rule.variables[static_cast<std::size_t>(v)] +
                               " of a negated atom does not occur in a positive body atom");
        }
      }
    }
    for (const auto& c : rule.comparisons) {
      for (int v : {c.lhs, c.rhs}) {
        if (v == kWildcard || !bound[static_cast<std::size_t>(v)]) {
          rule_error(rule, "comparison variable is not bound by a positive body atom");
        }
      }
    }

    for (const auto& a : cr.positive) {
      if (a.source == Source::Idb) edges[cr.head_slot].insert(a.slot);
    }
    for (const auto& a : cr.negative) {
      if (a.source == Source::Idb) {
        edges[cr.head_slot].insert(a.slot);
        neg_edges[cr.head_slot].insert(a.slot);
      }
    }
    prog.rules.push_back(std::move(cr));
  }

  SccFinder scc(edges);
  scc.run();
  std::vector<std::size_t> component_of(prog.idb_names.size());
  for (std::size_t c = 0; c < scc.components.size(); ++c) {
    for (std::size_t v : scc.components[c]) component_of[v] = c;
  }
  for (std::size_t c = 0; c < scc.components.size(); ++c) {
    const auto& comp = scc.components[c];
    Stratum st;
    st.recursive = comp.size() > 1 || edges[comp[0]].contains(comp[0]);
    if (st.recursive) prog.cyclic = true;
    for (std::size_t v : comp) {
      for (std::size_t w : neg_edges[v]) {
        if (component_of[w] == c) {
          throw SchemaError("predicate " + prog.idb_names[v] +
                            " depends negatively on " + prog.idb_names[w] +
                            " inside a recursive cycle; the program is not stratifiable");
        }
      }
    }
    for (std::size_t ri = 0; ri < prog.rules.size(); ++ri) {
      if (component_of[prog.rules[ri].head_slot] == c) st.rules.push_back(ri);
    }
    prog.strata.push_back(std::move(st));
  }

  for (auto& cr : prog.rules) {
    std::size_t comp = component_of[cr.head_slot];
    cr.plain = make_plan(cr, -1);
    cr.delta.resize(cr.positive.size());
    for (std::size_t i = 0; i < cr.positive.size(); ++i) {
      const auto& a = cr.positive[i];
      if (a.source == Source::Idb && component_of[a.slot] == comp &&
          prog.strata[comp].recursive) {
        cr.recursive = true;
        cr.delta[i] = make_plan(cr, static_cast<int>(i));
      }
    }
  }
  return prog;
}

std::vector<Relation> run(const CompiledProgram& program,
                          std::span<const Relation* const> edb,
                          const Relation* adom,
                          std::span<const DataElement> params) {
  const std::size_t n = program.idb_names.size();
  std::vector<Relation> full;
  full.reserve(n);
  for (std::size_t i = 0; i < n; ++i) full.emplace_back(program.idb_arity[i]);

  std::vector<std::vector<Tuple>> fresh(n);
  auto collect = [&](std::size_t slot) {
    Relation r(program.idb_arity[slot], std::move(fresh[slot]));
    fresh[slot].clear();
    return r;
  };

  for (const auto& stratum : program.strata) {
    std::set<std::size_t> heads;
    for (std::size_t ri : stratum.rules) heads.insert(program.rules[ri].head_slot);

    for (std::size_t ri : stratum.rules) {
      const auto& cr = program.rules[ri];
      if (stratum.recursive && cr.recursive) continue;
      Executor ex(cr, edb, full, nullptr, adom, params, fresh[cr.head_slot]);
      ex.run(cr.plain);
    }
    for (std::size_t slot : heads) full[slot] = collect(slot);
    if (!stratum.recursive) continue;

    std::vector<Relation> delta = full;
    bool changed = true;
    while (changed) {
      for (std::size_t ri : stratum.rules) {
        const auto& cr = program.rules[ri];
        if (!cr.recursive) continue;
        for (std::size_t i = 0; i < cr.positive.size(); ++i) {
          if (cr.delta[i].steps.empty()) continue;
          Executor ex(cr, edb, full, &delta, adom, params, fresh[cr.head_slot]);
          ex.run(cr.delta[i]);
        }
      }
      changed = false;
      for (std::size_t slot : heads) {
        Relation next = relation_difference(collect(slot), full[slot]);
        if (!next.empty()) {
          changed = true;
          full[slot].merge(next);
        }
        delta[slot] = std::move(next);
      }
    }
  }
  return full;
}

}  // namespace relnet::detail
