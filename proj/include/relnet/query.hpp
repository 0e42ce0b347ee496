#pragma once

// Datalog-style local query language: nonrecursive Datalog with negation,
// positive recursive Datalog and unions of conjunctive queries with
// negation, all evaluated under active-domain semantics.

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "relnet/relcore.hpp"

namespace relnet {

inline constexpr int kWildcard = -1;

/// Name of the built-in unary relation holding the active domain.
inline constexpr std::string_view kAdom = "Adom";

struct Atom {
  std::string predicate;
  std::vector<int> args;  // variable ids, or kWildcard

  friend bool operator==(const Atom&, const Atom&) = default;
};

struct Comparison {
  int lhs;
  int rhs;
  bool negated;  // true for `x != y`

  friend bool operator==(const Comparison&, const Comparison&) = default;
};

/// Head :- positive atoms, negated atoms, comparisons.
/// Variable ids index into `variables` and are numbered by first
/// occurrence in the order head, positive, negative, comparisons.
struct Rule {
  Atom head;
  std::vector<Atom> positive;
  std::vector<Atom> negative;
  std::vector<Comparison> comparisons;
  std::vector<std::string> variables;
  std::size_t line = 0;

  friend bool operator==(const Rule& a, const Rule& b) {
    return a.head == b.head && a.positive == b.positive &&
           a.negative == b.negative && a.comparisons == b.comparisons &&
           a.variables == b.variables;
  }
};

enum class Dialect { NonrecursiveNegation, PositiveRecursive, UcqNegation };

std::string_view to_string(Dialect d);

/// Read-only union of instances with pairwise disjoint relation names,
/// e.g. a transducer state overlaid with its received messages.
class InstanceView {
 public:
  InstanceView(const Instance& only) : layers_{&only, nullptr} {}  // NOLINT
  InstanceView(const Instance& a, const Instance& b) : layers_{&a, &b} {}

  const Relation* find(std::string_view relation) const;
  std::set<DataElement> adom() const;

 private:
  std::array<const Instance*, 2> layers_;
};

namespace detail {
struct CompiledProgram;
}

/// A validated query: a set of rules defining an answer predicate of fixed
/// arity. Construction checks range restriction and the dialect's
/// syntactic constraints; evaluation never fails on well-formed input.
class QueryProgram {
 public:
  /// The empty query of the given arity (always returns the empty relation).
  QueryProgram(std::string answer, std::size_t arity);

  /// `dialect` is inferred when absent: UCQ-negation when only the answer
  /// predicate is defined, nonrecursive when the dependency graph is
  /// acyclic, positive recursive otherwise.
  ///
  /// With `answer_is_sink`, body occurrences of the answer name denote the
  /// extensional relation of that name (the transducer block convention,
  /// where `insert T { T(x,y) :- T(x,z), T(z,y). }` reads the stored T).
  static QueryProgram make(std::vector<Rule> rules, std::string answer,
                           std::size_t arity,
                           std::optional<Dialect> dialect = std::nullopt,
                           bool answer_is_sink = false);

  const std::string& answer() const noexcept { return answer_; }
  std::size_t arity() const noexcept { return arity_; }
  Dialect dialect() const noexcept { return dialect_; }
  bool answer_is_sink() const noexcept { return answer_is_sink_; }
  const std::vector<Rule>& rules() const noexcept { return rules_; }
  bool empty() const noexcept { return rules_.empty(); }

  /// Relations read from the input, with the arity they are used at.
  const DatabaseSchema& extensional() const noexcept { return extensional_; }
  /// Predicates defined by the rules (including the answer).
  const DatabaseSchema& intensional() const noexcept { return intensional_; }
  bool reads(std::string_view relation) const {
    return extensional_.contains(relation);
  }

  const detail::CompiledProgram& compiled() const { return *compiled_; }

  friend bool operator==(const QueryProgram& a, const QueryProgram& b) {
    return a.answer_ == b.answer_ && a.arity_ == b.arity_ &&
           a.dialect_ == b.dialect_ && a.answer_is_sink_ == b.answer_is_sink_ &&
           a.rules_ == b.rules_;
  }

 private:
  QueryProgram() = default;

  std::string answer_;
  std::size_t arity_ = 0;
  Dialect dialect_ = Dialect::UcqNegation;
  bool answer_is_sink_ = false;
  std::vector<Rule> rules_;
  DatabaseSchema extensional_;
  DatabaseSchema intensional_;
  std::shared_ptr<const detail::CompiledProgram> compiled_;
};

/// Evaluates `query` over `input`; returns the answer relation.
/// Throws SchemaError when an input relation is used at the wrong arity.
Relation evaluate(const QueryProgram& query, const InstanceView& input);

/// Same, returning an instance holding only the answer relation. When a
/// schema is supplied, every extensional predicate must occur in it with
/// the arity the query uses.
Instance eval(const QueryProgram& query, const Instance& input,
              const DatabaseSchema* schema = nullptr);

/// Parses rules `H(x,y) :- B(x,z), not C(z), x != y.`. The answer is the
/// head of the first rule unless a `?- Name.` directive names another.
QueryProgram parse_query(std::string_view text,
                         std::optional<Dialect> dialect = std::nullopt);

std::vector<Rule> parse_rules(std::string_view text);
std::string format_rule(const Rule& rule);
std::string format_query(const QueryProgram& query);

}  // namespace relnet
