#pragma once

// Stratified bottom-up Datalog evaluation with semi-naive iteration inside
// recursive strata. Shared by QueryProgram and the Dedalus interpreter;
// dialect restrictions are enforced by the callers.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "relnet/query.hpp"

namespace relnet::detail {

enum class Source : std::uint8_t { Edb, Idb, Adom };

struct BodyAtom {
  Source source;
  std::size_t slot;  // index into edb or idb tables; unused for Adom
  std::vector<int> args;
};

struct ArgOp {
  enum Kind : std::uint8_t { Skip, Bind, Check };
  Kind kind;
  int var;
};

struct JoinStep {
  int atom;     // index into CompiledRule::positive
  bool delta;   // read the stratum delta instead of the full relation
  std::size_t prefix_len;
  std::vector<ArgOp> ops;
  std::vector<int> negatives;    // checks that become ready after this step
  std::vector<int> comparisons;
};

struct Plan {
  std::vector<int> pre_negatives;  // ground checks before any join
  std::vector<int> pre_comparisons;
  std::vector<JoinStep> steps;
};

struct CompiledRule {
  std::size_t head_slot;
  std::vector<int> head_args;
  std::vector<BodyAtom> positive;
  std::vector<BodyAtom> negative;
  std::vector<Comparison> comparisons;
  std::size_t var_count;
  std::vector<int> params;  // params[j] = var bound to the j-th caller value
  Plan plain;
  std::vector<Plan> delta;  // per positive atom; empty steps if not recursive
  bool recursive = false;   // reads a predicate of its own stratum
  std::size_t line = 0;
};

struct Stratum {
  std::vector<std::size_t> rules;
  bool recursive = false;
};

struct CompiledProgram {
  std::vector<std::string> edb_names;
  std::vector<std::size_t> edb_arity;
  std::vector<std::string> idb_names;
  std::vector<std::size_t> idb_arity;
  std::vector<CompiledRule> rules;
  std::vector<Stratum> strata;
  bool uses_adom = false;
  bool has_negation = false;
  bool cyclic = false;

  std::size_t idb_slot(std::string_view name) const;
};

/// `is_idb(name)` classifies body predicates; `params[i]` lists, for rule i,
/// the variable names pre-bound by the caller (may be empty). Throws
/// SchemaError on arity clashes, unsafe rules or negation inside a cycle.
CompiledProgram compile(std::span<const Rule> rules,
                        const std::function<bool(std::string_view)>& is_idb,
                        std::span<const std::vector<std::string>> params = {});

/// Runs all strata. `edb[k]` may be null (empty relation). Returns the IDB
/// relations by slot.
std::vector<Relation> run(const CompiledProgram& program,
                          std::span<const Relation* const> edb,
                          const Relation* adom,
                          std::span<const DataElement> params = {});

}  // namespace relnet::detail
