#pragma once

// Built-in transducer programs with independent oracles for the queries
// they are meant to compute.

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "relnet/query.hpp"
#include "relnet/transducer.hpp"

namespace relnet {

using Oracle = std::function<Relation(const Instance&)>;

struct CorpusEntry {
  std::string name;
  std::string anchor;       // the example it reproduces
  std::string description;
  std::string source;       // transducer DSL text
  TransducerProgram program;
  /// Intended query; absent for programs that compute no query.
  std::optional<Oracle> oracle;
  /// Input relations the entry's random instances are drawn over.
  DatabaseSchema input;
};

const std::vector<CorpusEntry>& corpus();

/// Throws PreconditionError for unknown names.
const CorpusEntry& corpus_entry(std::string_view name);

/// DSL text of the transducer that floods the EDB relations of `datalog`
/// and applies its immediate-consequence operator on every transition.
/// The answer predicate becomes the output.
std::string datalog_runner_source(const QueryProgram& datalog);
TransducerProgram make_datalog_runner(const QueryProgram& datalog);

/// Transitive closure, the runner's default program.
const QueryProgram& transitive_closure_query();

namespace oracles {

/// Pairs (x,y) with a nonempty S-path from x to y, via iterated squaring
/// of the boolean adjacency matrix.
Relation reachability(const Relation& edges);
Relation equality_selection(const Relation& s);
Relation emptiness(const Relation& s);
Relation a_or_b_nonempty(const Relation& a, const Relation& b);

}  // namespace oracles

}  // namespace relnet
