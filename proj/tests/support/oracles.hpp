#pragma once

// Independent reference implementations used only by tests. None of them
// calls into the engine they check.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "relnet/dedalus.hpp"
#include "relnet/netsim.hpp"
#include "relnet/query.hpp"
#include "relnet/relcore.hpp"

namespace relnet::testing {

/// Per-tuple membership after a memory update, written out case by case.
bool truth_table(bool in_old, bool in_ins, bool in_del);

/// Reachability by breadth-first search from every vertex.
Relation bfs_reachability(const Relation& edges);

/// Iterates the immediate-consequence operator from the empty IDB,
/// recomputing every IDB relation from scratch each round, by trying every
/// assignment of the rule's variables over adom(edb). Gives the least
/// fixpoint for positive programs and the stratified model for
/// nonrecursive ones. Returns the IDB facts.
Instance naive_datalog(const std::vector<Rule>& rules, const Instance& edb);

/// Semi-naive iteration for positive programs: after the first round a
/// rule instance only fires when one of its IDB body atoms matches a fact
/// derived in the previous round. Same brute-force assignments as above.
Instance semi_naive_datalog(const std::vector<Rule>& rules, const Instance& edb);

enum class TmOutcome { Accept, Reject, Running };

/// Direct simulation on a right-infinite tape; moving left on cell 0 stays.
TmOutcome run_tm(const TuringMachine& m, const std::string& word, std::size_t max_steps);

/// All words over `letters` of length exactly n.
std::vector<std::string> words_of_length(const std::vector<char>& letters, std::size_t n);

/// Random graph over vertices 1..n with `edges` distinct directed edges.
Relation random_graph(std::mt19937_64& rng, std::size_t n, std::size_t edges);

/// Instance S(x,y) for every edge.
Instance edges_instance(const Relation& edges, const std::string& name = "S");

/// A random subset of `j`.
Instance random_subset(std::mt19937_64& rng, const Instance& j);

/// Every connected labeled graph on nodes 1..n.
std::vector<Network> connected_networks(std::size_t n);

/// Random positive Datalog program over E/2 and U/1 with answer A/2, at
/// most `max_rules` rules, possibly recursive, sometimes using !=.
std::string random_positive_program(std::mt19937_64& rng, std::size_t max_rules);

/// Steps a random-fair run of the acknowledged-flooding program one
/// transition at a time. After every step, a node whose Ready flag is set
/// must hold all of `global` in Copy. The run must reach a point where
/// every node is Ready. Returns a description of the first violation.
std::optional<std::string> audit_flood_acked(const TransducerProgram& program,
                                             const Network& network,
                                             const HorizontalPartition& partition,
                                             std::uint64_t seed, std::size_t max_steps = 20000);

}  // namespace relnet::testing
