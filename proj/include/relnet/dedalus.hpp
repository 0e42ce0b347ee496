#pragma once

// A Dedalus subset: Datalog with negation over timestamped facts, with
// deductive rules (head at the body's time) and inductive rules (head at
// the next time), timestamps usable as data ("entanglement"), and the
// compiler from Turing machines to such programs.

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "relnet/query.hpp"
#include "relnet/relcore.hpp"

namespace relnet {

struct TemporalFact {
  std::string relation;
  Tuple args;  // data columns; the timestamp is kept separately
  std::size_t time = 0;

  friend bool operator==(const TemporalFact&, const TemporalFact&) = default;
};

std::string to_string(const TemporalFact& f);  // "R(a,b)@3"

class TemporalInstance {
 public:
  bool add(const TemporalFact& f);
  bool add(std::string_view relation, Tuple args, std::size_t time);
  void set_slice(std::size_t time, Instance slice);

  /// I|_n: the facts with timestamp n.
  Instance slice(std::size_t time) const;
  /// The union of all slices.
  Instance flatten() const;
  std::optional<std::size_t> max_time() const;
  std::size_t size() const;
  bool empty() const noexcept { return slices_.empty(); }
  std::vector<TemporalFact> facts() const;
  const std::map<std::size_t, Instance>& slices() const noexcept { return slices_; }

  friend bool operator==(const TemporalInstance&, const TemporalInstance&) = default;

 private:
  std::map<std::size_t, Instance> slices_;  // nonempty slices only
};

/// `R(a,b)@3.` per fact; `%` comments.
TemporalInstance parse_temporal_instance(std::string_view text);
std::string format_temporal_instance(const TemporalInstance& instance);

/// A rule with the timestamp column removed from every atom. The time
/// variable and its successor appear in `rule.variables` as `time_var` and
/// `time_var + "+1"` whenever they are used as data.
struct DedalusRule {
  Rule rule;
  bool inductive = false;
  std::string time_var;

  friend bool operator==(const DedalusRule&, const DedalusRule&) = default;
};

class DedalusProgram {
 public:
  /// Throws SchemaError when a predicate is used with two data arities,
  /// when a rule is unsafe, or when the deductive rules are not
  /// stratifiable.
  static DedalusProgram make(std::vector<DedalusRule> rules);

  const std::vector<DedalusRule>& rules() const noexcept { return rules_; }
  /// Predicate -> data arity (without the timestamp).
  const DatabaseSchema& schema() const noexcept { return schema_; }

  struct Compiled;
  const Compiled& compiled() const { return *compiled_; }

  friend bool operator==(const DedalusProgram& a, const DedalusProgram& b) {
    return a.rules_ == b.rules_;
  }

 private:
  std::vector<DedalusRule> rules_;
  DatabaseSchema schema_;
  std::shared_ptr<const Compiled> compiled_;
};

/// `head(X,T) :- body(X,T), not other(X,T), X != Y.` (deductive) and
/// `head(X,T+1) :- body(X,T).` (inductive). The last argument of every
/// atom is the timestamp; all body atoms share one time variable.
DedalusProgram parse_dedalus(std::string_view text);
std::string format_dedalus(const DedalusProgram& program);

/// For n = 0..max_time: slice n starts from the input facts at n plus the
/// facts the inductive rules derived from slice n-1, and is closed under
/// the deductive rules stratum by stratum.
TemporalInstance eval_dedalus(const DedalusProgram& program, const TemporalInstance& input,
                              std::size_t max_time);

struct StabilityReport {
  bool stable = false;
  /// Least n >= 1 with slice m equal to slice m-1 for every m in [n, horizon].
  std::optional<std::size_t> stabilization_time;
  std::size_t horizon = 0;
};

/// Plain slice equality, so facts carrying the current timestamp as data
/// keep slices apart. Empirical: stability is only observed up to the
/// horizon.
StabilityReport check_eventual_consistency(const DedalusProgram& program,
                                           const TemporalInstance& input,
                                           std::size_t horizon);

// ---------------------------------------------------------- Turing machines

enum class Move { Left, Right, Stay };

struct TmTransition {
  std::string next_state;
  std::string write;
  Move move = Move::Right;

  friend bool operator==(const TmTransition&, const TmTransition&) = default;
};

/// Deterministic one-tape machine on a right-infinite tape. Moving left on
/// the first cell keeps the head in place. It halts when no transition
/// applies and accepts when it reaches an accepting state.
struct TuringMachine {
  std::vector<std::string> states;
  std::vector<std::string> alphabet;       // input letters
  std::vector<std::string> tape_alphabet;  // includes alphabet and blank
  std::string blank = "_";
  std::string start;
  std::vector<std::string> accepting;
  std::map<std::pair<std::string, std::string>, TmTransition> delta;

  /// Throws SchemaError on undeclared states or symbols, or letters that
  /// clash with the word-structure relation names.
  void validate() const;

  friend bool operator==(const TuringMachine&, const TuringMachine&) = default;
};

/// Lines: `states q0 q1 ...`, `alphabet a b`, `blank _`, `start q0`,
/// `accept qacc ...`, `delta q a q' b R|L|S`.
TuringMachine parse_turing_machine(std::string_view text);
std::string format_turing_machine(const TuringMachine& machine);

/// Word structure of `word` (letters are alphabet symbols, one per
/// character) at timestamp `time`: Tape(1,2),...,Begin(1),End(p), a(i).
TemporalInstance word_structure(std::string_view word, std::size_t time = 0);

/// The program expressing Q_M: persistence of inputs, word-structure and
/// spurious-fact detection, and the simulation of M with tape extension
/// through timestamp values. Accept(n) marks acceptance.
std::string tm_program_source(const TuringMachine& machine);
DedalusProgram build_tm_program(const TuringMachine& machine);

/// True iff some Accept fact occurs in `result`.
bool accepted(const TemporalInstance& result);

}  // namespace relnet
