#pragma once

// Relational transducers: schemas, programs (one query per message and
// memory relation plus an output query) and the deterministic local
// transition.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "relnet/query.hpp"
#include "relnet/relcore.hpp"

namespace relnet {

inline constexpr std::string_view kId = "Id";
inline constexpr std::string_view kAll = "All";
inline constexpr std::string_view kOut = "Out";

struct TransducerSchema {
  DatabaseSchema input;
  DatabaseSchema message;
  DatabaseSchema memory;
  std::size_t output_arity = 0;

  /// Always {Id/1, All/1}.
  static const DatabaseSchema& system();

  DatabaseSchema combined() const;  // input + system + message + memory
  DatabaseSchema state() const;     // input + system + memory

  /// Throws SchemaError unless the four schemas are pairwise disjoint and
  /// avoid the reserved names Id, All, Adom and Out.
  void validate() const;

  friend bool operator==(const TransducerSchema&, const TransducerSchema&) = default;
};

struct ProgramFlags {
  bool oblivious = true;     // no rule mentions Id or All
  bool uses_id = false;
  bool uses_all = false;
  bool inflationary = true;  // every delete query is the empty program

  friend bool operator==(const ProgramFlags&, const ProgramFlags&) = default;
};

class TransducerProgram {
 public:
  using QueryMap = std::map<std::string, QueryProgram, std::less<>>;

  /// Missing queries default to the empty program. Flags are derived from
  /// the rules. Throws SchemaError on any arity or schema violation.
  static TransducerProgram make(TransducerSchema schema, QueryMap send,
                                QueryMap insert, QueryMap remove,
                                std::optional<QueryProgram> output);

  const TransducerSchema& schema() const noexcept { return schema_; }
  const ProgramFlags& flags() const noexcept { return flags_; }

  const QueryProgram& send_query(std::string_view relation) const;
  const QueryProgram& insert_query(std::string_view relation) const;
  const QueryProgram& delete_query(std::string_view relation) const;
  const QueryProgram& output_query() const noexcept { return output_; }

  friend bool operator==(const TransducerProgram& a, const TransducerProgram& b) {
    return a.schema_ == b.schema_ && a.send_ == b.send_ && a.insert_ == b.insert_ &&
           a.delete_ == b.delete_ && a.output_ == b.output_;
  }

 private:
  TransducerProgram() : output_(std::string(kOut), 0) {}

  TransducerSchema schema_;
  QueryMap send_;
  QueryMap insert_;
  QueryMap delete_;
  QueryProgram output_;
  ProgramFlags flags_;
};

/// A transducer state: input, system and memory relations. Id holds exactly
/// one node and All contains it.
class LocalState {
 public:
  LocalState(const Instance& input, DataElement id,
             std::span<const DataElement> all);

  /// Validates the Id/All invariants of an arbitrary instance.
  static LocalState from_instance(Instance instance);

  const Instance& instance() const noexcept { return instance_; }
  DataElement id() const;
  const Relation* find(std::string_view relation) const {
    return instance_.find(relation);
  }

  /// Replaces a memory relation. Refuses the system relations.
  void set_relation(std::string_view relation, Relation r);

  friend bool operator==(const LocalState&, const LocalState&) = default;
  friend bool operator<(const LocalState& a, const LocalState& b) {
    return a.instance_ < b.instance_;
  }

 private:
  explicit LocalState(Instance instance) : instance_(std::move(instance)) {}

  Instance instance_;
};

struct LocalTransition {
  LocalState before;
  Instance received;
  Instance sent;
  Relation output;
  LocalState after;
};

/// (ins \ del) + (ins & del & old) + (old \ (ins + del)): conflicting
/// inserts and deletes leave a tuple as it was.
Relation memory_update(const Relation& old, const Relation& ins,
                       const Relation& del);

struct StepEffects {
  Instance sent;
  Relation output;
};

/// Performs one transition in place and returns what it sent and output.
StepEffects advance(const TransducerProgram& program, LocalState& state,
                    const Instance& received);

LocalTransition step(const TransducerProgram& program, const LocalState& state,
                     const Instance& received);

/// Program whose memory relation `relation` is assigned `assigned` on every
/// transition: insert query `assigned`, delete query a copy of `relation`.
TransducerProgram make_assignment_program(const TransducerSchema& schema,
                                          const std::string& relation,
                                          const QueryProgram& assigned);

/// Checks after(relation) = assigned(I') for each (state, received) sample.
bool assign_emulation_check(
    const TransducerProgram& program, std::string_view relation,
    const QueryProgram& assigned,
    std::span<const std::pair<LocalState, Instance>> samples);

/// Transducer DSL:
///   schema { in: S/2; msg: M/2; mem: R/2, T/2; out: 2 }
///   send M { ... }  insert T { ... }  delete T { ... }  output { Out(..) :- ... }
TransducerProgram parse_program(std::string_view text);
std::string format_program(const TransducerProgram& program);

}  // namespace relnet
