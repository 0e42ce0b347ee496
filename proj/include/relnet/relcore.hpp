#pragma once

// Facts, relations and instances over an interned universe of atomic data
// elements.

#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/container/small_vector.hpp>

#include "relnet/error.hpp"

namespace relnet {

/// An atomic data element. Elements are interned, so equality and hashing
/// are pointer operations. The total order is canonical (numeric names
/// first, by value; then the rest lexicographically) and exists for
/// printing and deterministic iteration only.
class DataElement {
 public:
  DataElement();
  explicit DataElement(std::string_view name);

  const std::string& name() const noexcept;
  std::size_t hash() const noexcept {
    return std::hash<const void*>{}(entry_);
  }

  friend bool operator==(DataElement a, DataElement b) noexcept {
    return a.entry_ == b.entry_;
  }
  friend std::strong_ordering operator<=>(DataElement a,
                                          DataElement b) noexcept;

  struct Entry;

 private:
  const Entry* entry_;
};

using Tuple = boost::container::small_vector<DataElement, 4>;

struct TupleHash {
  std::size_t operator()(const Tuple& t) const noexcept;
};

std::string to_string(const Tuple& t);  // "(a,b)"

/// A finite relation of fixed arity, stored as a sorted duplicate-free
/// vector in canonical tuple order.
class Relation {
 public:
  using const_iterator = std::vector<Tuple>::const_iterator;

  Relation() = default;
  explicit Relation(std::size_t arity) : arity_(arity) {}
  Relation(std::size_t arity, std::vector<Tuple> rows);

  std::size_t arity() const noexcept { return arity_; }
  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }
  const_iterator begin() const noexcept { return rows_.begin(); }
  const_iterator end() const noexcept { return rows_.end(); }
  const std::vector<Tuple>& rows() const noexcept { return rows_; }

  bool contains(const Tuple& t) const;
  bool insert(Tuple t);
  void merge(const Relation& other);

  /// Rows whose first `prefix.size()` components equal `prefix`.
  std::span<const Tuple> with_prefix(std::span<const DataElement> prefix) const;

  bool subset_of(const Relation& other) const;

  friend bool operator==(const Relation& a, const Relation& b) {
    return a.arity_ == b.arity_ && a.rows_ == b.rows_;
  }
  friend bool operator<(const Relation& a, const Relation& b) {
    if (a.arity_ != b.arity_) return a.arity_ < b.arity_;
    return a.rows_ < b.rows_;
  }

 private:
  void check_arity(const Tuple& t) const;

  std::size_t arity_ = 0;
  std::vector<Tuple> rows_;
};

Relation relation_union(const Relation& a, const Relation& b);
Relation relation_intersection(const Relation& a, const Relation& b);
Relation relation_difference(const Relation& a, const Relation& b);

struct Fact {
  std::string relation;
  Tuple args;

  friend bool operator==(const Fact&, const Fact&) = default;
  friend bool operator<(const Fact& a, const Fact& b) {
    if (a.relation != b.relation) return a.relation < b.relation;
    return a.args < b.args;
  }
};

std::string to_string(const Fact& f);  // "R(a,b)"

/// Relation name -> arity.
using DatabaseSchema = std::map<std::string, std::size_t, std::less<>>;

/// A finite set of facts. Only nonempty relations are stored, so two
/// instances holding the same facts compare equal.
class Instance {
 public:
  using RelationMap = std::map<std::string, Relation, std::less<>>;

  Instance() = default;

  bool add(const Fact& f);
  bool add(std::string_view relation, Tuple args);
  void set(std::string_view relation, Relation r);
  void erase(std::string_view relation);
  void merge(const Instance& other);

  const Relation* find(std::string_view relation) const;
  bool contains(const Fact& f) const;
  bool subset_of(const Instance& other) const;

  std::size_t size() const;
  bool empty() const noexcept { return relations_.empty(); }
  const RelationMap& relations() const noexcept { return relations_; }

  /// Facts in canonical order.
  std::vector<Fact> facts() const;

  /// Keeps only relations named in `schema`.
  Instance restrict_to(const DatabaseSchema& schema) const;

  /// Throws SchemaError unless every fact names a relation of `schema`
  /// with matching arity.
  void check_conforms(const DatabaseSchema& schema) const;

  friend bool operator==(const Instance&, const Instance&) = default;
  friend bool operator<(const Instance& a, const Instance& b) {
    return a.relations_ < b.relations_;
  }

 private:
  RelationMap relations_;
};

Instance instance_union(const Instance& a, const Instance& b);
Instance instance_difference(const Instance& a, const Instance& b);

/// The data elements occurring in `input`.
std::set<DataElement> adom(const Instance& input);

/// Renames every element of `input` through `h`. Elements missing from `h`
/// are fixed. Throws PreconditionError when the resulting map is not
/// injective on adom(input).
Instance apply_permutation(const std::map<DataElement, DataElement>& h,
                           const Instance& input);
Relation apply_permutation(const std::map<DataElement, DataElement>& h,
                           const Relation& input);

/// Parses the instance text format: one `R(a,b).` per fact, `%` comments.
Instance parse_instance(std::string_view text);
Fact parse_fact(std::string_view text);
std::string format_instance(const Instance& instance);

}  // namespace relnet

template <>
struct std::hash<relnet::DataElement> {
  std::size_t operator()(relnet::DataElement e) const noexcept {
    return e.hash();
  }
};
