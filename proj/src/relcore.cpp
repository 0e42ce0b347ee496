#include "relnet/relcore.hpp"

#include <algorithm>
#include <cstring>
#include <iterator>
#include <mutex>
#include <sstream>
#include <unordered_set>

#include "lexer.hpp"

namespace relnet {

struct DataElement::Entry {
  std::string text;
  bool numeric;
};

namespace {

struct EntryHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
  std::size_t operator()(const DataElement::Entry& e) const noexcept {
    return (*this)(std::string_view(e.text));
  }
};

struct EntryEq {
  using is_transparent = void;
  static std::string_view view(std::string_view s) { return s; }
  static std::string_view view(const DataElement::Entry& e) { return e.text; }
  template <class A, class B>
  bool operator()(const A& a, const B& b) const noexcept {
    return view(a) == view(b);
  }
};

// Node-based set: element addresses are stable, which DataElement relies on.
class Interner {
 public:
  const DataElement::Entry* intern(std::string_view name) {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(name);
    if (it != entries_.end()) return &*it;
    auto [ins, _] =
        entries_.insert(DataElement::Entry{std::string(name),
                                           detail::is_number(name)});
    return &*ins;
  }

 private:
  std::mutex mutex_;
  std::unordered_set<DataElement::Entry, EntryHash, EntryEq> entries_;
};

Interner& interner() {
  static Interner instance;
  return instance;
}

}  // namespace

DataElement::DataElement() : entry_(interner().intern("")) {}

DataElement::DataElement(std::string_view name)
    : entry_(interner().intern(name)) {}

const std::string& DataElement::name() const noexcept { return entry_->text; }

std::strong_ordering operator<=>(DataElement a, DataElement b) noexcept {
  if (a.entry_ == b.entry_) return std::strong_ordering::equal;
  const auto& x = *a.entry_;
  const auto& y = *b.entry_;
  if (x.numeric != y.numeric) {
    return x.numeric ? std::strong_ordering::less
                     : std::strong_ordering::greater;
  }
  if (x.numeric && x.text.size() != y.text.size()) {
    return x.text.size() <=> y.text.size();
  }
  int c = x.text.compare(y.text);
  return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
}

std::size_t TupleHash::operator()(const Tuple& t) const noexcept {
  std::size_t h = t.size();
  for (auto e : t) h = h * 1000003u ^ e.hash();
  return h;
}

std::string to_string(const Tuple& t) {
  std::string s = "(";
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i > 0) s += ',';
    s += t[i].name();
  }
  s += ')';
  return s;
}

// ---------------------------------------------------------------- Relation

Relation::Relation(std::size_t arity, std::vector<Tuple> rows)
    : arity_(arity), rows_(std::move(rows)) {
  for (const auto& t : rows_) check_arity(t);
  std::sort(rows_.begin(), rows_.end());
  rows_.erase(std::unique(rows_.begin(), rows_.end()), rows_.end());
}

void Relation::check_arity(const Tuple& t) const {
  if (t.size() != arity_) {
    throw SchemaError("tuple " + to_string(t) + " does not have arity " +
                      std::to_string(arity_));
  }
}

bool Relation::contains(const Tuple& t) const {
  return std::binary_search(rows_.begin(), rows_.end(), t);
}

bool Relation::insert(Tuple t) {
  check_arity(t);
  auto it = std::lower_bound(rows_.begin(), rows_.end(), t);
  if (it != rows_.end() && *it == t) return false;
  rows_.insert(it, std::move(t));
  return true;
}

void Relation::merge(const Relation& other) {
  if (other.empty()) return;
  if (other.arity_ != arity_ && !rows_.empty()) {
    throw SchemaError("cannot merge relations of arity " +
                      std::to_string(arity_) + " and " +
                      std::to_string(other.arity_));
  }
  if (rows_.empty()) {
    *this = other;
    return;
  }
  std::vector<Tuple> merged;
  merged.reserve(rows_.size() + other.rows_.size());
  std::set_union(rows_.begin(), rows_.end(), other.rows_.begin(),
                 other.rows_.end(), std::back_inserter(merged));
  rows_ = std::move(merged);
}

std::span<const Tuple> Relation::with_prefix(
    std::span<const DataElement> prefix) const {
  if (prefix.empty()) return rows_;
  auto k = prefix.size();
  auto lo = std::lower_bound(
      rows_.begin(), rows_.end(), prefix, [k](const Tuple& row, auto p) {
        return std::lexicographical_compare(row.begin(), row.begin() + k,
                                            p.begin(), p.end());
      });
  auto hi = lo;
  while (hi != rows_.end() && std::equal(prefix.begin(), prefix.end(), hi->begin())) {
    ++hi;
  }
  return {lo, hi};
}

bool Relation::subset_of(const Relation& other) const {
  if (rows_.empty()) return true;
  return std::includes(other.rows_.begin(), other.rows_.end(), rows_.begin(),
                       rows_.end());
}

namespace {

template <class Op>
Relation combine(const Relation& a, const Relation& b, Op op) {
  if (!a.empty() && !b.empty() && a.arity() != b.arity()) {
    throw SchemaError("relation arity mismatch: " + std::to_string(a.arity()) +
                      " vs " + std::to_string(b.arity()));
  }
  std::vector<Tuple> out;
  op(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  std::size_t arity = a.empty() ? b.arity() : a.arity();
  // Output of a set algorithm over sorted unique ranges is sorted and unique.
  return Relation(arity, std::move(out));
}

}  // namespace

Relation relation_union(const Relation& a, const Relation& b) {
  return combine(a, b, [](auto... args) { return std::set_union(args...); });
}

Relation relation_intersection(const Relation& a, const Relation& b) {
  return combine(a, b,
                 [](auto... args) { return std::set_intersection(args...); });
}

Relation relation_difference(const Relation& a, const Relation& b) {
  Relation r = combine(
      a, b, [](auto... args) { return std::set_difference(args...); });
  return r.empty() ? Relation(a.arity()) : r;
}

std::string to_string(const Fact& f) { return f.relation + to_string(f.args); }

// ---------------------------------------------------------------- Instance

bool Instance::add(const Fact& f) { return add(f.relation, f.args); }

bool Instance::add(std::string_view relation, Tuple args) {
  auto it = relations_.find(relation);
  if (it == relations_.end()) {
    it = relations_.emplace(std::string(relation), Relation(args.size())).first;
  } else if (it->second.arity() != args.size()) {
    throw SchemaError("relation " + std::string(relation) + " used with arity " +
                      std::to_string(args.size()) + " but has arity " +
                      std::to_string(it->second.arity()));
  }
  return it->second.insert(std::move(args));
}

void Instance::set(std::string_view relation, Relation r) {
  if (r.empty()) {
    erase(relation);
    return;
  }
  auto it = relations_.find(relation);
  if (it == relations_.end()) {
    relations_.emplace(std::string(relation), std::move(r));
  } else {
    it->second = std::move(r);
  }
}

void Instance::erase(std::string_view relation) {
  auto it = relations_.find(relation);
  if (it != relations_.end()) relations_.erase(it);
}

void Instance::merge(const Instance& other) {
  for (const auto& [name, rel] : other.relations_) {
    auto it = relations_.find(name);
    if (it == relations_.end()) {
      relations_.emplace(name, rel);
    } else {
      if (it->second.arity() != rel.arity()) {
        throw SchemaError("relation " + name + " has conflicting arities");
      }
      it->second.merge(rel);
    }
  }
}

const Relation* Instance::find(std::string_view relation) const {
  auto it = relations_.find(relation);
  return it == relations_.end() ? nullptr : &it->second;
}

bool Instance::contains(const Fact& f) const {
  const Relation* r = find(f.relation);
  return r != nullptr && r->arity() == f.args.size() && r->contains(f.args);
}

bool Instance::subset_of(const Instance& other) const {
  for (const auto& [name, rel] : relations_) {
    const Relation* o = other.find(name);
    if (o == nullptr || o->arity() != rel.arity() || !rel.subset_of(*o)) {
      return false;
    }
  }
  return true;
}

std::size_t Instance::size() const {
  std::size_t n = 0;
  for (const auto& [_, rel] : relations_) n += rel.size();
  return n;
}

std::vector<Fact> Instance::facts() const {
  std::vector<Fact> out;
  out.reserve(size());
  for (const auto& [name, rel] : relations_) {
    for (const auto& t : rel) out.push_back(Fact{name, t});
  }
  return out;
}

Instance Instance::restrict_to(const DatabaseSchema& schema) const {
  Instance out;
  for (const auto& [name, rel] : relations_) {
    if (schema.contains(name)) out.relations_.emplace(name, rel);
  }
  return out;
}

void Instance::check_conforms(const DatabaseSchema& schema) const {
  for (const auto& [name, rel] : relations_) {
    auto it = schema.find(name);
    if (it == schema.end()) {
      throw SchemaError("relation " + name + " is not in the schema");
    }
    if (it->second != rel.arity()) {
      throw SchemaError("relation " + name + " has arity " +
                        std::to_string(rel.arity()) + ", schema says " +
                        std::to_string(it->second));
    }
  }
}

Instance instance_union(const Instance& a, const Instance& b) {
  Instance out = a;
  out.merge(b);
  return out;
}

Instance instance_difference(const Instance& a, const Instance& b) {
  Instance out;
  for (const auto& [name, rel] : a.relations()) {
    const Relation* o = b.find(name);
    out.set(name, o == nullptr ? rel : relation_difference(rel, *o));
  }
  return out;
}

std::set<DataElement> adom(const Instance& input) {
  std::set<DataElement> out;
  for (const auto& [_, rel] : input.relations()) {
    for (const auto& t : rel) out.insert(t.begin(), t.end());
  }
  return out;
}

Relation apply_permutation(const std::map<DataElement, DataElement>& h,
                           const Relation& input) {
  std::vector<Tuple> rows;
  rows.reserve(input.size());
  for (const auto& t : input) {
    Tuple r;
    for (auto e : t) {
      auto it = h.find(e);
      r.push_back(it == h.end() ? e : it->second);
    }
    rows.push_back(std::move(r));
  }
  return Relation(input.arity(), std::move(rows));
}

Instance apply_permutation(const std::map<DataElement, DataElement>& h,
                           const Instance& input) {
  std::set<DataElement> image;
  auto domain = adom(input);
  for (auto e : domain) {
    auto it = h.find(e);
    image.insert(it == h.end() ? e : it->second);
  }
  if (image.size() != domain.size()) {
    throw PreconditionError("renaming is not injective on the active domain");
  }
  Instance out;
  for (const auto& [name, rel] : input.relations()) {
    out.set(name, apply_permutation(h, rel));
  }
  return out;
}

// ------------------------------------------------------------------- text

namespace {

Fact parse_fact_tokens(detail::TokenStream& ts) {
  Fact f;
  f.relation = ts.expect(detail::Tok::Word, "relation name").text;
  ts.expect(detail::Tok::LParen);
  if (!ts.at(detail::Tok::RParen)) {
    do {
      f.args.emplace_back(ts.expect(detail::Tok::Word, "data element").text);
    } while (ts.accept(detail::Tok::Comma));
  }
  ts.expect(detail::Tok::RParen);
  return f;
}

}  // namespace

Instance parse_instance(std::string_view text) {
  detail::TokenStream ts(detail::tokenize(text));
  Instance out;
  while (!ts.at(detail::Tok::End)) {
    const auto& start = ts.peek();
    Fact f = parse_fact_tokens(ts);
    ts.expect(detail::Tok::Dot);
    try {
      out.add(f);
    } catch (const SchemaError& e) {
      detail::TokenStream::fail_at(start, e.what());
    }
  }
  return out;
}

Fact parse_fact(std::string_view text) {
  detail::TokenStream ts(detail::tokenize(text));
  Fact f = parse_fact_tokens(ts);
  ts.accept(detail::Tok::Dot);
  ts.expect(detail::Tok::End);
  return f;
}

std::string format_instance(const Instance& instance) {
  std::string out;
  for (const auto& f : instance.facts()) {
    out += to_string(f);
    out += ".\n";
  }
  return out;
}

}  // namespace relnet
