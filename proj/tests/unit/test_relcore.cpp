#include <random>

#include "doctest.h"
#include "relnet/relcore.hpp"

using namespace relnet;

namespace {
DataElement E(const char* s) { return DataElement(s); }
}  // namespace

TEST_CASE("data elements are interned and canonically ordered") {
  CHECK(E("a") == E("a"));
  CHECK(E("a") != E("b"));
  CHECK(E("2") < E("10"));
  CHECK(E("10") < E("a"));
  CHECK(E("a") < E("b"));
}

TEST_CASE("adom collects exactly the occurring elements") {
  CHECK(adom(Instance{}).empty());
  CHECK(adom(parse_instance("R(a,b).")) == std::set<DataElement>{E("a"), E("b")});
  CHECK(adom(parse_instance("R(a,a). S(c).")) == std::set<DataElement>{E("a"), E("c")});
}

TEST_CASE("instances have set semantics and compare by facts") {
  Instance i;
  CHECK(i.add("R", Tuple{E("a")}));
  CHECK_FALSE(i.add("R", Tuple{E("a")}));
  CHECK(i.size() == 1);
  CHECK_THROWS_AS(i.add("R", Tuple{E("a"), E("b")}), SchemaError);
  Instance j;
  j.set("R", Relation(1));
  CHECK(j.empty());
  CHECK(j == Instance{});
}

TEST_CASE("instance text format round-trips and reports locations") {
  Instance i = parse_instance("% comment\nR(a,b).\nS().\nR(1,2).\n");
  CHECK(i.size() == 3);
  CHECK(parse_instance(format_instance(i)) == i);
  try {
    parse_instance("R(a,b).\nR(a.\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_instance("R(a). R(a,b)."), ParseError);
}

TEST_CASE("apply_permutation renames pointwise") {
  Instance i = parse_instance("R(a,b).");
  CHECK(apply_permutation({}, i) == i);
  CHECK(apply_permutation({{E("a"), E("b")}, {E("b"), E("a")}}, i) == parse_instance("R(b,a)."));
  CHECK_THROWS_AS(apply_permutation({{E("a"), E("b")}}, i), PreconditionError);
}

TEST_CASE("relation set operations agree with std::set") {
  std::mt19937_64 rng(3);
  for (int round = 0; round < 50; ++round) {
    std::set<Tuple> a, b;
    Relation ra(2), rb(2);
    for (int k = 0; k < 8; ++k) {
      Tuple t{DataElement(std::to_string(rng() % 3)), DataElement(std::to_string(rng() % 3))};
      if (rng() & 1U) {
        a.insert(t);
        ra.insert(t);
      } else {
        b.insert(t);
        rb.insert(t);
      }
    }
    std::set<Tuple> u = a, in, d;
    u.insert(b.begin(), b.end());
    for (const auto& t : a) (b.contains(t) ? in : d).insert(t);
    CHECK(relation_union(ra, rb).rows() == std::vector<Tuple>(u.begin(), u.end()));
    CHECK(relation_intersection(ra, rb).rows() == std::vector<Tuple>(in.begin(), in.end()));
    CHECK(relation_difference(ra, rb).rows() == std::vector<Tuple>(d.begin(), d.end()));
  }
}

TEST_CASE("with_prefix selects matching rows") {
  Relation r(2, {Tuple{E("1"), E("2")}, Tuple{E("1"), E("3")}, Tuple{E("2"), E("1")}});
  Tuple p{E("1")};
  CHECK(r.with_prefix({p.data(), p.size()}).size() == 2);
  Tuple q{E("3")};
  CHECK(r.with_prefix({q.data(), q.size()}).empty());
}
