#include <random>

#include "doctest.h"
#include "relnet/query.hpp"
#include "support/oracles.hpp"

using namespace relnet;
using relnet::testing::naive_datalog;

namespace {

DataElement E(const std::string& s) { return DataElement(s); }

// Random nonrecursive program with negation: P from the EDB, then the
// answer A from the EDB and P, negated atoms drawing their variables from
// the positive ones.
std::string random_negation_program(std::mt19937_64& rng) {
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  const char* vars[] = {"x", "y", "z"};
  std::string p = "P(x) :- E(x,y)";
  if (pick(2)) p += ", not U(y)";
  p += ".\n";
  std::string a;
  for (std::size_t r = 0; r < 1 + pick(2); ++r) {
    std::string x = vars[pick(3)], y = vars[pick(3)];
    a += "A(" + x + "," + y + ") :- E(" + x + "," + y + ")";
    if (pick(2)) a += ", not P(" + y + ")";
    if (pick(2)) a += ", not E(" + y + "," + x + ")";
    if (pick(3) == 0) a += ", " + x + " != " + y;
    a += ".\n";
  }
  if (pick(2)) a += "A(x,x) :- Adom(x), not U(x).\n";
  return p + a + "?- A.\n";
}

Instance random_edb(std::mt19937_64& rng, std::size_t domain) {
  Instance i;
  for (int k = 0; k < 6; ++k) {
    i.add("E", Tuple{E(std::to_string(rng() % domain)), E(std::to_string(rng() % domain))});
  }
  for (int k = 0; k < 2; ++k) i.add("U", Tuple{E(std::to_string(rng() % domain))});
  return i;
}

Relation answer_of(const Instance& idb, const std::string& name, std::size_t arity) {
  const Relation* r = idb.find(name);
  return r != nullptr ? *r : Relation(arity);
}

}  // namespace

TEST_CASE("transitive closure example") {
  QueryProgram q = parse_query("T(x,y) :- S(x,y).\nT(x,y) :- S(x,z), T(z,y).\n");
  CHECK(q.dialect() == Dialect::PositiveRecursive);
  Instance s = parse_instance("S(1,2). S(2,3).");
  CHECK(evaluate(q, s) == *parse_instance("T(1,2). T(2,3). T(1,3).").find("T"));
}

TEST_CASE("a contradictory body yields the empty answer") {
  QueryProgram q = parse_query("A() :- S(x), not S(x).");
  CHECK(evaluate(q, parse_instance("S(a). S(b).")).empty());
}

TEST_CASE("Adom enumerates the active domain") {
  QueryProgram q = parse_query("E(x) :- Adom(x), not S(x).");
  CHECK(evaluate(q, parse_instance("S(a). R(b).")) == Relation(1, {Tuple{E("b")}}));
}

TEST_CASE("dialect inference and restrictions") {
  CHECK(parse_query("A(x) :- S(x), not R(x).").dialect() == Dialect::UcqNegation);
  CHECK(parse_query("B(x) :- S(x).\nA(x) :- S(x), not B(x).\n?- A.").dialect() ==
        Dialect::NonrecursiveNegation);
  CHECK_THROWS_AS(parse_query("T(x) :- S(x), not T(x)."), SchemaError);
  CHECK_THROWS_AS(parse_query("A(x) :- S(x), not R(x).", Dialect::PositiveRecursive),
                  SchemaError);
  CHECK_THROWS_AS(parse_query("A(x) :- not S(x)."), SchemaError);
  CHECK_THROWS_AS(parse_query("A(x,y) :- S(x)."), SchemaError);
  CHECK_THROWS_AS(parse_query("A(x) :- S(x), x != y."), SchemaError);
  CHECK_THROWS_AS(parse_query("A(x) :- S(x"), ParseError);
}

TEST_CASE("rules round-trip through their text form") {
  QueryProgram q = parse_query("B(x) :- S(x,_).\nA(x,y) :- S(x,y), not B(y), x != y.\n?- A.");
  CHECK(parse_query(format_query(q)) == q);
}

TEST_CASE("positive programs agree with the naive fixpoint oracle") {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 60; ++round) {
    std::string text = relnet::testing::random_positive_program(rng, 3);
    CAPTURE(text);
    QueryProgram q = parse_query(text);
    Instance edb = random_edb(rng, 4);
    CHECK(evaluate(q, edb) == answer_of(naive_datalog(q.rules(), edb), "A", 2));
  }
}

TEST_CASE("nonrecursive programs with negation agree with the naive oracle") {
  std::mt19937_64 rng(12);
  for (int round = 0; round < 60; ++round) {
    std::string text = random_negation_program(rng);
    CAPTURE(text);
    QueryProgram q = parse_query(text);
    Instance edb = random_edb(rng, 4);
    CHECK(evaluate(q, edb) == answer_of(naive_datalog(q.rules(), edb), "A", 2));
  }
}

TEST_CASE("genericity and domain preservation") {
  std::mt19937_64 rng(13);
  for (int round = 0; round < 40; ++round) {
    std::string text = round % 2 == 0 ? relnet::testing::random_positive_program(rng, 3)
                                      : random_negation_program(rng);
    QueryProgram q = parse_query(text);
    Instance edb = random_edb(rng, 4);
    // A bijection from adom onto fresh elements.
    auto edb_dom = adom(edb);
    std::vector<DataElement> from(edb_dom.begin(), edb_dom.end());
    std::vector<DataElement> to;
    for (std::size_t k = 0; k < from.size(); ++k) to.push_back(E("v" + std::to_string(k)));
    std::shuffle(to.begin(), to.end(), rng);
    std::map<DataElement, DataElement> h;
    for (std::size_t k = 0; k < from.size(); ++k) h[from[k]] = to[k];

    Relation out = evaluate(q, edb);
    CHECK(evaluate(q, apply_permutation(h, edb)) == apply_permutation(h, out));
    auto dom = adom(edb);
    for (const auto& t : out) {
      for (DataElement e : t) CHECK(dom.contains(e));
    }
    CHECK(evaluate(q, edb) == out);
  }
}

TEST_CASE("apply_permutation on the transitive closure example") {
  QueryProgram q = parse_query("T(x,y) :- S(x,y).\nT(x,y) :- S(x,z), T(z,y).\n");
  Instance s = parse_instance("S(1,2). S(2,3).");
  std::map<DataElement, DataElement> h{{E("1"), E("x")}, {E("2"), E("y")}, {E("3"), E("z")}};
  CHECK(evaluate(q, apply_permutation(h, s)) == apply_permutation(h, evaluate(q, s)));
}

TEST_CASE("positive programs are monotone") {
  std::mt19937_64 rng(14);
  for (int round = 0; round < 40; ++round) {
    QueryProgram q = parse_query(relnet::testing::random_positive_program(rng, 3));
    Instance j = random_edb(rng, 4);
    Instance i = relnet::testing::random_subset(rng, j);
    CHECK(evaluate(q, i).subset_of(evaluate(q, j)));
  }
}

TEST_CASE("eval checks the input schema") {
  QueryProgram q = parse_query("A(x) :- S(x,y).");
  DatabaseSchema good{{"S", 2}}, bad{{"S", 3}}, missing{{"R", 1}};
  CHECK(eval(q, parse_instance("S(a,b)."), &good).find("A")->size() == 1);
  CHECK_THROWS_AS(eval(q, Instance{}, &bad), SchemaError);
  CHECK_THROWS_AS(eval(q, Instance{}, &missing), SchemaError);
  CHECK_THROWS_AS(evaluate(q, parse_instance("S(a).")), SchemaError);
}

TEST_CASE("the two reference evaluators agree on positive programs") {
  std::mt19937_64 rng(14);
  for (int round = 0; round < 40; ++round) {
    QueryProgram q = parse_query(relnet::testing::random_positive_program(rng, 3));
    Instance edb = random_edb(rng, 4);
    CHECK(relnet::testing::semi_naive_datalog(q.rules(), edb) == naive_datalog(q.rules(), edb));
  }
}
