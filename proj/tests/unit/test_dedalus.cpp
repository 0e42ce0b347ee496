#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "relnet/dedalus.hpp"
#include "support/oracles.hpp"

using namespace relnet;

namespace {

DataElement E(const std::string& s) { return DataElement(s); }

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const TuringMachine& ab_machine() {
  static const TuringMachine m = parse_turing_machine(read_file(RELNET_DATA_DIR "/ab.tm"));
  return m;
}

const DedalusProgram& ab_program() {
  static const DedalusProgram p = build_tm_program(ab_machine());
  return p;
}

bool derives(const TemporalInstance& r, const std::string& rel) {
  for (const auto& [_, slice] : r.slices()) {
    if (slice.find(rel) != nullptr) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("temporal instances") {
  auto t = parse_temporal_instance("r(a)@0. r(b)@2. start()@0.");
  CHECK(t.size() == 3);
  CHECK(t.max_time() == std::optional<std::size_t>(2));
  CHECK(t.slice(1).empty());
  CHECK(t.slice(0).size() == 2);
  CHECK(t.flatten().size() == 3);
  CHECK(parse_temporal_instance(format_temporal_instance(t)) == t);
  CHECK(to_string(TemporalFact{"R", Tuple{E("a"), E("b")}, 3}) == "R(a,b)@3");
  CHECK_THROWS_AS(parse_temporal_instance("r(a)."), ParseError);
  CHECK_THROWS_AS(parse_temporal_instance("r(a)@x."), ParseError);
  CHECK_THROWS_AS(parse_temporal_instance("r(a)@-1."), ParseError);
}

TEST_CASE("dedalus evaluation examples") {
  SUBCASE("persistence") {
    auto p = parse_dedalus("a(X,T+1) :- a(X,T).");
    REQUIRE(p.rules().size() == 1);
    CHECK(p.rules()[0].inductive);
    auto r = eval_dedalus(p, parse_temporal_instance("a(c)@0."), 7);
    for (std::size_t n = 0; n <= 7; ++n) CHECK(r.slice(n) == parse_instance("a(c)."));
    CHECK(r.max_time() == std::optional<std::size_t>(7));
  }
  SUBCASE("empty program") {
    auto in = parse_temporal_instance("a(c)@0. b(d,e)@4.");
    CHECK(eval_dedalus(parse_dedalus(""), in, 10) == in);
  }
  SUBCASE("deductive copy stays in its slice") {
    auto p = parse_dedalus("b(X,T) :- a(X,T).");
    CHECK_FALSE(p.rules()[0].inductive);
    auto r = eval_dedalus(p, parse_temporal_instance("a(c)@3."), 6);
    CHECK(r == parse_temporal_instance("a(c)@3. b(c)@3."));
  }
  SUBCASE("negation within a slice") {
    auto p = parse_dedalus("b(X,T) :- a(X,T), not c(X,T).\nc(X,T+1) :- a(X,T).");
    auto r = eval_dedalus(p, parse_temporal_instance("a(x)@0. a(x)@1."), 2);
    CHECK(r.slice(0).contains(Fact{"b", Tuple{E("x")}}));
    CHECK_FALSE(r.slice(1).contains(Fact{"b", Tuple{E("x")}}));
  }
  SUBCASE("entanglement copies the timestamp into data") {
    auto p = parse_dedalus(read_file(RELNET_DATA_DIR "/counter.ded"));
    auto r = eval_dedalus(p, parse_temporal_instance("start()@0."), 4);
    for (std::size_t n = 0; n <= 4; ++n) {
      CHECK(r.slice(n).contains(Fact{"c", Tuple{DataElement(std::to_string(n))}}));
    }
  }
}

TEST_CASE("dedalus parse errors and schema errors") {
  CHECK_THROWS_AS(parse_dedalus("a(X,T+2) :- a(X,T)."), ParseError);
  CHECK_THROWS_AS(parse_dedalus("a(X,T) :- a(X,S)."), ParseError);
  CHECK_THROWS_AS(parse_dedalus("a(X,T+1) :- a(X,T+1)."), ParseError);
  CHECK_THROWS(parse_dedalus("a(X,T) :- b(X,T).\na(X,Y,T) :- b(X,T), b(Y,T)."));
  CHECK_THROWS_AS(parse_dedalus("p(X,T) :- q(X,T), not p(X,T)."), SchemaError);
  // Negation through time is fine.
  CHECK_NOTHROW(parse_dedalus("p(X,T+1) :- q(X,T), not p(X,T)."));
  const char* text = "b(X,T) :- a(X,T), not c(X,T).\nc(X,T+1) :- a(X,T), X != T.\n";
  auto p = parse_dedalus(text);
  CHECK(parse_dedalus(format_dedalus(p)) == p);
}

TEST_CASE("eval is a pure function of its arguments") {
  auto p = build_tm_program(ab_machine());
  auto in = word_structure("abba");
  CHECK(eval_dedalus(p, in, 30) == eval_dedalus(p, in, 30));
}

TEST_CASE("eventual consistency") {
  auto persist = parse_dedalus(read_file(RELNET_DATA_DIR "/persist.ded"));
  auto r = check_eventual_consistency(persist, parse_temporal_instance("r(a)@0. r(b)@2."), 50);
  CHECK(r.stable);
  CHECK(r.stabilization_time == std::optional<std::size_t>(3));
  auto counter = parse_dedalus(read_file(RELNET_DATA_DIR "/counter.ded"));
  auto c = check_eventual_consistency(counter, parse_temporal_instance("start()@0."), 60);
  CHECK_FALSE(c.stable);
  CHECK_FALSE(c.stabilization_time.has_value());
  CHECK_THROWS_AS(check_eventual_consistency(counter, TemporalInstance{}, 0), PreconditionError);
}

TEST_CASE("turing machine files") {
  const auto& m = ab_machine();
  CHECK(m.states.size() == 4);
  CHECK(parse_turing_machine(format_turing_machine(m)) == m);
  CHECK_THROWS(parse_turing_machine("states q\nalphabet a\nstart z\n"));
  CHECK_THROWS_AS(parse_turing_machine("delta q a\n"), ParseError);
}

TEST_CASE("word structures") {
  auto w = word_structure("ab");
  CHECK(w == parse_temporal_instance("Tape(1,2)@0. Begin(1)@0. End(2)@0. a(1)@0. b(2)@0."));
  CHECK(word_structure("ab", 3).max_time() == std::optional<std::size_t>(3));
}

TEST_CASE("the compiled machine agrees with a direct interpreter") {
  for (std::size_t len = 2; len <= 5; ++len) {
    for (const auto& word : relnet::testing::words_of_length({'a', 'b'}, len)) {
      auto expect = relnet::testing::run_tm(ab_machine(), word, 1000);
      REQUIRE(expect != relnet::testing::TmOutcome::Running);
      auto r = eval_dedalus(ab_program(), word_structure(word), 3 * len + 8);
      CHECK_MESSAGE(accepted(r) == (expect == relnet::testing::TmOutcome::Accept), word);
    }
  }
}

TEST_CASE("a machine that writes, moves left and grows the tape") {
  // Accepts words with a b after the first letter: mark cell 1, run past
  // the input onto two fresh cells, then scan back to the mark.
  const std::string text = R"(
states s0 s r l acc
alphabet a b
symbols a b A x y _
blank _
start s0
accept acc
delta s0 a s A R
delta s0 b s A R
delta s a s a R
delta s b s b R
delta s _ r x R
delta r _ l y L
delta l y l y L
delta l x l x L
delta l a l a L
delta l b acc b S
)";
  CHECK_THROWS(parse_turing_machine(text + "delta l A nowhere A S\n"));
  TuringMachine m = parse_turing_machine(text);
  auto p = build_tm_program(m);
  for (std::size_t len = 2; len <= 4; ++len) {
    for (const auto& word : relnet::testing::words_of_length({'a', 'b'}, len)) {
      auto expect = relnet::testing::run_tm(m, word, 1000);
      REQUIRE(expect != relnet::testing::TmOutcome::Running);
      auto r = eval_dedalus(p, word_structure(word), 4 * len + 12);
      CHECK_MESSAGE(accepted(r) == (expect == relnet::testing::TmOutcome::Accept), word);
    }
  }
}

TEST_CASE("spurious inputs are accepted") {
  auto run = [](const TemporalInstance& in) { return eval_dedalus(ab_program(), in, 20); };
  SUBCASE("two Begin facts") {
    auto in = word_structure("aa");
    in.add("Begin", Tuple{E("5")}, 0);
    auto r = run(in);
    CHECK(derives(r, "SpurA"));
    CHECK(accepted(r));
  }
  SUBCASE("a cell with two labels") {
    auto in = word_structure("aa");
    in.add("b", Tuple{E("1")}, 0);
    auto r = run(in);
    CHECK(derives(r, "SpurB"));
    CHECK_FALSE(derives(r, "SpurA"));
    CHECK_FALSE(derives(r, "SpurC"));
    CHECK_FALSE(derives(r, "SpurD"));
    CHECK(accepted(r));
  }
  SUBCASE("a tape cycle") {
    auto in = word_structure("aa");
    in.add("Tape", Tuple{E("2"), E("1")}, 0);
    auto r = run(in);
    CHECK(derives(r, "SpurC"));
    CHECK_FALSE(derives(r, "SpurB"));
    CHECK_FALSE(derives(r, "SpurD"));
    CHECK(accepted(r));
  }
  SUBCASE("a labeled cell off the tape") {
    auto in = word_structure("aa");
    in.add("a", Tuple{E("7")}, 0);
    auto r = run(in);
    CHECK(derives(r, "SpurD"));
    CHECK_FALSE(derives(r, "SpurB"));
    CHECK_FALSE(derives(r, "SpurC"));
    CHECK(accepted(r));
  }
  SUBCASE("spurious facts arriving late still count") {
    auto in = word_structure("aa");
    in.add("Begin", Tuple{E("9")}, 6);
    auto r = run(in);
    CHECK(accepted(r));
  }
  SUBCASE("an input that is not a word structure at all") {
    CHECK_FALSE(accepted(run(TemporalInstance{})));
    CHECK_FALSE(accepted(run(parse_temporal_instance("a(1)@0."))));
  }
}

TEST_CASE("adding facts never removes acceptance") {
  std::mt19937_64 rng(51);
  const std::vector<std::string> rels{"Tape", "Begin", "End", "a", "b"};
  for (const char* word : {"ab", "aab", "bab"}) {
    for (int k = 0; k < 8; ++k) {
      auto in = word_structure(word);
      for (int extra = 0; extra < 2; ++extra) {
        const std::string& rel = rels[rng() % rels.size()];
        auto cell = [&] { return E(std::to_string(1 + rng() % 5)); };
        Tuple args = rel == "Tape" ? Tuple{cell(), cell()} : Tuple{cell()};
        in.add(rel, args, rng() % 3);
      }
      CHECK_MESSAGE(accepted(eval_dedalus(ab_program(), in, 25)), format_temporal_instance(in));
    }
  }
}

TEST_CASE("accepted runs stabilize") {
  for (const char* word : {"ab", "aab", "abab", "bbab"}) {
    auto r = check_eventual_consistency(ab_program(), word_structure(word), 60);
    CHECK_MESSAGE(r.stable, word);
  }
}
