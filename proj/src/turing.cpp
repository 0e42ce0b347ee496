#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "relnet/dedalus.hpp"

namespace relnet {

namespace {

// Relation and predicate names the compiled program uses for itself.
const std::set<std::string, std::less<>>& reserved_names() {
  static const std::set<std::string, std::less<>> names{
      "Tape",   "Begin",   "End",         "Lab",        "Path",    "Word",     "Reach",
      "Elem",   "Spur", "SpurA", "SpurB", "SpurC", "SpurD",    "Start",       "Started",    "SimTape", "SimBegin", "SimEnd",
      "TapeExt", "ExtTape", "ExtNext",    "ExtTapeNext", "Accept", "Run",      "Moving",
      "MovingExt", "Adom", "not"};
  return names;
}

bool is_identifier(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
  });
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

char move_char(Move m) {
  switch (m) {
    case Move::Left: return 'L';
    case Move::Right: return 'R';
    case Move::Stay: return 'S';
  }
  return 'S';
}

}  // namespace

void TuringMachine::validate() const {
  auto fail = [](const std::string& m) { throw SchemaError("turing machine: " + m); };
  for (const auto& q : states) {
    if (!is_identifier(q)) fail("state '" + q + "' is not an identifier");
  }
  for (const auto& a : tape_alphabet) {
    if (!is_identifier(a)) fail("symbol '" + a + "' is not an identifier");
  }
  for (const auto& a : alphabet) {
    if (a.size() != 1) fail("input letter '" + a + "' must be a single character");
    if (a == "_" || !is_identifier(a)) fail("input letter '" + a + "' is not usable as a relation name");
    if (reserved_names().contains(a)) fail("input letter '" + a + "' clashes with a reserved name");
    if (a == blank) fail("the blank cannot be an input letter");
    if (!contains(tape_alphabet, a)) fail("letter '" + a + "' missing from the tape alphabet");
  }
  if (!contains(tape_alphabet, blank)) fail("blank missing from the tape alphabet");
  if (!contains(states, start)) fail("start state '" + start + "' is not declared");
  for (const auto& q : accepting) {
    if (!contains(states, q)) fail("accepting state '" + q + "' is not declared");
  }
  for (const auto& [key, tr] : delta) {
    if (!contains(states, key.first)) fail("undeclared state '" + key.first + "'");
    if (!contains(states, tr.next_state)) fail("undeclared state '" + tr.next_state + "'");
    if (!contains(tape_alphabet, key.second)) fail("undeclared symbol '" + key.second + "'");
    if (!contains(tape_alphabet, tr.write)) fail("undeclared symbol '" + tr.write + "'");
  }
}

TuringMachine parse_turing_machine(std::string_view text) {
  TuringMachine m;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  bool have_start = false;
  std::vector<std::string> extra;  // symbols from `symbols` and delta
  auto fail = [&](const std::string& msg) { throw ParseError(msg, lineno, 1); };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto c = line.find_first_of("%#"); c != std::string::npos) line.erase(c);
    std::istringstream words(line);
    std::vector<std::string> w;
    for (std::string s; words >> s;) w.push_back(s);
    if (w.empty()) continue;
    const std::string& key = w[0];
    std::vector<std::string> rest(w.begin() + 1, w.end());
    if (key == "states") {
      m.states.insert(m.states.end(), rest.begin(), rest.end());
    } else if (key == "alphabet") {
      m.alphabet.insert(m.alphabet.end(), rest.begin(), rest.end());
    } else if (key == "symbols") {
      extra.insert(extra.end(), rest.begin(), rest.end());
    } else if (key == "blank") {
      if (rest.size() != 1) fail("blank takes one symbol");
      m.blank = rest[0];
    } else if (key == "start") {
      if (rest.size() != 1) fail("start takes one state");
      m.start = rest[0];
      have_start = true;
    } else if (key == "accept") {
      m.accepting.insert(m.accepting.end(), rest.begin(), rest.end());
    } else if (key == "delta") {
      if (rest.size() != 5) fail("delta takes: state symbol next-state write-symbol L|R|S");
      TmTransition t{rest[2], rest[3], Move::Right};
      if (rest[4] == "L") {
        t.move = Move::Left;
      } else if (rest[4] == "R") {
        t.move = Move::Right;
      } else if (rest[4] == "S") {
        t.move = Move::Stay;
      } else {
        fail("move must be L, R or S, found '" + rest[4] + "'");
      }
      if (!m.delta.emplace(std::pair{rest[0], rest[1]}, t).second) {
        fail("second transition for (" + rest[0] + ", " + rest[1] + ")");
      }
      extra.push_back(rest[1]);
      extra.push_back(rest[3]);
    } else {
      fail("unknown directive '" + key + "'");
    }
  }
  if (!have_start) throw ParseError("missing start state", lineno, 1);
  auto add_symbol = [&](const std::string& s) {
    if (!contains(m.tape_alphabet, s)) m.tape_alphabet.push_back(s);
  };
  for (const auto& a : m.alphabet) add_symbol(a);
  add_symbol(m.blank);
  for (const auto& a : extra) add_symbol(a);
  m.validate();
  return m;
}

std::string format_turing_machine(const TuringMachine& m) {
  std::ostringstream out;
  auto list = [&](const char* key, const std::vector<std::string>& v) {
    out << key;
    for (const auto& s : v) out << ' ' << s;
    out << '\n';
  };
  list("states", m.states);
  list("alphabet", m.alphabet);
  std::vector<std::string> extra;
  for (const auto& s : m.tape_alphabet) {
    if (!contains(m.alphabet, s) && s != m.blank) extra.push_back(s);
  }
  if (!extra.empty()) list("symbols", extra);
  out << "blank " << m.blank << '\n';
  out << "start " << m.start << '\n';
  list("accept", m.accepting);
  for (const auto& [key, t] : m.delta) {
    out << "delta " << key.first << ' ' << key.second << ' ' << t.next_state << ' ' << t.write
        << ' ' << move_char(t.move) << '\n';
  }
  return out.str();
}

TemporalInstance word_structure(std::string_view word, std::size_t time) {
  TemporalInstance out;
  auto cell = [](std::size_t i) { return DataElement(std::to_string(i)); };
  for (std::size_t i = 1; i <= word.size(); ++i) {
    out.add(std::string(1, word[i - 1]), Tuple{cell(i)}, time);
    if (i < word.size()) out.add("Tape", Tuple{cell(i), cell(i + 1)}, time);
  }
  if (!word.empty()) {
    out.add("Begin", Tuple{cell(1)}, time);
    out.add("End", Tuple{cell(word.size())}, time);
  }
  return out;
}

std::string tm_program_source(const TuringMachine& m) {
  m.validate();
  std::ostringstream p;
  const auto& letters = m.alphabet;

  p << "% inputs persist\n"
       "Tape(x,y,T+1) :- Tape(x,y,T).\n"
       "Begin(x,T+1) :- Begin(x,T).\n"
       "End(x,T+1) :- End(x,T).\n";
  for (const auto& a : letters) p << a << "(x,T+1) :- " << a << "(x,T).\n";

  p << "% a labeled path from Begin to End\n";
  for (const auto& a : letters) p << "Lab(x,T) :- " << a << "(x,T).\n";
  p << "Path(x,y,T) :- Begin(x,T), Lab(x,T), Tape(x,y,T), Lab(y,T).\n"
       "Path(x,z,T) :- Path(x,y,T), Tape(y,z,T), Lab(z,T).\n"
       "Word(T) :- Path(x,y,T), End(y,T).\n";

  p << "% spurious facts\n"
       "Reach(x,T) :- Begin(x,T).\n"
       "Reach(y,T) :- Reach(x,T), Tape(x,y,T).\n"
       "Elem(x,T) :- Tape(x,y,T).\n"
       "Elem(y,T) :- Tape(x,y,T).\n"
       "Elem(x,T) :- Begin(x,T).\n"
       "Elem(x,T) :- End(x,T).\n";
  for (const auto& a : letters) p << "Elem(x,T) :- " << a << "(x,T).\n";
  p << "SpurA(T) :- Begin(x,T), Begin(y,T), x != y.\n"
       "SpurA(T) :- End(x,T), End(y,T), x != y.\n";
  for (std::size_t i = 0; i < letters.size(); ++i) {
    for (std::size_t j = i + 1; j < letters.size(); ++j) {
      p << "SpurB(T) :- " << letters[i] << "(x,T), " << letters[j] << "(x,T).\n";
    }
  }
  p << "SpurC(T) :- Tape(x,y,T), Tape(x,z,T), y != z.\n"
       "SpurC(T) :- Tape(x,z,T), Tape(y,z,T), x != y.\n"
       "SpurC(T) :- Begin(x,T), Tape(y,x,T).\n"
       "SpurC(T) :- End(x,T), Tape(x,y,T).\n"
       "SpurC(T) :- Tape(x,y,T), not Reach(x,T).\n"
       "SpurD(T) :- Elem(x,T), not Lab(x,T).\n"
       "SpurD(T) :- Elem(x,T), not Reach(x,T).\n"
       "Spur(T) :- SpurA(T).\n"
       "Spur(T) :- SpurB(T).\n"
       "Spur(T) :- SpurC(T).\n"
       "Spur(T) :- SpurD(T).\n";

  p << "% start once, on a snapshot of the word\n"
       "Start(T) :- Word(T), not Spur(T), not Started(T).\n"
       "Started(T+1) :- Start(T).\n"
       "Started(T+1) :- Started(T).\n"
       "SimTape(x,y,T+1) :- Start(T), Tape(x,y,T).\n"
       "SimBegin(x,T+1) :- Start(T), Begin(x,T).\n"
       "SimEnd(x,T+1) :- Start(T), End(x,T).\n";
  for (const auto& a : letters) p << "Sim_" << a << "(x,T+1) :- Start(T), " << a << "(x,T).\n";
  p << "Q_" << m.start << "(x,T+1) :- Start(T), Begin(x,T).\n";

  p << "% tape structure persists\n"
       "SimTape(x,y,T+1) :- SimTape(x,y,T).\n"
       "SimBegin(x,T+1) :- SimBegin(x,T).\n"
       "SimEnd(x,T+1) :- SimEnd(x,T).\n"
       "TapeExt(x,y,T+1) :- TapeExt(x,y,T).\n"
       "ExtTape(x,y,T+1) :- ExtTape(x,y,T).\n"
       "ExtNext(x,T) :- TapeExt(x,y,T).\n"
       "ExtTapeNext(x,T) :- ExtTape(x,y,T).\n";

  p << "% acceptance\n";
  for (const auto& f : m.accepting) {
    p << "Accept(T) :- Q_" << f << "(x,T).\n";
    p << "Accept(T) :- QExt_" << f << "(x,T).\n";
  }
  p << "Accept(T) :- Word(T), Spur(T).\n"
       "Accept(T+1) :- Accept(T).\n"
       "Run(T) :- Started(T), not Accept(T).\n";

  p << "% transitions; input cells use Q_/Sim_, extension cells QExt_/SimExt_\n";
  const std::string& blank = m.blank;
  for (const auto& [key, t] : m.delta) {
    const auto& [q, a] = key;
    const std::string in = "Q_" + q + "(x,T), Sim_" + a + "(x,T), Run(T)";
    const std::string ex = "QExt_" + q + "(x,T), SimExt_" + a + "(x,T), Run(T)";
    const std::string& q2 = t.next_state;
    p << "Moving(x,T) :- " << in << ".\n";
    p << "MovingExt(x,T) :- " << ex << ".\n";
    p << "Sim_" << t.write << "(x,T+1) :- " << in << ".\n";
    p << "SimExt_" << t.write << "(x,T+1) :- " << ex << ".\n";
    switch (t.move) {
      case Move::Right:
        p << "Q_" << q2 << "(y,T+1) :- " << in << ", SimTape(x,y,T).\n";
        p << "QExt_" << q2 << "(y,T+1) :- " << in << ", TapeExt(x,y,T).\n";
        p << "TapeExt(x,T,T+1) :- " << in << ", SimEnd(x,T), not ExtNext(x,T).\n";
        p << "QExt_" << q2 << "(T,T+1) :- " << in << ", SimEnd(x,T), not ExtNext(x,T).\n";
        p << "SimExt_" << blank << "(T,T+1) :- " << in << ", SimEnd(x,T), not ExtNext(x,T).\n";
        p << "QExt_" << q2 << "(y,T+1) :- " << ex << ", ExtTape(x,y,T).\n";
        p << "ExtTape(x,T,T+1) :- " << ex << ", not ExtTapeNext(x,T).\n";
        p << "QExt_" << q2 << "(T,T+1) :- " << ex << ", not ExtTapeNext(x,T).\n";
        p << "SimExt_" << blank << "(T,T+1) :- " << ex << ", not ExtTapeNext(x,T).\n";
        break;
      case Move::Left:
        p << "Q_" << q2 << "(w,T+1) :- " << in << ", SimTape(w,x,T).\n";
        p << "Q_" << q2 << "(x,T+1) :- " << in << ", SimBegin(x,T).\n";
        p << "QExt_" << q2 << "(w,T+1) :- " << ex << ", ExtTape(w,x,T).\n";
        p << "Q_" << q2 << "(w,T+1) :- " << ex << ", TapeExt(w,x,T).\n";
        break;
      case Move::Stay:
        p << "Q_" << q2 << "(x,T+1) :- " << in << ".\n";
        p << "QExt_" << q2 << "(x,T+1) :- " << ex << ".\n";
        break;
    }
  }

  p << "% frame: cells and the head keep their value unless a transition fires there\n";
  for (const auto& g : m.tape_alphabet) {
    p << "Sim_" << g << "(x,T+1) :- Sim_" << g << "(x,T), not Moving(x,T).\n";
    p << "SimExt_" << g << "(x,T+1) :- SimExt_" << g << "(x,T), not MovingExt(x,T).\n";
  }
  for (const auto& q : m.states) {
    p << "Q_" << q << "(x,T+1) :- Q_" << q << "(x,T), not Moving(x,T).\n";
    p << "QExt_" << q << "(x,T+1) :- QExt_" << q << "(x,T), not MovingExt(x,T).\n";
  }
  return p.str();
}

DedalusProgram build_tm_program(const TuringMachine& machine) {
  return parse_dedalus(tm_program_source(machine));
}

}  // namespace relnet
