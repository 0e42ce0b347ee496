#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "relnet/cli.hpp"
#include "relnet/corpus.hpp"
#include "relnet/dedalus.hpp"
#include "relnet/harness.hpp"
#include "relnet/netsim.hpp"
#include "relnet/query.hpp"

namespace py = pybind11;
using namespace relnet;

namespace {

using PyTuple = std::vector<std::string>;

std::vector<PyTuple> rows(const Relation& r) {
  std::vector<PyTuple> out;
  for (const auto& t : r) {
    PyTuple row;
    for (DataElement e : t) row.push_back(e.name());
    out.push_back(std::move(row));
  }
  return out;
}

const TransducerProgram& program_of(const std::string& corpus, const std::string& source,
                                    std::optional<TransducerProgram>& storage) {
  if (!corpus.empty()) return corpus_entry(corpus).program;
  storage = parse_program(source);
  return *storage;
}

py::dict run_program(const std::string& source, const std::string& corpus,
                     const std::string& network, const std::string& instance,
                     std::uint64_t seed, std::size_t max_steps, const std::string& scheduler) {
  std::optional<TransducerProgram> storage;
  const auto& p = program_of(corpus, source, storage);
  Network n = parse_network(network);
  Instance i = parse_instance(instance);
  std::unique_ptr<Scheduler> s;
  if (scheduler == "random-fair") {
    s = std::make_unique<RandomFairScheduler>(seed);
  } else if (scheduler == "round-robin-fifo") {
    s = std::make_unique<RoundRobinFifoScheduler>();
  } else {
    throw PreconditionError("unknown scheduler '" + scheduler + "'");
  }
  RunOptions o;
  o.max_steps = max_steps;
  RunTrace t = run(p, n, make_initial(p, n, full_replication(i, n.nodes())), *s, o);
  py::dict d;
  d["output"] = rows(t.cumulative_output);
  d["steps"] = t.length;
  d["quiescence_index"] = t.quiescence_index ? py::cast(*t.quiescence_index) : py::none();
  d["trace"] = format_trace(t, TraceFormat::Jsonl);
  return d;
}

std::string consistency(const std::string& source, const std::string& corpus,
                        const std::string& network, const std::string& instance,
                        std::size_t budget, std::uint64_t seed) {
  std::optional<TransducerProgram> storage;
  const auto& p = program_of(corpus, source, storage);
  CheckOptions o;
  o.budget = budget;
  o.seed = seed;
  return verdict_json(check_consistency(p, parse_network(network), parse_instance(instance), o));
}

py::tuple run_cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  int code = relnet::cli::main(args, out, err);
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Relational transducer networks: simulation, checks and Dedalus.";

  auto base = py::register_exception<Error>(m, "Error", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<SchemaError>(m, "SchemaError", base.ptr());
  py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());

  m.def("corpus_names", [] {
    std::vector<std::string> names;
    for (const auto& e : corpus()) names.push_back(e.name);
    return names;
  });
  m.def("corpus_source", [](const std::string& name) { return corpus_entry(name).source; });
  m.def(
      "evaluate_query",
      [](const std::string& query, const std::string& instance) {
        return rows(evaluate(parse_query(query), parse_instance(instance)));
      },
      py::arg("query"), py::arg("instance"));
  m.def("run", &run_program, py::arg("source") = "", py::arg("corpus") = "",
        py::arg("network"), py::arg("instance") = "", py::arg("seed") = 0,
        py::arg("max_steps") = 10000, py::arg("scheduler") = "random-fair",
        "Runs a program on full replication; returns output, steps, quiescence index, trace.");
  m.def("check_consistency", &consistency, py::arg("source") = "", py::arg("corpus") = "",
        py::arg("network"), py::arg("instance") = "", py::arg("budget") = 100,
        py::arg("seed") = 0, "Returns the verdict as JSON text.");
  m.def(
      "eval_dedalus",
      [](const std::string& program, const std::string& input, std::size_t max_time) {
        return format_temporal_instance(
            eval_dedalus(parse_dedalus(program), parse_temporal_instance(input), max_time));
      },
      py::arg("program"), py::arg("input"), py::arg("max_time") = 50);
  m.def(
      "tm_accepts",
      [](const std::string& machine, const std::string& word, std::size_t max_time) {
        auto p = build_tm_program(parse_turing_machine(machine));
        return accepted(eval_dedalus(p, word_structure(word), max_time));
      },
      py::arg("machine"), py::arg("word"), py::arg("max_time") = 100);
  m.def("cli", &run_cli, py::arg("args"), "Runs the command line; returns (code, stdout, stderr).");
}
