#include "json.hpp"

#include "relnet/netsim.hpp"

namespace relnet {

namespace {

using json = nlohmann::ordered_json;

json tuples(const Relation& r) {
  json out = json::array();
  for (const auto& t : r) out.push_back(to_string(t));
  return out;
}

json facts(const Instance& inst) {
  json out = json::array();
  for (const auto& f : inst.facts()) out.push_back(to_string(f));
  return out;
}

std::string braces(const std::vector<std::string>& items) {
  std::string s = "{";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) s += ", ";
    s += items[i];
  }
  return s + "}";
}

std::string text_tuples(const Relation& r) {
  std::vector<std::string> items;
  for (const auto& t : r) items.push_back(to_string(t));
  return braces(items);
}

}  // namespace

std::string format_transition(const NetTransition& t, std::size_t index,
                              TraceFormat format) {
  const char* kind = t.kind == StepKind::Heartbeat ? "hb" : "dlv";
  if (format == TraceFormat::Jsonl) {
    json line;
    line["step"] = index;
    line["kind"] = kind;
    line["node"] = t.node.name();
    line["recv"] = t.received ? json(to_string(*t.received)) : json(nullptr);
    line["out"] = tuples(t.output);
    line["sent"] = facts(t.sent);
    return line.dump();
  }
  std::vector<std::string> sent;
  for (const auto& f : t.sent.facts()) sent.push_back(to_string(f));
  return std::to_string(index) + " " + kind + " " + t.node.name() + " recv " +
         (t.received ? to_string(*t.received) : std::string("-")) + " out " +
         text_tuples(t.output) + " sent " + braces(sent);
}

std::string format_trace(const RunTrace& trace, TraceFormat format) {
  std::string out;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    out += format_transition(trace.steps[i], i, format);
    out += '\n';
  }
  if (format == TraceFormat::Jsonl) {
    json trailer;
    trailer["steps"] = trace.steps.size();
    trailer["cumulative_output"] = tuples(trace.cumulative_output);
    trailer["quiescence_index"] =
        trace.quiescence_index ? json(*trace.quiescence_index) : json(nullptr);
    out += trailer.dump();
    out += '\n';
  } else {
    out += "output " + text_tuples(trace.cumulative_output) + "\n";
    out += "quiescence_index " +
           (trace.quiescence_index ? std::to_string(*trace.quiescence_index)
                                   : std::string("none")) +
           "\n";
  }
  return out;
}

}  // namespace relnet
