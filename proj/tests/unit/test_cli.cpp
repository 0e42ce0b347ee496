#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "relnet/cli.hpp"

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  int code = relnet::cli::main(args, out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return std::string(RELNET_DATA_DIR) + "/" + name; }

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::vector<std::string> kGoldenRun{
    "run", "--program", data("tc.rtx"), "--network", data("ring4.net"), "--instance",
    data("g.facts"), "--seed", "7", "--max-steps", "5000", "--format", "jsonl"};

}  // namespace

TEST_CASE("run matches the golden trace") {
  auto r = cli(kGoldenRun);
  CHECK(r.code == 0);
  CHECK(r.out == read_file(data("golden/tc_ring4_seed7.jsonl")));
}

TEST_CASE("run reports non-quiescent runs as inconclusive") {
  auto r = cli({"run", "--corpus", "tc_flood", "--network", data("ring4.net"), "--instance",
                data("g.facts"), "--max-steps", "5"});
  CHECK(r.code == 2);
  CHECK(r.out.find("quiescence_index none") != std::string::npos);
}

TEST_CASE("check verdicts and exit codes") {
  std::filesystem::path tmp = std::filesystem::temp_directory_path() / "relnet_cli_s.facts";
  { std::ofstream(tmp) << "S(a). S(b).\n"; }
  auto r = cli({"check", "consistency", "--corpus", "first_element", "--network",
                data("path2.net"), "--instance", tmp.string()});
  CHECK(r.code == 1);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["result"] == "fail");

  auto tc = cli({"check", "topology", "--program", data("tc.rtx"), "--networks", data("path2.net"),
                 data("ring4.net"), "--instance", data("g.facts"), "--budget", "10"});
  CHECK(tc.code == 0);

  auto coord = cli({"check", "coordination", "--corpus", "tc_flood", "--network",
                    data("ring4.net"), "--instance", data("g.facts"), "--budget", "10"});
  CHECK(coord.code == 0);
  CHECK(nlohmann::json::parse(coord.out)["result"] == "witness-found");

  auto mono = cli({"check", "monotone", "--corpus", "emptiness", "--network", data("path2.net"),
                   "--instance", tmp.string(), "--budget", "8"});
  CHECK(mono.code == 1);
  std::filesystem::remove(tmp);
}

TEST_CASE("malformed input and usage errors") {
  std::filesystem::path bad = std::filesystem::temp_directory_path() / "relnet_cli_bad.rtx";
  { std::ofstream(bad) << "schema { in: S/1; msg: ; mem: ; out: 1 }\noutput { Out(x) :- S(x) }\n"; }
  auto r = cli({"run", "--program", bad.string(), "--network", data("ring4.net")});
  CHECK(r.code == relnet::cli::kExitUsage);
  CHECK(r.err.find(bad.string()) != std::string::npos);
  CHECK(r.err.find("line 2") != std::string::npos);
  std::filesystem::remove(bad);

  CHECK(cli({"run", "--program", "/nonexistent/x.rtx", "--network", data("ring4.net")}).code ==
        relnet::cli::kExitNoInput);
  CHECK(cli({"frobnicate"}).code == relnet::cli::kExitUsage);
  CHECK(cli({"run", "--corpus", "nope", "--network", data("ring4.net")}).code ==
        relnet::cli::kExitUsage);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("corpus listing and demo") {
  auto list = cli({"corpus-list"});
  CHECK(list.code == 0);
  CHECK(std::count(list.out.begin(), list.out.end(), '\n') == 10);
  auto show = cli({"corpus-show", "tc_flood"});
  CHECK(show.out == read_file(data("tc.rtx")));
  auto demo = cli({"demo", "tc_flood", "--seed", "3"});
  CHECK(demo.code == 0);
  CHECK(demo.out.find("tc_flood") != std::string::npos);
}

TEST_CASE("dedalus commands") {
  auto acc = cli({"dedalus", "tm", "--machine", data("ab.tm"), "--word", "aab",
                  "--stability-horizon", "60"});
  CHECK(acc.code == 0);
  auto j = nlohmann::json::parse(acc.out);
  CHECK(j["accepted"] == true);
  CHECK(j["stable"] == true);
  CHECK(cli({"dedalus", "tm", "--machine", data("ab.tm"), "--word", "ba"}).code == 1);

  auto persist = cli({"dedalus", "run", "--program", data("persist.ded"), "--input",
                      data("persist.facts"), "--max-time", "5", "--stability-horizon", "20"});
  CHECK(persist.code == 0);
  CHECK(persist.out.find("r(b)@5.") != std::string::npos);
  CHECK(persist.out.find("\"stabilization_time\":3") != std::string::npos);
}

TEST_CASE("same seed, same bytes") {
  auto first = cli(kGoldenRun).out;
  for (int k = 0; k < 3; ++k) CHECK(cli(kGoldenRun).out == first);
}
