#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <map>

#include "support.hpp"

using testsupport::data_dir;
using testsupport::problem_dir;
using testsupport::slurp;
using testsupport::TempDir;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result hwut_cli(const std::string& args, const fs::path& scratch) {
  const fs::path out = scratch / "stdout.txt";
  const fs::path err = scratch / "stderr.txt";
  const std::string cmd = std::string("env -u HWUT_LLM_ENDPOINT -u HWUT_LLM_MODEL -u HWUT_LLM_API_KEY '") +
                          HWUT_CLI_PATH + "' " + args + " >'" + out.string() + "' 2>'" +
                          err.string() + "'";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

void copy_problem(const std::string& name, const fs::path& to) {
  fs::create_directories(to);
  for (const char* f : {"problem.json", "description.txt", "ref.sv"}) {
    fs::copy_file(problem_dir(name) / f, to / f);
  }
  // Exemplar paths in problem.json are relative to the data tree.
  std::string manifest = slurp(to / "problem.json");
  const std::string rel = "../../exemplars/";
  const size_t at = manifest.find(rel);
  if (at != std::string::npos) {
    manifest.replace(at, rel.size(), (data_dir() / "exemplars").string() + "/");
  }
  std::ofstream(to / "problem.json") << manifest;
}

std::map<std::string, std::pair<std::string, fs::file_time_type>> snapshot(const fs::path& dir) {
  std::map<std::string, std::pair<std::string, fs::file_time_type>> s;
  for (const auto& e : fs::directory_iterator(dir)) {
    s[e.path().filename().string()] = {slurp(e.path()), fs::last_write_time(e.path())};
  }
  return s;
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
  TempDir tmp("cli_usage");
  CHECK(hwut_cli("", tmp.path()).code == 1);
  CHECK(hwut_cli("frobnicate", tmp.path()).code == 1);
  CHECK(hwut_cli("parse", tmp.path()).code == 1);
  CHECK(hwut_cli("evaluate full_adder", tmp.path()).code == 1);
  CHECK(hwut_cli("gen-tests full_adder --source BC01 --shots 3", tmp.path()).code == 1);
  CHECK(hwut_cli("--help", tmp.path()).code == 0);
}

TEST_CASE("parse and simulate") {
  TempDir tmp("cli_sim");
  const fs::path fa = problem_dir("full_adder") / "ref.sv";
  const Result p = hwut_cli("parse " + q(fa), tmp.path());
  CHECK(p.code == 0);
  CHECK(p.out.find("full_adder") != std::string::npos);

  std::ofstream(tmp.path() / "t.stim") << "inputs: a[1], b[1], c[1]\n1 1 0\n0 0 0\n";
  const Result s = hwut_cli("simulate " + q(fa) + " " + q(tmp.path() / "t.stim") + " --coverage",
                            tmp.path());
  CHECK(s.code == 0);
  CHECK(s.out.find("cycle a b c s cout") != std::string::npos);
  CHECK(s.out.find("0 1 1 0 0 1") != std::string::npos);
  CHECK(s.out.find("coverage line") != std::string::npos);

  const Result v = hwut_cli("simulate " + q(fa) + " " + q(tmp.path() / "t.stim") + " --vcd -",
                            tmp.path());
  CHECK(v.code == 0);
  CHECK(v.out.find("$enddefinitions") != std::string::npos);

  std::ofstream(tmp.path() / "bad.sv") << "module m(input a, output b);\n assign b = ;\nendmodule\n";
  const Result bad = hwut_cli("parse " + q(tmp.path() / "bad.sv"), tmp.path());
  CHECK(bad.code == 2);
  CHECK(bad.err.find("bad.sv:2:") != std::string::npos);
  CHECK(hwut_cli("parse " + q(tmp.path() / "missing.sv"), tmp.path()).code == 2);
}

TEST_CASE("mutate writes a corpus and reruns change nothing") {
  TempDir tmp("cli_mutate");
  const fs::path dir = tmp.path() / "arbiter";
  copy_problem("arbiter", dir);
  const Result first = hwut_cli("mutate " + q(dir) + " --seed 1", tmp.path());
  REQUIRE(first.code == 0);
  for (int i = 1; i <= 10; ++i) {
    char name[16];
    std::snprintf(name, sizeof name, "bc%02d.sv", i);
    CHECK(fs::exists(dir / name));
    CHECK(slurp(dir / name) == slurp(problem_dir("arbiter") / name));
  }
  const auto before = snapshot(dir);
  const Result second = hwut_cli("mutate " + q(dir) + " --seed 1", tmp.path());
  CHECK(second.code == 0);
  CHECK(second.out == first.out);
  CHECK(snapshot(dir) == before);
}

TEST_CASE("missing reference is a data error") {
  TempDir tmp("cli_missing");
  const fs::path dir = tmp.path() / "arbiter";
  copy_problem("arbiter", dir);
  fs::remove(dir / "ref.sv");
  const Result r = hwut_cli("mutate " + q(dir), tmp.path());
  CHECK(r.code == 2);
  CHECK(r.err.find("ManifestError") != std::string::npos);
}

TEST_CASE("live provider without credentials exits with 3") {
  TempDir tmp("cli_live");
  const Result r = hwut_cli("gen-tests full_adder --source BC01 --provider live", tmp.path());
  CHECK(r.code == 3);
  CHECK(r.err.find("ProviderRejection") != std::string::npos);
}

TEST_CASE("loops and evaluation through the CLI") {
  TempDir tmp("cli_eval");
  const Result g = hwut_cli("gen-tests arbiter --source BC01 --out " + q(tmp.path() / "gen"),
                            tmp.path());
  CHECK(g.code == 0);
  CHECK(g.out.find("iteration 1: accepted") != std::string::npos);
  CHECK(fs::exists(tmp.path() / "gen" / "testgen_history.json"));

  std::vector<std::string> stims;
  for (const auto& e : fs::directory_iterator(tmp.path() / "gen")) {
    if (e.path().extension() == ".stim") stims.push_back(q(e.path()));
  }
  REQUIRE_FALSE(stims.empty());
  std::sort(stims.begin(), stims.end());
  std::string files;
  for (const auto& s : stims) files += " " + s;
  const Result d = hwut_cli("debug arbiter --target BC01 --out " + q(tmp.path() / "dbg") +
                                " --tests" + files,
                            tmp.path());
  CHECK(d.code == 0);
  CHECK(d.out.find("final pass") != std::string::npos);
  CHECK(fs::exists(tmp.path() / "dbg" / "BC01_final.sv"));

  const fs::path run = tmp.path() / "run";
  const Result e = hwut_cli("evaluate full_adder arbiter --jobs 2 --out " + q(run), tmp.path());
  CHECK(e.code == 0);
  CHECK(fs::exists(run / "report.json"));
  CHECK(fs::exists(run / "scoreboard.txt"));
  CHECK(fs::exists(run / "arbiter" / "matrix.csv"));
  const Result rep = hwut_cli("report " + q(run), tmp.path());
  CHECK(rep.code == 0);
  CHECK(rep.out == slurp(run / "scoreboard.txt"));

  fs::create_directories(tmp.path() / "empty_run");
  CHECK(hwut_cli("report " + q(tmp.path() / "empty_run"), tmp.path()).code == 2);
}
