#include <doctest.h>

#include "hwut/error.hpp"
#include "hwut/manifest.hpp"
#include "hwut/orchestrator.hpp"
#include "support.hpp"

using namespace hwut;
using testsupport::fenced;
using testsupport::MockScript;
using testsupport::problem_dir;
using testsupport::slurp;
using testsupport::TempDir;
namespace fs = std::filesystem;

namespace {

PromptTemplates templates() { return PromptTemplates::load(testsupport::data_dir() / "templates"); }

const Mutant& mutant(const Problem& p, const std::string& bc) {
  for (const auto& m : p.mutants) {
    if (m.bc == bc) return m;
  }
  throw std::runtime_error("no mutant " + bc);
}

std::string arbiter_stim(const std::vector<std::string>& rows) {
  std::string s = "inputs: rst[1], r1[1], r2[1]\n";
  for (const auto& r : rows) s += std::string{r[0], ' ', r[1], ' ', r[2], '\n'};
  return s;
}

// Rising coverage on the arbiter reference, checked in the test below.
const std::vector<std::vector<std::string>> kRising = {
    {"100", "010"},
    {"100", "010", "011", "001", "000"},
    {"100", "010", "011", "001", "011", "010", "000", "001", "000", "011",
     "111", "101", "001", "011", "111", "011", "010", "000", "010", "100"}};

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error");
  return Errc::kIoError;
}

}  // namespace

TEST_CASE("combinational generation is one shot") {
  const Problem fa = load_problem(problem_dir("full_adder"), true);
  TempDir tmp("fa");
  MockScript script(tmp.path() / "mock");
  script.add("testgen", fenced("inputs: a[1], b[1], c[1]\n0 0 0\n1 1 0\n"));
  script.add("testgen", fenced("inputs: a[1], b[1], c[1]\n1 1 1\n"));
  MockProvider mock(script.write());
  const PromptTemplates t = templates();
  const GenConfig cfg = GenConfig::make(Strategy::kNlsc, 0);
  const LoopContext ctx{fa.spec, *fa.oracle, t, cfg, mock, {}};
  const TestGenState st = generate_tests(ctx, mutant(fa, "BC01").source, "BC01");
  CHECK(mock.calls() == 1);
  CHECK(st.provider_calls == 1);
  CHECK(st.iterations == 1);
  REQUIRE(st.accepted.size() == 1);
  CHECK(st.accepted[0].id == "bc01_t1");
  CHECK(st.bcov == collect_coverage(*fa.oracle, st.accepted).scalar());
}

TEST_CASE("combinational generation keeps its single call even when it fails") {
  const Problem fa = load_problem(problem_dir("full_adder"), true);
  TempDir tmp("fa_bad");
  MockScript script(tmp.path() / "mock");
  script.add("testgen", "No idea, sorry.");
  MockProvider mock(script.write());
  const PromptTemplates t = templates();
  const GenConfig cfg = GenConfig::make(Strategy::kNls, 0);
  const LoopContext ctx{fa.spec, *fa.oracle, t, cfg, mock, {}};
  const TestGenState st = generate_tests(ctx, mutant(fa, "BC02").source, "BC02");
  CHECK(mock.calls() == 1);
  CHECK(st.accepted.empty());
  REQUIRE(st.history.size() == 1);
  CHECK(st.history[0].reason.rfind("NoStimulusFound:", 0) == 0);
}

TEST_CASE("sequential generation accepts only coverage gains") {
  const Problem arb = load_problem(problem_dir("arbiter"), true);
  // Independent precondition: the scripted tests really do raise coverage.
  std::vector<UnitTest> so_far;
  double last = 0.0;
  for (const auto& rows : kRising) {
    so_far.push_back(parse_stimulus(arbiter_stim(rows)));
    const double now = collect_coverage(*arb.oracle, arb.spec.signature, so_far).scalar();
    REQUIRE(now > last);
    last = now;
  }
  REQUIRE(last < 1.0);

  TempDir tmp("arb");
  MockScript script(tmp.path() / "mock");
  script.add("arbiter/BC06/testgen", fenced(arbiter_stim(kRising[0])));
  script.add("arbiter/BC06/testgen", fenced(arbiter_stim(kRising[0])));  // flat
  script.add("arbiter/BC06/testgen", fenced(arbiter_stim(kRising[1])));
  script.add("arbiter/BC06/testgen", "inputs: r1[1], rst[1], r2[1]\n0 1 0\n");  // reordered
  script.add("arbiter/BC06/testgen", fenced(arbiter_stim(kRising[2])));
  MockProvider mock(script.write());
  const PromptTemplates t = templates();
  const GenConfig cfg = GenConfig::make(Strategy::kNlsc, 0);
  const LoopContext ctx{arb.spec, *arb.oracle, t, cfg, mock, {}};
  const TestGenState st = generate_tests(ctx, mutant(arb, "BC06").source, "BC06");

  CHECK(st.iterations == 5);
  CHECK(mock.calls() == 5);
  REQUIRE(st.history.size() == 5);
  CHECK(st.history[0].accepted);
  CHECK_FALSE(st.history[1].accepted);
  CHECK(st.history[1].reason.find("does not exceed") != std::string::npos);
  CHECK(st.history[1].bcov == st.history[0].bcov);
  CHECK(st.history[2].accepted);
  CHECK_FALSE(st.history[3].accepted);
  CHECK(st.history[3].reason.rfind("MalformedStimulus:", 0) == 0);
  CHECK(st.history[4].accepted);
  REQUIRE(st.accepted.size() == 3);

  // bcov after each acceptance equals the union coverage recomputed from scratch.
  std::vector<UnitTest> prefix;
  double prev = 0.0;
  for (const auto& step : st.history) {
    CHECK(step.bcov >= prev);
    if (!step.accepted) continue;
    prefix.push_back(*step.test);
    const double expect = collect_coverage(*arb.oracle, arb.spec.signature, prefix).scalar();
    CHECK(step.bcov == expect);
    CHECK(step.bcov > prev);
    prev = step.bcov;
  }
  CHECK(st.bcov == prev);
  // The first prompt has no feedback; later ones carry it.
  CHECK(st.history[0].prompt.find("Previous unit test") == std::string::npos);
  CHECK(st.history[1].prompt.find("Previous unit test") != std::string::npos);
}

TEST_CASE("sequential generation stops at full coverage") {
  const Problem bcd = load_problem(problem_dir("bcd_counter"), true);
  TempDir tmp("stop");
  MockScript script(tmp.path() / "mock");
  // A long random test from the library is enough for full coverage here.
  std::mt19937_64 rng(1);
  std::string text;
  double cov = 0;
  for (int i = 0; i < 20 && cov < 1.0; ++i) {
    const UnitTest u = random_test(bcd.spec.signature, 200, rng);
    cov = collect_coverage(*bcd.oracle, bcd.spec.signature, {u}).scalar();
    text = format_stimulus(u);
  }
  REQUIRE(cov == 1.0);
  for (int i = 0; i < 5; ++i) script.add("testgen", fenced(text));
  MockProvider mock(script.write());
  const PromptTemplates t = templates();
  const GenConfig cfg = GenConfig::make(Strategy::kNls, 0);
  const LoopContext ctx{bcd.spec, *bcd.oracle, t, cfg, mock, {}};
  const TestGenState st = generate_tests(ctx, bcd.mutants.front().source, bcd.mutants.front().bc);
  CHECK(st.iterations == 1);
  CHECK(mock.calls() == 1);
  CHECK(st.bcov == 1.0);
}

TEST_CASE("generation input errors") {
  const Problem arb = load_problem(problem_dir("arbiter"), true);
  TempDir tmp("err");
  MockScript script(tmp.path() / "mock");
  MockProvider mock(script.write());
  const PromptTemplates t = templates();
  const GenConfig cfg = GenConfig::make(Strategy::kNlsc, 0);
  const LoopContext ctx{arb.spec, *arb.oracle, t, cfg, mock, {}};
  CHECK(code_of([&] { generate_tests(ctx, DesignSource::mutant("module x;", "BC01"), "BC01"); }) ==
        Errc::kInvalidArgument);
  // An empty script only yields rejected steps.
  const TestGenState st = generate_tests(ctx, mutant(arb, "BC01").source, "BC01");
  CHECK(st.accepted.empty());
  CHECK(st.history.size() == 5);
  for (const auto& s : st.history) CHECK(s.reason.rfind("ScriptExhausted:", 0) == 0);
}

TEST_CASE("debug loop contracts") {
  const Problem arb = load_problem(problem_dir("arbiter"), true);
  const std::vector<UnitTest> tests = {parse_stimulus(arbiter_stim(kRising[2]), "arb_t1")};
  const Mutant& bc07 = mutant(arb, "BC07");
  const PromptTemplates t = templates();
  const GenConfig cfg = GenConfig::make(Strategy::kNlsc, 0);

  SUBCASE("reference patch") {
    TempDir tmp("dbg_a");
    MockScript script(tmp.path() / "mock");
    script.add("debug", fenced(arb.spec.reference.text, "verilog"));
    MockProvider mock(script.write());
    const LoopContext ctx{arb.spec, *arb.oracle, t, cfg, mock, {}};
    const DebugState st = debug(ctx, bc07.source, "BC07", tests);
    CHECK(st.initial_pass.value() == 0.0);
    CHECK(st.iterations == 1);
    CHECK(st.bpass.value() == 1.0);
    CHECK(st.current.origin == Origin::kPatched);
    CHECK(st.history[0].failing_test == "arb_t1");
  }
  SUBCASE("useless patches") {
    TempDir tmp("dbg_b");
    MockScript script(tmp.path() / "mock");
    script.add("debug", fenced(bc07.source.text, "verilog"));
    script.add("debug", "Check the reset polarity.");
    script.add("debug", fenced("module arbiter(input clk);\nendmodule\n"));
    script.add("debug", fenced(bc07.source.text + "oops", "verilog"));
    script.add("debug", fenced(bc07.source.text, "verilog"));
    MockProvider mock(script.write());
    const LoopContext ctx{arb.spec, *arb.oracle, t, cfg, mock, {}};
    const DebugState st = debug(ctx, bc07.source, "BC07", tests);
    CHECK(st.iterations == 5);
    CHECK(mock.calls() == 5);
    CHECK(st.current.text == bc07.source.text);
    CHECK(st.bpass.passed == st.initial_pass.passed);
    for (const auto& s : st.history) {
      CHECK_FALSE(s.accepted);
      CHECK_FALSE(s.reason.empty());
      CHECK(s.bpass.passed == st.initial_pass.passed);
    }
  }
  SUBCASE("empty suite") {
    TempDir tmp("dbg_c");
    MockScript script(tmp.path() / "mock");
    MockProvider mock(script.write());
    const LoopContext ctx{arb.spec, *arb.oracle, t, cfg, mock, {}};
    CHECK(code_of([&] { debug(ctx, bc07.source, "BC07", {}); }) == Errc::kEmptyList);
  }
  SUBCASE("a passing design needs no calls") {
    TempDir tmp("dbg_d");
    MockScript script(tmp.path() / "mock");
    MockProvider mock(script.write());
    const LoopContext ctx{arb.spec, *arb.oracle, t, cfg, mock, {}};
    const DebugState st = debug(ctx, arb.spec.reference, "REF", tests);
    CHECK(st.iterations == 0);
    CHECK(mock.calls() == 0);
    CHECK(st.bpass.value() == 1.0);
  }
}

TEST_CASE("debug loop partial then full fix") {
  const Problem alu = load_problem(problem_dir("alu4"), true);
  const auto tests = testsupport::alu4_tests();
  // The oracle agrees with the hand model on every row.
  {
    Simulator sim(*alu.oracle, alu.spec.signature);
    const auto rows = testsupport::alu4_rows();
    for (size_t i = 0; i < tests.size(); ++i) {
      const Trace tr = sim.run(tests[i]);
      const auto [res, zero] = testsupport::alu4_model(rows[i], true, true);
      CHECK(tr.find("result")->values[0] == res);
      CHECK(tr.find("zero")->values[0] == zero);
    }
  }
  REQUIRE(testsupport::alu4_pass_fraction(false, false) == 0.4);
  REQUIRE(testsupport::alu4_pass_fraction(true, false) == 0.7);

  TempDir tmp("alu");
  MockScript script(tmp.path() / "mock");
  script.add("debug", fenced(testsupport::alu4_variant("x - y", "x | y"), "verilog"));
  script.add("debug", fenced(alu.spec.reference.text, "verilog"));
  MockProvider mock(script.write());
  const PromptTemplates t = templates();
  const GenConfig cfg = GenConfig::make(Strategy::kNlsc, 0);
  const LoopContext ctx{alu.spec, *alu.oracle, t, cfg, mock, {}};
  const DesignSource buggy = DesignSource::mutant(testsupport::alu4_variant("x + y", "x | y"), "BCX");
  const DebugState st = debug(ctx, buggy, "BCX", tests);
  CHECK(st.initial_pass.value() == 0.4);
  REQUIRE(st.history.size() == 2);
  CHECK(st.history[0].accepted);
  CHECK(st.history[0].bpass.value() == 0.7);
  CHECK(st.history[1].accepted);
  CHECK(st.history[1].bpass.value() == 1.0);
  CHECK(st.iterations == 2);
  // The first failing test is the first SUB row.
  CHECK(st.history[0].failing_test == "alu_t5");
  CHECK(st.history[1].failing_test == "alu_t8");
}

TEST_CASE("loop state JSON round trip") {
  const Problem arb = load_problem(problem_dir("arbiter"), true);
  TempDir tmp("json");
  MockScript script(tmp.path() / "mock");
  for (const auto& rows : kRising) script.add("testgen", fenced(arbiter_stim(rows)));
  script.add("debug", "no module here");
  script.add("debug", fenced(arb.spec.reference.text));
  MockProvider mock(script.write());
  const PromptTemplates t = templates();
  const GenConfig cfg = GenConfig::make(Strategy::kNlsc, 0);
  const LoopContext ctx{arb.spec, *arb.oracle, t, cfg, mock, {}};
  const TestGenState g = generate_tests(ctx, mutant(arb, "BC07").source, "BC07");
  const std::string gj = testgen_to_json(g);
  CHECK(testgen_to_json(testgen_from_json(gj)) == gj);
  CHECK(testgen_from_json(gj).accepted == g.accepted);
  const DebugState d = debug(ctx, mutant(arb, "BC07").source, "BC07", g.accepted);
  const std::string dj = debug_to_json(d);
  CHECK(debug_to_json(debug_from_json(dj)) == dj);
  CHECK(debug_from_json(dj).current.text == d.current.text);
  CHECK(code_of([] { testgen_from_json("{"); }) != Errc::kIoError);
}

TEST_CASE("run config JSON") {
  RunConfig c;
  c.gen = GenConfig::make(Strategy::kNls, 5);
  c.binding.script_dir = "/x";
  c.binding.api_key = "secret-key";
  c.seed = 9;
  c.jobs = 3;
  c.problems = {"a", "b"};
  const std::string text = c.to_json();
  CHECK(text.find("secret-key") == std::string::npos);
  const RunConfig back = RunConfig::from_json(text);
  CHECK(back.to_json() == text);
  CHECK(back.seed == 9);
  CHECK(back.gen.strategy == Strategy::kNls);
  c.jobs = 1;
  CHECK(c.to_json() == text);
  CHECK(code_of([] { RunConfig::from_json("[]"); }) == Errc::kInvalidArgument);
}

namespace {

RunConfig desk_config(const fs::path& out, const fs::path& script) {
  RunConfig c;
  c.binding.kind = ProviderKind::kMock;
  c.binding.script_dir = script;
  c.output_dir = out;
  c.jobs = 2;
  c.problems = {"arbiter"};
  return c;
}

}  // namespace

TEST_CASE("matrix with an unsensitizing suite") {
  const Problem arb = load_problem(problem_dir("arbiter"), true);
  TempDir tmp("matrix");
  MockScript script(tmp.path() / "mock");
  // Reset-only stimulus: the FSM never leaves IDLE.
  script.add("testgen", fenced(arbiter_stim({"100", "100", "000", "000"})));
  for (int i = 0; i < 5; ++i) script.add("debug", fenced(arb.spec.reference.text));
  const fs::path mock_dir = script.write();
  MockProvider mock(mock_dir);
  const RunConfig cfg = desk_config(tmp.path() / "run", mock_dir);
  const auto runs = evaluate_matrix({arb}, cfg, mock, templates());
  REQUIRE(runs.size() == 1);
  const EvalRun& r = runs[0];
  CHECK(r.fatal.empty());
  CHECK(r.cells.size() == arb.mutants.size() * arb.mutants.size());
  int unsensitized = 0;
  for (const auto& c : r.cells) {
    if (!c.result) {
      CHECK_FALSE(c.skipped.empty());
      continue;
    }
    if (c.result->ar_i == 0) {
      ++unsensitized;
      CHECK(c.result->da == 0.0);
      CHECK(c.result->dr == 0.0);
    } else {
      CHECK(c.result->da == c.result->dr);
    }
  }
  CHECK(unsensitized > 0);

  // Diagonal: ar_i is 1 exactly when the suite fails on its own seed.
  for (size_t s = 0; s < arb.mutants.size(); ++s) {
    const auto& suite = r.generations[s].accepted;
    if (suite.empty()) continue;
    const auto verdicts = evaluate_suite(*arb.oracle, load_design(arb.mutants[s].source),
                                         arb.spec.signature, suite);
    bool attacked = false;
    for (const auto& v : verdicts) attacked |= !v.pass;
    const MatrixCell& diag = r.cells[s * arb.mutants.size() + s];
    REQUIRE(diag.source == diag.target);
    REQUIRE(diag.result.has_value());
    CHECK(diag.result->ar_i == (attacked ? 1 : 0));
    // Debug only calls the provider for attacked targets.
    REQUIRE(r.debug[s].state.has_value());
    CHECK((r.debug[s].state->iterations > 0) == attacked);
  }

  for (const char* f : {"config.json", "arbiter/matrix.csv", "arbiter/matrix.json",
                        "arbiter/history/testgen_bc01.json"}) {
    CHECK(fs::exists(cfg.output_dir / f));
  }
}

TEST_CASE("evaluation resumes from checkpoints") {
  const Problem arb = load_problem(problem_dir("arbiter"), true);
  TempDir tmp("resume");
  const fs::path desk = testsupport::data_dir() / "mock" / "desk";
  MockProvider first(desk);
  const RunConfig cfg = desk_config(tmp.path() / "run", desk);
  evaluate_matrix({arb}, cfg, first, templates());
  CHECK(first.calls() > 0);
  const std::string before = slurp(cfg.output_dir / "arbiter" / "matrix.json");

  MockScript empty(tmp.path() / "empty");
  MockProvider second(empty.write());
  RunConfig again = cfg;
  again.jobs = 4;
  evaluate_matrix({arb}, again, second, templates());
  CHECK(second.calls() == 0);
  CHECK(slurp(cfg.output_dir / "arbiter" / "matrix.json") == before);

  RunConfig other = cfg;
  other.seed = 2;
  CHECK(code_of([&] { evaluate_matrix({arb}, other, second, templates()); }) ==
        Errc::kInvalidArgument);
}

TEST_CASE("unloadable problems become fatal entries") {
  TempDir tmp("fatal");
  fs::create_directories(tmp.path() / "broken");
  testsupport::MockScript script(tmp.path() / "mock");
  MockProvider mock(script.write());
  RunConfig cfg = desk_config(tmp.path() / "run", tmp.path() / "mock");
  cfg.problems = {"broken"};
  const auto runs = evaluate_dirs({tmp.path() / "broken"}, cfg, mock, templates());
  REQUIRE(runs.size() == 1);
  CHECK(runs[0].problem == "broken");
  CHECK(runs[0].fatal.rfind("ManifestError:", 0) == 0);
  CHECK(fs::exists(cfg.output_dir / "broken" / "matrix.json"));
}
