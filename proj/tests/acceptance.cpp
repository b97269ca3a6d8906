// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any fails.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "hwut/error.hpp"
#include "hwut/manifest.hpp"
#include "hwut/metrics.hpp"
#include "hwut/orchestrator.hpp"
#include "hwut/parser.hpp"
#include "hwut/report.hpp"
#include "support.hpp"

using namespace hwut;
using namespace testsupport;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  // Records a failed expectation; the first few are kept for the summary.
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (pass) detail << "first failure: " << what << "; ";
    pass = false;
    ++failures;
  }
  int failures = 0;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<std::string> desk_problems() {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(data_dir() / "problems")) {
    if (fs::exists(e.path() / "problem.json")) out.push_back(e.path().filename().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

PromptTemplates templates() { return PromptTemplates::load(data_dir() / "templates"); }

int run_command(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return files;
}

std::string arbiter_stim(const std::vector<std::string>& rows) {
  std::string s = "inputs: rst[1], r1[1], r2[1]\n";
  for (const auto& r : rows) s += std::string{r[0], ' ', r[1], ' ', r[2], '\n'};
  return s;
}

const Mutant& find_mutant(const Problem& p, const std::string& bc) {
  for (const auto& m : p.mutants) {
    if (m.bc == bc) return m;
  }
  throw std::runtime_error("missing mutant " + bc);
}

// --- 1 ------------------------------------------------------------------------------

void simulator_oracle_equivalence(Outcome& o) {
  const auto t0 = Clock::now();
  size_t designs = 0, patterns = 0;
  for (const std::string& name : desk_problems()) {
    const ProblemManifest m = ProblemManifest::load(problem_dir(name));
    if (m.kind != ProblemKind::kCombinational) continue;
    std::vector<DesignSource> sources{DesignSource::reference(slurp(m.reference))};
    for (const auto& e : fs::directory_iterator(problem_dir(name))) {
      const std::string f = e.path().filename().string();
      if (f.rfind("bc", 0) == 0 && e.path().extension() == ".sv") {
        sources.push_back(DesignSource::mutant(slurp(e.path()), e.path().stem().string()));
      }
    }
    for (const DesignSource& src : sources) {
      const ElaboratedDesign d = load_design(src);
      const DesignSignature sig = extract_signature(d);
      const auto inputs = sig.stimulus_inputs();
      int bits = 0;
      for (const auto& p : inputs) bits += p.width;
      if (bits > 12) continue;
      ++designs;

      // Every pattern once, enumerated here rather than by the library.
      UnitTest all;
      all.id = "all";
      all.inputs = inputs;
      for (uint64_t v = 0; v < (uint64_t{1} << bits); ++v) {
        std::vector<uint64_t> row;
        int shift = 0;
        for (const auto& p : inputs) {
          row.push_back((v >> shift) & mask_of(p.width));
          shift += p.width;
        }
        all.rows.push_back(row);
      }
      const Trace trace = run(d, all);
      AstEvaluator eval(d.ast);
      for (size_t n = 0; n < all.rows.size(); ++n) {
        std::map<std::string, uint64_t> in;
        for (size_t k = 0; k < inputs.size(); ++k) in[inputs[k].name] = all.rows[n][k];
        const auto expect = eval.run(in);
        for (const auto& s : trace.signals) {
          o.expect(expect.at(s.name) == s.values[n],
                   name + "/" + src.label + " pattern " + std::to_string(n) + " signal " + s.name);
        }
        ++patterns;
      }
    }
  }
  const double secs = seconds_since(t0);
  o.expect(designs >= 2, "fewer than two combinational designs");
  o.expect(secs < 5.0, "took longer than 5 s");
  o.detail << designs << " designs, " << patterns << " patterns, " << secs << " s";
}

// --- 2 ------------------------------------------------------------------------------

void arbiter_fidelity(Outcome& o) {
  const ElaboratedDesign d =
      load_design(DesignSource::reference(slurp(problem_dir("arbiter") / "ref.sv")));
  // Rows are rst r1 r2. Hand-stepped: the state register reads IDLE=0,
  // GNT1=1, GNT2=2 and the grants follow next_state one edge later.
  const UnitTest t = parse_stimulus(arbiter_stim(
      {"100", "010", "011", "001", "011", "010", "000", "001", "000", "011",
       "111", "101", "001", "011", "111", "011", "010", "000", "010", "100"}));
  const std::vector<uint64_t> state = {0, 1, 1, 2, 2, 1, 0, 2, 0, 1, 0, 0, 2, 2, 0, 1, 1, 0, 1, 0};
  const std::vector<uint64_t> g1 = {0, 1, 1, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 1, 0, 1, 0};
  const std::vector<uint64_t> g2 = {0, 0, 0, 1, 1, 0, 0, 1, 0, 0, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0};
  const Trace tr = run(d, t);
  o.expect(tr.cycles == 20, "cycle count");
  o.expect(tr.find("state")->values == state, "state sequence");
  o.expect(tr.find("g1")->values == g1, "g1 sequence");
  o.expect(tr.find("g2")->values == g2, "g2 sequence");
  o.detail << "20 cycles, 4 reset cycles";
}

// --- 3 ------------------------------------------------------------------------------

void mutation_soundness(Outcome& o) {
  const auto t0 = Clock::now();
  size_t problems = 0, records = 0, sound = 0;
  for (const std::string& name : desk_problems()) {
    const Problem p = load_problem(problem_dir(name), false);
    const CorpusManifest corpus = read_corpus(problem_dir(name));
    o.expect(corpus.seed == 1, name + " corpus seed");
    ++problems;
    for (const CorpusEntry& e : corpus.mutants) {
      ++records;
      bool ok = false;
      try {
        const ElaboratedDesign m =
            load_design(DesignSource::mutant(slurp(problem_dir(name) / e.file), e.bc));
        const bool same_sig = extract_signature(m, p.spec.overrides) == p.spec.signature;
        const UnitTest w = parse_stimulus(e.witness);
        const auto diff = naive_diff(run(*p.oracle, w), run(m, w), p.spec.signature.outputs);
        ok = same_sig && diff.any;
      } catch (const Error& err) {
        o.expect(false, name + "/" + e.bc + ": " + err.what());
      }
      o.expect(ok, name + "/" + e.bc + " unsound");
      sound += ok;
    }
  }
  const double secs = seconds_since(t0);
  o.expect(problems >= 4, "fewer than four problems");
  o.expect(secs < 30.0, "took longer than 30 s");
  o.detail << sound << "/" << records << " records over " << problems << " problems, " << secs
           << " s";
}

// --- 4 ------------------------------------------------------------------------------

RunConfig desk_config(const fs::path& out, int jobs) {
  RunConfig c;
  c.binding.kind = ProviderKind::kMock;
  c.binding.script_dir = data_dir() / "mock" / "desk";
  c.output_dir = out;
  c.jobs = jobs;
  c.seed = 1;
  c.problems = desk_problems();
  return c;
}

std::vector<fs::path> desk_dirs() {
  std::vector<fs::path> dirs;
  for (const auto& n : desk_problems()) dirs.push_back(problem_dir(n));
  return dirs;
}

void metric_cross_validation(Outcome& o) {
  TempDir tmp("acc_metrics");
  const RunConfig cfg = desk_config(tmp.path() / "run", 2);
  MockProvider mock(cfg.binding.script_dir);
  const auto runs = evaluate_dirs(desk_dirs(), cfg, mock, templates());
  size_t cells = 0;
  for (const EvalRun& r : runs) {
    o.expect(r.fatal.empty(), r.problem + " fatal: " + r.fatal);
    const Problem p = load_problem(problem_dir(r.problem), true);
    const auto written = nlohmann::json::parse(slurp(cfg.output_dir / r.problem / "matrix.json"));
    std::map<std::pair<std::string, std::string>, nlohmann::json> by_pair;
    for (const auto& c : written.at("cells")) by_pair[{c.at("source"), c.at("target")}] = c;

    for (const MatrixCell& c : r.cells) {
      if (!c.result) continue;
      ++cells;
      size_t s = 0, t = 0;
      for (size_t k = 0; k < r.mutants.size(); ++k) {
        if (r.mutants[k] == c.source) s = k;
        if (r.mutants[k] == c.target) t = k;
      }
      const ElaboratedDesign target = load_design(p.mutants[t].source);
      size_t divergent = 0, total = 0;
      for (const UnitTest& u : r.generations[s].accepted) {
        const NaiveDiff d = naive_diff(run(*p.oracle, u), run(target, u), p.spec.signature.outputs);
        divergent += d.divergent;
        total += d.cycles;
      }
      const int ar = divergent > 0 ? 1 : 0;
      const double dr = static_cast<double>(divergent) / static_cast<double>(total);
      const double da = ar ? dr : 0.0;
      const std::string where = r.problem + " " + c.source + "->" + c.target;
      o.expect(c.result->ar_i == ar && c.result->dr == dr && c.result->da == da, where);
      const auto& w = by_pair.at({c.source, c.target});
      o.expect(w.at("ar").get<int>() == ar && w.at("dr").get<double>() == dr &&
                   w.at("da").get<double>() == da,
               where + " (matrix.json)");
      o.expect(da <= dr && da <= ar, where + " DA bound");
    }
  }
  o.expect(cells > 0, "no evaluated cells");
  o.detail << cells << " cells recomputed";
#ifdef HWUT_PYTHON
  const std::string cmd = std::string("'") + HWUT_PYTHON + "' '" + HWUT_SOURCE_DIR +
                          "/tools/crosscheck_metrics.py' '" + cfg.output_dir.string() + "' >/dev/null";
  const int rc = run_command(cmd);
  o.expect(rc == 0, "VCD cross-check script exit " + std::to_string(rc));
  o.detail << ", VCD cross-check script " << (rc == 0 ? "agrees" : "disagrees");
#endif
}

// --- 5 ------------------------------------------------------------------------------

Trace one_output(std::vector<uint64_t> y) {
  Trace t;
  t.cycles = y.size();
  t.signals.push_back({"y", 1, std::move(y)});
  return t;
}

void formula_spot_checks(Outcome& o) {
  const std::vector<PortInfo> outs = {{"y", 1}};
  o.expect(divergence_rate(one_output({0, 1, 1, 0}), one_output({0, 1, 1, 0}), outs) == 0.0,
           "DR(identical)");
  o.expect(divergence_rate(one_output({0, 1, 1, 0}), one_output({0, 1, 0, 0}), outs) == 0.25,
           "DR(n=4, 1 divergent)");
  std::vector<bool> attacked(10, true);
  attacked[3] = attacked[7] = false;
  o.expect(attack_rate(attacked) == 0.8, "AR(8 of 10)");
  const BinnedDistribution b = bin({0.5});
  o.expect(b.median_bin == 3 && b.counts[2] == 1 && bin_index(0.5) == 3, "bin([0.5])");
  o.detail << "DR=0, DR=0.25, AR=0.8, bin 3";
}

// --- 6 ------------------------------------------------------------------------------

void testgen_contract(Outcome& o) {
  const Problem arb = load_problem(problem_dir("arbiter"), true);
  const std::vector<std::vector<std::string>> rising = {
      {"100", "010"},
      {"100", "010", "011", "001", "000"},
      {"100", "010", "011", "001", "011", "010", "000", "001", "000", "011",
       "111", "101", "001", "011", "111", "011", "010", "000", "010", "100"}};
  TempDir tmp("acc_testgen");
  MockScript script(tmp.path() / "mock");
  script.add("arbiter/BC06/testgen", fenced(arbiter_stim(rising[0])));
  script.add("arbiter/BC06/testgen", fenced(arbiter_stim(rising[0])));  // flat
  script.add("arbiter/BC06/testgen", fenced(arbiter_stim(rising[1])));
  script.add("arbiter/BC06/testgen", fenced(arbiter_stim(rising[2])));
  script.add("full_adder/testgen", fenced("inputs: a[1], b[1], c[1]\n1 1 0\n0 1 1\n"));
  script.add("full_adder/testgen", fenced("inputs: a[1], b[1], c[1]\n1 1 1\n"));
  const fs::path dir = script.write();
  const PromptTemplates t = templates();
  const GenConfig cfg = GenConfig::make(Strategy::kNlsc, 0);

  MockProvider mock(dir);
  const LoopContext ctx{arb.spec, *arb.oracle, t, cfg, mock, {}};
  const TestGenState st = generate_tests(ctx, find_mutant(arb, "BC06").source, "BC06");
  o.expect(st.history.size() >= 4, "history length");
  std::vector<UnitTest> union_so_far;
  double prev = 0.0;
  std::string trail;
  for (const TestGenStep& s : st.history) {
    if (!s.accepted) continue;
    union_so_far.push_back(*s.test);
    const double recomputed =
        collect_coverage(*arb.oracle, arb.spec.signature, union_so_far).scalar();
    o.expect(s.bcov > prev, "bCov not strictly increasing at step " + std::to_string(s.iteration));
    o.expect(s.bcov == recomputed, "bCov differs from recomputed union coverage");
    prev = s.bcov;
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.4f", s.bcov);
    trail += (trail.empty() ? "" : " -> ") + std::string(buf);
  }
  o.expect(st.history.size() >= 2 && !st.history[1].accepted && !st.history[1].reason.empty(),
           "flat test not rejected");
  o.expect(st.accepted.size() == 3, "expected 3 accepted tests");

  const Problem fa = load_problem(problem_dir("full_adder"), true);
  MockProvider fa_mock(dir);
  const LoopContext fa_ctx{fa.spec, *fa.oracle, t, cfg, fa_mock, {}};
  const TestGenState fst = generate_tests(fa_ctx, find_mutant(fa, "BC01").source, "BC01");
  o.expect(fa_mock.calls() == 1 && fst.provider_calls == 1, "combinational calls != 1");
  o.detail << "bCov " << trail << ", flat rejected, full adder " << fa_mock.calls() << " call";
}

// --- 7 ------------------------------------------------------------------------------

void debug_contract(Outcome& o) {
  const PromptTemplates t = templates();
  const GenConfig cfg = GenConfig::make(Strategy::kNlsc, 0);
  const Problem arb = load_problem(problem_dir("arbiter"), true);
  const Mutant& bc07 = find_mutant(arb, "BC07");
  const std::vector<UnitTest> suite = {parse_stimulus(
      arbiter_stim({"100", "010", "011", "001", "011", "010", "000", "001", "000", "011"}), "t1")};

  // (a)
  {
    TempDir tmp("acc_dbg_a");
    MockScript script(tmp.path() / "mock");
    script.add("debug", fenced(arb.spec.reference.text, "verilog"));
    MockProvider mock(script.write());
    const LoopContext ctx{arb.spec, *arb.oracle, t, cfg, mock, {}};
    const DebugState st = debug(ctx, bc07.source, "BC07", suite);
    o.expect(st.initial_pass.value() < 1.0, "(a) target already passes");
    o.expect(st.iterations == 1 && st.bpass.value() == 1.0, "(a) reference patch");
  }
  // (b)
  {
    TempDir tmp("acc_dbg_b");
    MockScript script(tmp.path() / "mock");
    script.add("debug", fenced(bc07.source.text, "verilog"));
    script.add("debug", "Consider the reset branch.");
    script.add("debug", fenced(arb.spec.reference.text.substr(0, 200)));
    script.add("debug", fenced("module arbiter(input clk, output g1);\nendmodule\n"));
    script.add("debug", fenced(bc07.source.text, "verilog"));
    MockProvider mock(script.write());
    const LoopContext ctx{arb.spec, *arb.oracle, t, cfg, mock, {}};
    const DebugState st = debug(ctx, bc07.source, "BC07", suite);
    o.expect(st.iterations == 5, "(b) iterations != 5");
    o.expect(st.current.text == bc07.source.text, "(b) design not retained");
    PassFraction prev = st.initial_pass;
    for (const DebugStep& s : st.history) {
      o.expect(!prev.greater_than(s.bpass), "(b) bPass decreased");
      o.expect(!s.accepted, "(b) useless patch accepted");
      prev = s.bpass;
    }
    o.expect(st.bpass.passed == st.initial_pass.passed, "(b) bPass changed");
  }
  // (c)
  std::string trail;
  {
    const Problem alu = load_problem(problem_dir("alu4"), true);
    const auto tests = alu4_tests();
    // Hand model first: 4 of 10 rows pass the doubly broken design, 7 once
    // SUB is repaired.
    const double f0 = alu4_pass_fraction(false, false);
    const double f1 = alu4_pass_fraction(true, false);
    o.expect(f0 == 0.4 && f1 == 0.7, "(c) hand model fractions");
    // The oracle agrees with the hand model.
    const auto rows = alu4_rows();
    for (size_t i = 0; i < tests.size(); ++i) {
      const Trace tr = run(*alu.oracle, tests[i]);
      const auto [res, zero] = alu4_model(rows[i], true, true);
      o.expect(tr.find("result")->values[0] == res && tr.find("zero")->values[0] == zero,
               "(c) oracle row " + std::to_string(i));
    }
    TempDir tmp("acc_dbg_c");
    MockScript script(tmp.path() / "mock");
    script.add("debug", fenced(alu4_variant("x - y", "x | y"), "verilog"));
    script.add("debug", fenced(alu.spec.reference.text, "verilog"));
    MockProvider mock(script.write());
    const LoopContext ctx{alu.spec, *alu.oracle, t, cfg, mock, {}};
    const DebugState st =
        debug(ctx, DesignSource::mutant(alu4_variant("x + y", "x | y"), "BCX"), "BCX", tests);
    std::vector<double> history = {st.initial_pass.value()};
    for (const DebugStep& s : st.history) history.push_back(s.bpass.value());
    o.expect(history == std::vector<double>{f0, f1, 1.0}, "(c) bPass history");
    for (double v : history) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "%.1f", v);
      trail += (trail.empty() ? "" : " -> ") + std::string(buf);
    }
  }
  o.detail << "(a) 1 iteration, (b) 5 iterations retained, (c) bPass " << trail;
}

// --- 8 ------------------------------------------------------------------------------

void end_to_end_determinism(Outcome& o) {
  TempDir tmp("acc_e2e");
  double worst = 0.0;
  size_t problems = 0, cells = 0;
  for (const char* name : {"a", "b"}) {
    const auto t0 = Clock::now();
    const RunConfig cfg = desk_config(tmp.path() / name, name[0] == 'a' ? 1 : 4);
    MockProvider mock(cfg.binding.script_dir);
    const auto runs = evaluate_dirs(desk_dirs(), cfg, mock, templates());
    write_report(cfg.output_dir);
    worst = std::max(worst, seconds_since(t0));
    problems = runs.size();
    cells = 0;
    for (const auto& r : runs) {
      o.expect(r.fatal.empty(), r.problem + " fatal");
      o.expect(r.cells.size() == r.mutants.size() * r.mutants.size(), r.problem + " incomplete");
      for (const auto& c : r.cells) {
        o.expect(c.result.has_value() || !c.skipped.empty(), "cell without value or reason");
        cells += 1;
      }
    }
  }
  o.expect(problems >= 4, "fewer than four problems");
  o.expect(worst < 60.0, "evaluate took longer than 60 s");
  const auto a = tree(tmp.path() / "a");
  const auto b = tree(tmp.path() / "b");
  o.expect(a.size() > 0 && a == b, "run trees differ");
#ifdef HWUT_PYTHON
  const std::string cmd = std::string("'") + HWUT_PYTHON + "' '" + HWUT_SOURCE_DIR +
                          "/tools/validate_report.py' '" + (tmp.path() / "a" / "report.json").string() +
                          "' >/dev/null";
  o.expect(run_command(cmd) == 0, "report.json fails schema validation");
#else
  o.expect(false, "no Python interpreter for schema validation");
#endif
  o.detail << problems << " problems, " << cells << " cells, " << a.size()
           << " files identical across reruns, schema-valid, slowest run " << worst << " s";
}

// --- 9 ------------------------------------------------------------------------------

// Stimulus responses that can never be accepted.
std::string broken_stimulus(std::mt19937_64& rng, const DesignSignature& sig) {
  const UnitTest base = random_test(sig, 2 + static_cast<int>(rng() % 10), rng);
  std::string text = format_stimulus(base);
  switch (rng() % 7) {
    case 0: {  // truncated inside the last row
      text.pop_back();
      text = text.substr(0, text.rfind(' '));
      return fenced(text);
    }
    case 1: {  // reordered columns
      auto cols = sig.stimulus_inputs();
      std::rotate(cols.begin(), cols.begin() + 1, cols.end());
      std::string h = "inputs:";
      for (size_t i = 0; i < cols.size(); ++i) {
        h += (i ? ", " : " ") + cols[i].name + "[" + std::to_string(cols[i].width) + "]";
      }
      return fenced(h + text.substr(text.find('\n')));
    }
    case 2: {  // digit outside binary
      const size_t nl = text.find('\n');
      text[nl + 1] = '2';
      return fenced(text);
    }
    case 3:
      return "I would toggle every input and check the grants.";
    case 4:  // header only
      return fenced(text.substr(0, text.find('\n') + 1));
    case 5: {  // truncated header
      const size_t comma = text.find(',');
      return fenced(text.substr(0, comma) + text.substr(text.find('\n')));
    }
    default: {  // an extra column in one row
      const size_t nl = text.find('\n', text.find('\n') + 1);
      text.insert(nl, " 1");
      return fenced(text);
    }
  }
}

std::string broken_patch(std::mt19937_64& rng, const std::string& ref) {
  std::string t = ref;
  auto replace = [&](const std::string& from, const std::string& to) {
    t.replace(t.find(from), from.size(), to);
  };
  switch (rng() % 7) {
    case 0:  // truncated before endmodule
      return fenced(t.substr(0, t.find("endmodule") - (rng() % 200)), "verilog");
    case 1:
      replace("output reg g2", "output reg grant2");
      return fenced(t, "verilog");
    case 2:
      replace("state <= next_state;", "state <= next_state +;");
      return fenced(t, "verilog");
    case 3:
      return "The bug is in the IDLE arm; swap the priorities.";
    case 4:
      replace("module arbiter", "module arbiter_fixed");
      return fenced(t, "verilog");
    case 5:
      replace("state <= next_state;", "state <= nxt_state;");
      return fenced(t, "verilog");
    default:
      replace("input      r2,", "input      r2,\n    input      r3,");
      return fenced(t, "verilog");
  }
}

void robustness(Outcome& o) {
  const Problem arb = load_problem(problem_dir("arbiter"), true);
  const PromptTemplates t = templates();
  const GenConfig cfg = GenConfig::make(Strategy::kNlsc, 0);
  TempDir tmp("acc_fuzz");
  MockScript script(tmp.path() / "mock");
  std::mt19937_64 rng(20240601);
  constexpr int kSessions = 100, kPerSession = 5;
  auto sid = [](const char* p, int i) {
    char b[16];
    std::snprintf(b, sizeof b, "%s%03d", p, i);
    return std::string(b);
  };
  for (int i = 0; i < kSessions; ++i) {
    for (int k = 0; k < kPerSession; ++k) {
      script.add("arbiter/" + sid("G", i) + "/testgen", broken_stimulus(rng, arb.spec.signature));
      script.add("arbiter/" + sid("D", i) + "/debug", broken_patch(rng, arb.spec.reference.text));
    }
  }
  MockProvider mock(script.write());
  const LoopContext ctx{arb.spec, *arb.oracle, t, cfg, mock, {}};
  const UnitTest failing = parse_stimulus(
      arbiter_stim({"100", "010", "011", "001", "011", "010", "000", "001", "000", "011"}), "t1");

  size_t rejected = 0, steps = 0;
  std::map<std::string, int> kinds;
  for (int i = 0; i < kSessions; ++i) {
    const Mutant& m = arb.mutants[static_cast<size_t>(i) % arb.mutants.size()];
    try {
      const TestGenState g = generate_tests(ctx, m.source, sid("G", i));
      for (const auto& s : g.history) {
        ++steps;
        rejected += !s.accepted && !s.reason.empty();
        o.expect(!s.accepted, "broken stimulus accepted in " + sid("G", i));
        kinds[s.reason.substr(0, s.reason.find(':'))]++;
      }
      const DebugState d = debug(ctx, find_mutant(arb, "BC07").source, sid("D", i), {failing});
      for (const auto& s : d.history) {
        ++steps;
        rejected += !s.accepted && !s.reason.empty();
        o.expect(!s.accepted, "broken patch accepted in " + sid("D", i));
        kinds[s.reason.substr(0, s.reason.find(':'))]++;
      }
    } catch (const std::exception& e) {
      o.expect(false, std::string("loop threw: ") + e.what());
    }
  }
  o.expect(steps == 1000, "expected 1000 steps, got " + std::to_string(steps));
  o.expect(rejected == steps, "rejections without a reason");
  o.expect(mock.calls() == 1000, "not every scripted response was consumed");
  o.detail << rejected << "/" << steps << " rejected with a reason (";
  bool first = true;
  for (const auto& [k, n] : kinds) {
    o.detail << (first ? "" : ", ") << k << " " << n;
    first = false;
  }
  o.detail << ")";
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<void(Outcome&)> fn;
  };
  const std::vector<Criterion> criteria = {
      {"simulator oracle equivalence", simulator_oracle_equivalence},
      {"arbiter fidelity", arbiter_fidelity},
      {"mutation soundness", mutation_soundness},
      {"metric cross-validation", metric_cross_validation},
      {"formula spot-checks", formula_spot_checks},
      {"test generation loop contract", testgen_contract},
      {"debug loop contract", debug_contract},
      {"end-to-end determinism", end_to_end_determinism},
      {"robustness under malformed responses", robustness},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      criteria[i].fn(o);
    } catch (const std::exception& e) {
      o.expect(false, std::string("exception: ") + e.what());
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << ". " << criteria[i].name
              << ": " << o.detail.str() << std::endl;
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
