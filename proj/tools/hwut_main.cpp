// hwut command-line driver.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 provider failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hwut/error.hpp"
#include "hwut/manifest.hpp"
#include "hwut/mutator.hpp"
#include "hwut/orchestrator.hpp"
#include "hwut/parser.hpp"
#include "hwut/report.hpp"
#include "hwut/simulator.hpp"
#include "hwut/vcd.hpp"

namespace fs = std::filesystem;
using namespace hwut;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitProvider = 3;

struct Common {
  std::string data_dir = HWUT_DATA_DIR;
  std::string strategy = "nlsc";
  int shots = 0;
  std::string provider = "mock";
  std::string script;
  uint64_t seed = 1;
  int jobs = 1;
  size_t mismatch_k = 20;
  int iters = 5;
  std::string out;
};

void add_loop_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--strategy", c.strategy, "Prompt strategy")
      ->check(CLI::IsMember({"nls", "nlsc"}, CLI::ignore_case));
  cmd->add_option("--shots", c.shots, "Few-shot exemplars")->check(CLI::IsMember({0, 5}));
  cmd->add_option("--provider", c.provider, "Completion provider")
      ->check(CLI::IsMember({"mock", "live"}));
  cmd->add_option("--script", c.script, "Mock response directory (default <data>/mock/desk)");
  cmd->add_option("--iters", c.iters, "Iteration cap of the loops")->check(CLI::Range(1, 100));
  cmd->add_option("--mismatch-k", c.mismatch_k, "Mismatch rows shown to the debugger")
      ->check(CLI::Range(1, 10000));
}

fs::path problem_dir(const Common& c, const std::string& arg) {
  if (fs::exists(fs::path(arg) / "problem.json")) return arg;
  return fs::path(c.data_dir) / "problems" / arg;
}

RunConfig run_config(const Common& c) {
  RunConfig cfg;
  cfg.gen = GenConfig::make(parse_strategy(c.strategy), c.shots);
  if (c.provider == "live") {
    cfg.binding = ProviderBinding::live_from_env();
    if (!c.out.empty()) cfg.binding.log_dir = fs::path(c.out) / "provider_log";
  } else {
    cfg.binding.kind = ProviderKind::kMock;
    cfg.binding.script_dir =
        c.script.empty() ? fs::path(c.data_dir) / "mock" / "desk" : fs::path(c.script);
  }
  cfg.binding.max_concurrency = std::max(1, c.jobs);
  cfg.seed = c.seed;
  cfg.loops.testgen_iters = c.iters;
  cfg.loops.debug_iters = c.iters;
  cfg.loops.mismatch_k = c.mismatch_k;
  cfg.jobs = c.jobs;
  cfg.output_dir = c.out;
  return cfg;
}

std::unique_ptr<Provider> open_provider(const RunConfig& cfg) {
  return make_provider(cfg.binding);
}

PromptTemplates templates(const Common& c) {
  return PromptTemplates::load(fs::path(c.data_dir) / "templates");
}

std::string bits(uint64_t v, int width) {
  std::string s;
  for (int b = width - 1; b >= 0; --b) s += ((v >> b) & 1) ? '1' : '0';
  return s;
}

// --- commands -------------------------------------------------------------------

int cmd_parse(const std::string& file, bool ast) {
  const DesignSource src = DesignSource::reference(read_text(file));
  try {
    const ElaboratedDesign d = load_design(src);
    std::cout << extract_signature(d).to_text();
    if (ast) std::cout << "\n" << pretty_print(d.ast);
  } catch (const Error& e) {
    std::cerr << e.diagnostic(file) << "\n";
    return kExitData;
  }
  return kExitOk;
}

int cmd_simulate(const std::string& design_file, const std::string& stim_file,
                 const std::string& vcd, bool coverage) {
  const ElaboratedDesign d = load_design(DesignSource::reference(read_text(design_file)));
  const DesignSignature sig = extract_signature(d);
  const UnitTest test = parse_stimulus(read_text(stim_file), fs::path(stim_file).stem().string());
  Simulator sim(d, sig);
  CoverageData data(d);
  const Trace trace = sim.run(test, coverage ? &data : nullptr);
  if (!vcd.empty()) {
    const std::string text = export_vcd(trace, sig);
    if (vcd == "-") {
      std::cout << text;
    } else {
      write_text(vcd, text);
    }
  }
  if (vcd != "-") {
    std::cout << "cycle";
    for (const TraceSignal& s : trace.signals) std::cout << " " << s.name;
    std::cout << "\n";
    for (size_t n = 0; n < trace.cycles; ++n) {
      std::cout << n;
      for (const TraceSignal& s : trace.signals) std::cout << " " << bits(s.values[n], s.width);
      std::cout << "\n";
    }
  }
  if (coverage) {
    const CoverageReport r = make_coverage_report(d, data);
    std::printf("coverage line %d/%d branch %d/%d toggle %d/%d fsm %d/%d scalar %.4f\n",
                r.line.covered, r.line.total, r.branch.covered, r.branch.total,
                r.toggle.covered, r.toggle.total, r.fsm.covered, r.fsm.total, r.scalar());
    for (const std::string& u : r.uncovered) std::cout << "  " << u << "\n";
  }
  return kExitOk;
}

int cmd_mutate(const Common& c, const std::string& problem) {
  const Problem p = load_problem(problem_dir(c, problem), false);
  MutatorOptions opt;
  opt.overrides = p.manifest.overrides;
  const Corpus corpus = make_corpus(*p.oracle, c.seed, opt);
  write_corpus(p.manifest, corpus, c.seed);
  std::cout << p.spec.id << ": " << corpus.mutants.size() << " mutants, "
            << corpus.skipped.size() << " operators not applicable (seed " << c.seed << ")\n";
  for (const MutantRecord& m : corpus.mutants) {
    std::cout << "  " << m.bc << " " << m.kind << "  line " << m.site.line << ": '"
              << m.site.before << "' -> '" << m.site.after << "'  (" << m.method
              << ", site " << m.sites_tried << "/" << m.sites_total << ")\n";
  }
  for (const SkippedOperator& s : corpus.skipped) {
    std::cout << "  " << s.bc << " " << s.kind << "  skipped: " << s.reason << "\n";
  }
  return kExitOk;
}

const Mutant& find_mutant(const Problem& p, const std::string& bc) {
  for (const Mutant& m : p.mutants) {
    if (m.bc == bc) return m;
  }
  throw Error(Errc::kManifestError, "problem '" + p.spec.id + "' has no mutant " + bc);
}

int cmd_gen_tests(const Common& c, const std::string& problem, const std::string& source) {
  const Problem p = load_problem(problem_dir(c, problem), true);
  const Mutant& m = find_mutant(p, source);
  const RunConfig cfg = run_config(c);
  auto provider = open_provider(cfg);
  const PromptTemplates t = templates(c);
  const LoopContext ctx{p.spec, *p.oracle, t, cfg.gen, *provider, cfg.loops};
  const TestGenState st = generate_tests(ctx, m.source, m.bc);
  for (const TestGenStep& s : st.history) {
    std::printf("iteration %d: %s%s%s (bCov %.4f)\n", s.iteration,
                s.accepted ? "accepted" : "rejected", s.accepted ? "" : ": ",
                s.reason.c_str(), s.bcov);
  }
  std::printf("%zu tests accepted, coverage %.4f, %d provider calls\n", st.accepted.size(),
              st.bcov, st.provider_calls);
  if (!c.out.empty()) {
    for (const UnitTest& u : st.accepted) {
      write_text(fs::path(c.out) / (u.id + ".stim"), format_stimulus(u));
    }
    write_text(fs::path(c.out) / "testgen_history.json", testgen_to_json(st));
  }
  return kExitOk;
}

int cmd_debug(const Common& c, const std::string& problem, const std::string& target,
              const std::vector<std::string>& test_files) {
  const Problem p = load_problem(problem_dir(c, problem), true);
  const Mutant& m = find_mutant(p, target);
  std::vector<UnitTest> tests;
  for (const std::string& f : test_files) {
    UnitTest u = parse_stimulus(read_text(f), fs::path(f).stem().string());
    check_conforms(u, p.spec.signature);
    tests.push_back(std::move(u));
  }
  const RunConfig cfg = run_config(c);
  auto provider = open_provider(cfg);
  const PromptTemplates t = templates(c);
  const LoopContext ctx{p.spec, *p.oracle, t, cfg.gen, *provider, cfg.loops};
  const DebugState st = debug(ctx, m.source, m.bc, tests);
  std::printf("initial pass %zu/%zu\n", st.initial_pass.passed, st.initial_pass.total);
  for (const DebugStep& s : st.history) {
    std::printf("iteration %d: %s%s%s (bPass %zu/%zu)\n", s.iteration,
                s.accepted ? "accepted" : "rejected", s.accepted ? "" : ": ",
                s.reason.c_str(), s.bpass.passed, s.bpass.total);
  }
  std::printf("final pass %zu/%zu after %d iterations\n", st.bpass.passed, st.bpass.total,
              st.iterations);
  if (!c.out.empty()) {
    write_text(fs::path(c.out) / (m.bc + "_final.sv"), st.current.text);
    write_text(fs::path(c.out) / "debug_history.json", debug_to_json(st));
  }
  return kExitOk;
}

int cmd_evaluate(Common c, const std::vector<std::string>& problems) {
  RunConfig cfg = run_config(c);
  std::vector<fs::path> dirs;
  for (const std::string& p : problems) {
    dirs.push_back(problem_dir(c, p));
    cfg.problems.push_back(dirs.back().filename().string());
  }
  auto provider = open_provider(cfg);
  const PromptTemplates t = templates(c);
  const auto runs = evaluate_dirs(dirs, cfg, *provider, t,
                                  [](const std::string& msg) { std::cerr << msg << "\n"; });
  const RunReport report = write_report(cfg.output_dir);
  std::cout << report.scoreboard;
  for (const EvalRun& r : runs) {
    if (!r.fatal.empty()) return kExitData;
  }
  return kExitOk;
}

int cmd_report(const std::string& run_dir) {
  const RunReport report = write_report(run_dir);
  std::cout << report.scoreboard;
  return kExitOk;
}

int exit_code(const Error& e) {
  switch (e.code()) {
    case Errc::kProviderTimeout:
    case Errc::kProviderRejection:
    case Errc::kScriptExhausted:
      return kExitProvider;
    default:
      return kExitData;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hwut: unit-test generation and debugging loops for RTL designs"};
  app.set_version_flag("--version", std::string("hwut ") + HWUT_VERSION);
  app.require_subcommand(1);
  app.fallthrough();
  Common c;
  app.add_option("--data", c.data_dir, "Data directory with problems/, templates/, mock/");

  std::string file, stim, vcd, problem, bc, run_dir;
  bool ast = false, coverage = false;
  std::vector<std::string> tests, problems;

  auto* parse = app.add_subcommand("parse", "Parse and elaborate a design, print its signature");
  parse->add_option("design", file, "Design file")->required();
  parse->add_flag("--ast", ast, "Also print the canonical source");

  auto* sim = app.add_subcommand("simulate", "Simulate a design on a stimulus file");
  sim->add_option("design", file, "Design file")->required();
  sim->add_option("stimulus", stim, "Stimulus file")->required();
  sim->add_option("--vcd", vcd, "Write a VCD ('-' for stdout)");
  sim->add_flag("--coverage", coverage, "Report coverage");

  auto* mutate = app.add_subcommand("mutate", "Build the mutant corpus of a problem");
  mutate->add_option("problem", problem, "Problem name or directory")->required();
  mutate->add_option("--seed", c.seed, "Mutation seed");

  auto* gen = app.add_subcommand("gen-tests", "Run the test generation loop for one mutant");
  gen->add_option("problem", problem, "Problem name or directory")->required();
  gen->add_option("--source", bc, "Seeding mutant, e.g. BC03")->required();
  gen->add_option("--out", c.out, "Directory for accepted tests and history");
  add_loop_flags(gen, c);

  auto* dbg = app.add_subcommand("debug", "Run the debugging loop for one mutant");
  dbg->add_option("problem", problem, "Problem name or directory")->required();
  dbg->add_option("--target", bc, "Mutant to repair, e.g. BC03")->required();
  dbg->add_option("--tests", tests, "Stimulus files")->required();
  dbg->add_option("--out", c.out, "Directory for the final design and history");
  add_loop_flags(dbg, c);

  auto* eval = app.add_subcommand("evaluate", "Evaluate the source x target matrix");
  eval->add_option("problems", problems, "Problem names or directories")->required();
  eval->add_option("--out", c.out, "Run directory")->required();
  eval->add_option("--seed", c.seed, "Run seed (recorded in the report)");
  eval->add_option("--jobs", c.jobs, "Parallel loops")->check(CLI::Range(1, 256));
  add_loop_flags(eval, c);

  auto* report = app.add_subcommand("report", "Summarize a run directory");
  report->add_option("run", run_dir, "Run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*parse) return cmd_parse(file, ast);
    if (*sim) return cmd_simulate(file, stim, vcd, coverage);
    if (*mutate) return cmd_mutate(c, problem);
    if (*gen) return cmd_gen_tests(c, problem, bc);
    if (*dbg) return cmd_debug(c, problem, bc, tests);
    if (*eval) return cmd_evaluate(c, problems);
    if (*report) return cmd_report(run_dir);
  } catch (const Error& e) {
    std::cerr << "hwut: " << errc_name(e.code()) << ": " << e.what() << "\n";
    if (e.code() == Errc::kInvalidArgument) return kExitUsage;
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "hwut: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
