#include "hwut/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <memory>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "hwut/error.hpp"
#include "hwut/response.hpp"
#include "hwut/vcd.hpp"

namespace hwut {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string fraction_text(const PassFraction& f) {
  return std::to_string(f.passed) + "/" + std::to_string(f.total);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string describe(const Error& e) {
  return std::string(errc_name(e.code())) + ": " + e.what();
}

// Runs fn(0..n-1) on up to `jobs` threads. Exceptions escaping fn are
// rethrown on the caller after all workers stop.
void parallel_for(size_t n, int jobs, const std::function<void(size_t)>& fn) {
  const size_t workers = std::min<size_t>(n, static_cast<size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::vector<Verdict> evaluate_suite(const ElaboratedDesign& oracle,
                                    const ElaboratedDesign& design,
                                    const DesignSignature& signature,
                                    const std::vector<UnitTest>& tests) {
  Simulator ref(oracle, signature);
  Simulator dut(design, signature);
  std::vector<Verdict> out;
  out.reserve(tests.size());
  for (const UnitTest& t : tests) {
    const Trace expected = ref.run(t);
    out.push_back(compare(dut.run(t), expected, signature.outputs));
  }
  return out;
}

// --- test generation ------------------------------------------------------------

TestGenState generate_tests(const LoopContext& ctx, const DesignSource& source,
                            const std::string& source_id) {
  const ProblemSpec& spec = ctx.spec;
  const DesignSignature& sig = spec.signature;
  std::optional<DesignSource> buggy;
  if (ctx.cfg.strategy == Strategy::kNlsc) {
    try {
      load_design(source);
    } catch (const Error& e) {
      throw Error(Errc::kInvalidArgument,
                  "source '" + source_id + "' does not elaborate: " + e.what());
    }
    buggy = source;
  }

  Simulator oracle(ctx.oracle, sig);
  CoverageData best(ctx.oracle);
  TestGenState st;
  st.source = source_id;
  st.coverage = make_coverage_report(ctx.oracle, best);

  const CallContext call{spec.id, source_id, "testgen",
                         spec.id + "/" + source_id + "/testgen"};
  const int cap = spec.sequential ? std::max(1, ctx.options.testgen_iters) : 1;
  for (int it = 1; it <= cap; ++it) {
    st.iterations = it;
    TestGenStep step;
    step.iteration = it;
    std::optional<TestGenFeedback> feedback;
    if (!st.accepted.empty()) feedback = TestGenFeedback{st.coverage, st.accepted.back()};
    bool full = false;
    try {
      step.prompt = build_testgen_prompt(ctx.templates, ctx.cfg, spec, buggy, feedback);
      ++st.provider_calls;
      step.response = ctx.provider.complete(step.prompt, ctx.cfg, call);
      UnitTest test =
          parse_unit_test(step.response, sig, lower(source_id) + "_t" + std::to_string(it));
      step.test = test;
      CoverageData trial = best;
      oracle.run(test, &trial);
      const CoverageReport report = make_coverage_report(ctx.oracle, trial);
      step.coverage = report;
      const double scalar = report.scalar();
      // One-shot generation keeps any valid test; the iterative loop keeps
      // only tests that raise coverage.
      if (!spec.sequential || scalar > st.bcov) {
        step.accepted = true;
        st.accepted.push_back(std::move(test));
        st.bcov = std::max(st.bcov, scalar);
        st.coverage = report;
        best = std::move(trial);
        full = scalar >= 1.0;
      } else {
        step.reason = "coverage " + fixed4(scalar) + " does not exceed best " + fixed4(st.bcov);
      }
    } catch (const Error& e) {
      if (e.code() == Errc::kOracleElaborationFailure) throw;
      step.reason = describe(e);
    } catch (const std::exception& e) {
      step.reason = std::string("internal: ") + e.what();
    }
    step.bcov = st.bcov;
    st.history.push_back(std::move(step));
    if (full) break;
  }
  return st;
}

// --- debugging ------------------------------------------------------------------

DebugState debug(const LoopContext& ctx, const DesignSource& buggy,
                 const std::string& target_id, const std::vector<UnitTest>& tests) {
  if (tests.empty()) throw Error(Errc::kEmptyList, "debugging needs at least one unit test");
  const ProblemSpec& spec = ctx.spec;
  const DesignSignature& sig = spec.signature;

  auto current = std::make_unique<ElaboratedDesign>();
  try {
    *current = load_design(buggy);
  } catch (const Error& e) {
    throw Error(Errc::kInvalidArgument,
                "design '" + target_id + "' does not elaborate: " + e.what());
  }

  Simulator oracle(ctx.oracle, sig);
  std::vector<Trace> expected;
  for (const UnitTest& t : tests) expected.push_back(oracle.run(t));

  struct Outcome {
    std::vector<Trace> traces;
    std::vector<Verdict> verdicts;
    PassFraction fraction;
  };
  auto run_all = [&](const ElaboratedDesign& d) {
    Outcome o;
    Simulator sim(d, sig);
    for (size_t i = 0; i < tests.size(); ++i) {
      o.traces.push_back(sim.run(tests[i]));
      o.verdicts.push_back(compare(o.traces.back(), expected[i], sig.outputs));
    }
    o.fraction = pass_fraction(o.verdicts);
    return o;
  };

  DebugState st;
  st.target = target_id;
  st.initial = buggy;
  st.current = buggy;
  Outcome now = run_all(*current);
  st.initial_pass = st.bpass = now.fraction;

  const CallContext call{spec.id, target_id, "debug", spec.id + "/" + target_id + "/debug"};
  for (int it = 1; it <= ctx.options.debug_iters && !st.bpass.complete(); ++it) {
    st.iterations = it;
    DebugStep step;
    step.iteration = it;
    size_t f = 0;
    while (now.verdicts[f].pass) ++f;
    step.failing_test = tests[f].id;
    try {
      const MismatchSummary summary = summarize(now.traces[f], expected[f], now.verdicts[f],
                                                sig.outputs, ctx.options.mismatch_k, tests[f].id);
      step.prompt = build_debug_prompt(ctx.templates, ctx.cfg, spec, st.current, tests[f], summary);
      ++st.provider_calls;
      step.response = ctx.provider.complete(step.prompt, ctx.cfg, call);
      DesignSource patch = parse_patch(step.response, sig, spec.overrides);
      auto design = std::make_unique<ElaboratedDesign>(load_design(patch));
      Outcome next;
      try {
        next = run_all(*design);
      } catch (const Error& e) {
        throw Error(Errc::kPatchRejected, "simulate: " + describe(e));
      }
      step.patch_pass = next.fraction;
      if (next.fraction.greater_than(st.bpass)) {
        step.accepted = true;
        st.current = std::move(patch);
        st.bpass = next.fraction;
        current = std::move(design);
        now = std::move(next);
      } else {
        step.reason = "pass fraction " + fraction_text(next.fraction) +
                      " does not exceed best " + fraction_text(st.bpass);
      }
    } catch (const Error& e) {
      step.reason = describe(e);
    } catch (const std::exception& e) {
      step.reason = std::string("internal: ") + e.what();
    }
    step.bpass = st.bpass;
    st.history.push_back(std::move(step));
  }
  return st;
}

// --- serialization --------------------------------------------------------------

namespace {

json coverage_json(const CoverageReport& c) {
  auto cat = [](const CoverageCategory& k) { return json::array({k.covered, k.total}); };
  return {{"line", cat(c.line)},     {"branch", cat(c.branch)},
          {"toggle", cat(c.toggle)}, {"fsm", cat(c.fsm)},
          {"scalar", c.scalar()},    {"uncovered", c.uncovered}};
}

CoverageReport coverage_from(const json& j) {
  auto cat = [](const json& a) { return CoverageCategory{a.at(0).get<int>(), a.at(1).get<int>()}; };
  CoverageReport c;
  c.line = cat(j.at("line"));
  c.branch = cat(j.at("branch"));
  c.toggle = cat(j.at("toggle"));
  c.fsm = cat(j.at("fsm"));
  c.uncovered = j.at("uncovered").get<std::vector<std::string>>();
  return c;
}

json test_json(const UnitTest& t) { return {{"id", t.id}, {"stimulus", format_stimulus(t)}}; }

UnitTest test_from(const json& j) {
  return parse_stimulus(j.at("stimulus").get<std::string>(), j.at("id").get<std::string>());
}

json fraction_json(const PassFraction& f) { return json::array({f.passed, f.total}); }

PassFraction fraction_from(const json& j) {
  return {j.at(0).get<size_t>(), j.at(1).get<size_t>()};
}

template <typename F>
auto parse_state(const std::string& text, F&& fn) {
  try {
    return fn(json::parse(text));
  } catch (const json::exception& e) {
    throw Error(Errc::kInvalidArgument, std::string("bad loop state: ") + e.what());
  }
}

}  // namespace

std::string testgen_to_json(const TestGenState& st) {
  json steps = json::array();
  for (const TestGenStep& s : st.history) {
    json j = {{"iteration", s.iteration},
              {"status", s.accepted ? "accepted" : "rejected"},
              {"reason", s.reason},
              {"bcov", s.bcov},
              {"prompt", s.prompt},
              {"response", s.response}};
    j["test"] = s.test ? test_json(*s.test) : json(nullptr);
    j["coverage"] = s.coverage ? coverage_json(*s.coverage) : json(nullptr);
    steps.push_back(std::move(j));
  }
  json accepted = json::array();
  for (const UnitTest& t : st.accepted) accepted.push_back(test_json(t));
  const json j = {{"role", "testgen"},
                  {"source", st.source},
                  {"iterations", st.iterations},
                  {"provider_calls", st.provider_calls},
                  {"bcov", st.bcov},
                  {"coverage", coverage_json(st.coverage)},
                  {"accepted", accepted},
                  {"steps", steps}};
  return j.dump(2) + "\n";
}

TestGenState testgen_from_json(const std::string& text) {
  return parse_state(text, [](const json& j) {
    TestGenState st;
    st.source = j.at("source").get<std::string>();
    st.iterations = j.at("iterations").get<int>();
    st.provider_calls = j.at("provider_calls").get<int>();
    st.bcov = j.at("bcov").get<double>();
    st.coverage = coverage_from(j.at("coverage"));
    for (const json& t : j.at("accepted")) st.accepted.push_back(test_from(t));
    for (const json& s : j.at("steps")) {
      TestGenStep step;
      step.iteration = s.at("iteration").get<int>();
      step.accepted = s.at("status").get<std::string>() == "accepted";
      step.reason = s.at("reason").get<std::string>();
      step.bcov = s.at("bcov").get<double>();
      step.prompt = s.at("prompt").get<std::string>();
      step.response = s.at("response").get<std::string>();
      if (!s.at("test").is_null()) step.test = test_from(s.at("test"));
      if (!s.at("coverage").is_null()) step.coverage = coverage_from(s.at("coverage"));
      st.history.push_back(std::move(step));
    }
    return st;
  });
}

std::string debug_to_json(const DebugState& st) {
  json steps = json::array();
  for (const DebugStep& s : st.history) {
    json j = {{"iteration", s.iteration},
              {"status", s.accepted ? "accepted" : "rejected"},
              {"reason", s.reason},
              {"failing_test", s.failing_test},
              {"bpass", fraction_json(s.bpass)},
              {"prompt", s.prompt},
              {"response", s.response}};
    j["patch_pass"] = s.patch_pass ? fraction_json(*s.patch_pass) : json(nullptr);
    steps.push_back(std::move(j));
  }
  const json j = {{"role", "debug"},
                  {"target", st.target},
                  {"iterations", st.iterations},
                  {"provider_calls", st.provider_calls},
                  {"initial_pass", fraction_json(st.initial_pass)},
                  {"bpass", fraction_json(st.bpass)},
                  {"success", st.bpass.value()},
                  {"initial_source", st.initial.text},
                  {"final_source", st.current.text},
                  {"final_origin", origin_name(st.current)},
                  {"steps", steps}};
  return j.dump(2) + "\n";
}

DebugState debug_from_json(const std::string& text) {
  return parse_state(text, [](const json& j) {
    DebugState st;
    st.target = j.at("target").get<std::string>();
    st.iterations = j.at("iterations").get<int>();
    st.provider_calls = j.at("provider_calls").get<int>();
    st.initial_pass = fraction_from(j.at("initial_pass"));
    st.bpass = fraction_from(j.at("bpass"));
    st.initial = DesignSource::mutant(j.at("initial_source").get<std::string>(), st.target);
    const std::string final_text = j.at("final_source").get<std::string>();
    st.current = j.at("final_origin").get<std::string>() == "patched"
                     ? DesignSource::patched(final_text)
                     : st.initial;
    for (const json& s : j.at("steps")) {
      DebugStep step;
      step.iteration = s.at("iteration").get<int>();
      step.accepted = s.at("status").get<std::string>() == "accepted";
      step.reason = s.at("reason").get<std::string>();
      step.failing_test = s.at("failing_test").get<std::string>();
      step.bpass = fraction_from(s.at("bpass"));
      step.prompt = s.at("prompt").get<std::string>();
      step.response = s.at("response").get<std::string>();
      if (!s.at("patch_pass").is_null()) step.patch_pass = fraction_from(s.at("patch_pass"));
      st.history.push_back(std::move(step));
    }
    return st;
  });
}

std::string RunConfig::to_json() const {
  json provider = {{"kind", binding.kind == ProviderKind::kMock ? "mock" : "live"},
                   {"timeout_ms", binding.timeout.count()},
                   {"retries", binding.retries}};
  if (binding.kind == ProviderKind::kMock) {
    provider["script"] = binding.script_dir.generic_string();
  } else {
    provider["endpoint"] = binding.endpoint;
    provider["model"] = binding.model;
  }
  const json j = {{"strategy", std::string(strategy_name(gen.strategy))},
                  {"shots", gen.shots},
                  {"label", gen.label()},
                  {"temperature", gen.temperature},
                  {"max_output_tokens", gen.max_output_tokens},
                  {"max_input_tokens", gen.max_input_tokens},
                  {"provider", provider},
                  {"seed", seed},
                  {"testgen_iters", loops.testgen_iters},
                  {"debug_iters", loops.debug_iters},
                  {"mismatch_k", loops.mismatch_k},
                  {"problems", problems}};
  return j.dump(2) + "\n";
}

RunConfig RunConfig::from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    RunConfig c;
    c.gen = GenConfig::make(parse_strategy(j.at("strategy").get<std::string>()),
                            j.at("shots").get<int>());
    c.gen.temperature = j.at("temperature").get<double>();
    c.gen.max_output_tokens = j.at("max_output_tokens").get<int>();
    c.gen.max_input_tokens = j.at("max_input_tokens").get<int>();
    const json& p = j.at("provider");
    c.binding.kind = p.at("kind").get<std::string>() == "mock" ? ProviderKind::kMock
                                                                : ProviderKind::kLive;
    c.binding.timeout = std::chrono::milliseconds(p.at("timeout_ms").get<long long>());
    c.binding.retries = p.at("retries").get<int>();
    if (c.binding.kind == ProviderKind::kMock) {
      c.binding.script_dir = p.at("script").get<std::string>();
    } else {
      c.binding.endpoint = p.value("endpoint", "");
      c.binding.model = p.value("model", "");
    }
    c.seed = j.at("seed").get<uint64_t>();
    c.loops.testgen_iters = j.at("testgen_iters").get<int>();
    c.loops.debug_iters = j.at("debug_iters").get<int>();
    c.loops.mismatch_k = j.at("mismatch_k").get<size_t>();
    c.problems = j.at("problems").get<std::vector<std::string>>();
    c.gen.validate();
    return c;
  } catch (const json::exception& e) {
    throw Error(Errc::kInvalidArgument, std::string("bad run config: ") + e.what());
  }
}

// --- evaluation matrix ------------------------------------------------------------

namespace {

struct ProblemWork {
  const Problem* problem = nullptr;
  EvalRun run;
  std::vector<std::unique_ptr<ElaboratedDesign>> targets;  // null when broken
  std::vector<std::string> target_errors;
  std::vector<std::string> gen_errors;
  fs::path dir;  // run directory of this problem, empty when not writing
};

json matrix_json(const EvalRun& run, const GenConfig& gen) {
  json outputs = json::array();
  for (const PortInfo& p : run.outputs) outputs.push_back({{"name", p.name}, {"width", p.width}});
  json cells = json::array();
  for (const MatrixCell& c : run.cells) {
    json j = {{"source", c.source}, {"target", c.target}};
    if (c.result) {
      j["status"] = "ok";
      j["ar"] = c.result->ar_i;
      j["dr"] = c.result->dr;
      j["da"] = c.result->da;
      j["divergent_cycles"] = c.result->divergent_cycles;
      j["total_cycles"] = c.result->total_cycles;
    } else {
      j["status"] = "skipped";
      j["reason"] = c.skipped;
    }
    cells.push_back(std::move(j));
  }
  json gens = json::array();
  for (const TestGenState& g : run.generations) {
    json tests = json::array();
    for (const UnitTest& t : g.accepted) tests.push_back(t.id);
    gens.push_back({{"source", g.source},
                    {"accepted", tests},
                    {"bcov", g.bcov},
                    {"iterations", g.iterations},
                    {"provider_calls", g.provider_calls}});
  }
  json debug = json::array();
  for (const DebugOutcome& d : run.debug) {
    json j = {{"target", d.target}};
    if (d.state) {
      j["status"] = "ok";
      j["success"] = d.success();
      j["initial_pass"] = fraction_json(d.state->initial_pass);
      j["final_pass"] = fraction_json(d.state->bpass);
      j["iterations"] = d.state->iterations;
      j["provider_calls"] = d.state->provider_calls;
    } else {
      j["status"] = "skipped";
      j["reason"] = d.skipped;
    }
    debug.push_back(std::move(j));
  }
  json j = {{"problem", run.problem},
            {"kind", std::string(kind_name(run.kind))},
            {"config", gen.label()},
            {"outputs", outputs},
            {"mutants", run.mutants},
            {"generation", gens},
            {"cells", cells},
            {"debug", debug}};
  if (!run.fatal.empty()) j["fatal"] = run.fatal;
  return j;
}

std::string matrix_csv(const EvalRun& run) {
  std::string out = "source,target,ar,dr,da,status\n";
  for (const MatrixCell& c : run.cells) {
    out += c.source + "," + c.target + ",";
    if (c.result) {
      out += std::to_string(c.result->ar_i) + "," + json(c.result->dr).dump() + "," +
             json(c.result->da).dump() + ",ok\n";
    } else {
      out += ",,,skipped\n";
    }
  }
  return out;
}

void write_loop_files(const fs::path& dir, const std::string& id, const std::string& role,
                      const std::vector<std::pair<std::string, std::string>>& exchanges) {
  for (size_t i = 0; i < exchanges.size(); ++i) {
    const std::string stem = lower(id) + "_" + role + "_" + std::to_string(i + 1) + ".txt";
    write_text(dir / "prompts" / stem, exchanges[i].first);
    write_text(dir / "responses" / stem, exchanges[i].second);
  }
}

void write_artifacts(const ProblemWork& w, const RunConfig& cfg) {
  const EvalRun& run = w.run;
  const fs::path& dir = w.dir;
  const Problem& p = *w.problem;
  const DesignSignature& sig = p.spec.signature;

  for (const TestGenState& g : run.generations) {
    std::vector<std::pair<std::string, std::string>> ex;
    for (const TestGenStep& s : g.history) ex.emplace_back(s.prompt, s.response);
    write_loop_files(dir, g.source, "testgen", ex);
    Simulator oracle(*p.oracle, sig);
    for (const UnitTest& t : g.accepted) {
      write_text(dir / "tests" / lower(g.source) / (t.id + ".stim"), format_stimulus(t));
      const fs::path traces = dir / "traces" / lower(g.source) / t.id;
      write_text(traces / "oracle.vcd", export_vcd(oracle.run(t), sig));
      for (size_t k = 0; k < w.targets.size(); ++k) {
        if (!w.targets[k]) continue;
        try {
          Simulator dut(*w.targets[k], sig);
          write_text(traces / (lower(run.mutants[k]) + ".vcd"), export_vcd(dut.run(t), sig));
        } catch (const Error&) {
          // The matching cell already records the failure.
        }
      }
    }
  }
  for (const DebugOutcome& d : run.debug) {
    if (!d.state) continue;
    std::vector<std::pair<std::string, std::string>> ex;
    for (const DebugStep& s : d.state->history) ex.emplace_back(s.prompt, s.response);
    write_loop_files(dir, d.target, "debug", ex);
    write_text(dir / "debug" / (lower(d.target) + "_final.sv"), d.state->current.text);
  }
  write_text(dir / "matrix.csv", matrix_csv(run));
  write_text(dir / "matrix.json", matrix_json(run, cfg.gen).dump(2) + "\n");
}

}  // namespace

std::vector<EvalRun> evaluate_matrix(const std::vector<Problem>& problems,
                                     const RunConfig& cfg, Provider& provider,
                                     const PromptTemplates& templates,
                                     const ProgressFn& progress) {
  std::mutex progress_mu;
  auto note = [&](const std::string& msg) {
    if (!progress) return;
    std::lock_guard lock(progress_mu);
    progress(msg);
  };
  const bool writing = !cfg.output_dir.empty();
  if (writing) {
    fs::create_directories(cfg.output_dir);
    const fs::path conf = cfg.output_dir / "config.json";
    const std::string text = cfg.to_json();
    if (fs::exists(conf) && read_text(conf) != text) {
      throw Error(Errc::kInvalidArgument,
                  cfg.output_dir.string() + " holds a run with a different configuration");
    }
    write_text(conf, text);
  }

  std::vector<ProblemWork> work(problems.size());
  struct Job {
    size_t problem;
    size_t mutant;
  };
  std::vector<Job> jobs;
  for (size_t pi = 0; pi < problems.size(); ++pi) {
    ProblemWork& w = work[pi];
    const Problem& p = problems[pi];
    w.problem = &p;
    w.run.problem = p.spec.id;
    w.run.kind = p.manifest.kind;
    w.run.outputs = p.spec.signature.outputs;
    if (writing) w.dir = cfg.output_dir / p.spec.id;
    const size_t n = p.mutants.size();
    w.targets.resize(n);
    w.target_errors.resize(n);
    w.gen_errors.resize(n);
    w.run.generations.resize(n);
    w.run.debug.resize(n);
    for (size_t k = 0; k < n; ++k) {
      w.run.mutants.push_back(p.mutants[k].bc);
      try {
        w.targets[k] = std::make_unique<ElaboratedDesign>(load_design(p.mutants[k].source));
      } catch (const Error& e) {
        w.target_errors[k] = "mutant does not elaborate: " + describe(e);
      }
      jobs.push_back({pi, k});
    }
    if (n == 0) w.run.fatal = "no mutants in corpus";
  }

  // Phase 1: one generation loop per source mutant.
  parallel_for(jobs.size(), cfg.jobs, [&](size_t j) {
    ProblemWork& w = work[jobs[j].problem];
    const Problem& p = *w.problem;
    const Mutant& m = p.mutants[jobs[j].mutant];
    const fs::path checkpoint = w.dir / "history" / ("testgen_" + lower(m.bc) + ".json");
    TestGenState& out = w.run.generations[jobs[j].mutant];
    if (writing && fs::exists(checkpoint)) {
      try {
        out = testgen_from_json(read_text(checkpoint));
        note(p.spec.id + " " + m.bc + ": generation restored");
        return;
      } catch (const Error&) {
        // Fall through and redo a damaged checkpoint.
      }
    }
    const LoopContext ctx{p.spec, *p.oracle, templates, cfg.gen, provider, cfg.loops};
    try {
      out = generate_tests(ctx, m.source, m.bc);
      if (writing) write_text(checkpoint, testgen_to_json(out));
      note(p.spec.id + " " + m.bc + ": " + std::to_string(out.accepted.size()) +
           " tests, coverage " + fixed4(out.bcov));
    } catch (const Error& e) {
      out = TestGenState{};
      out.source = m.bc;
      w.gen_errors[jobs[j].mutant] = "generation failed: " + describe(e);
    }
  });

  // Phase 2: every suite against one target, then debug that target with the
  // suite generated from it.
  parallel_for(jobs.size(), cfg.jobs, [&](size_t j) {
    ProblemWork& w = work[jobs[j].problem];
    const Problem& p = *w.problem;
    const size_t t = jobs[j].mutant;
    const Mutant& target = p.mutants[t];
    DebugOutcome& dbg = w.run.debug[t];
    dbg.target = target.bc;
    if (!w.targets[t]) {
      dbg.skipped = w.target_errors[t];
      return;
    }
    const std::vector<UnitTest>& suite = w.run.generations[t].accepted;
    if (!w.gen_errors[t].empty()) {
      dbg.skipped = w.gen_errors[t];
      return;
    }
    if (suite.empty()) {
      dbg.skipped = "no accepted tests from " + target.bc;
      return;
    }
    const fs::path checkpoint = w.dir / "history" / ("debug_" + lower(target.bc) + ".json");
    if (writing && fs::exists(checkpoint)) {
      try {
        dbg.state = debug_from_json(read_text(checkpoint));
        return;
      } catch (const Error&) {
      }
    }
    const LoopContext ctx{p.spec, *p.oracle, templates, cfg.gen, provider, cfg.loops};
    try {
      dbg.state = debug(ctx, target.source, target.bc, suite);
      if (writing) write_text(checkpoint, debug_to_json(*dbg.state));
      note(p.spec.id + " " + target.bc + ": debug " + fraction_text(dbg.state->initial_pass) +
           " -> " + fraction_text(dbg.state->bpass));
    } catch (const Error& e) {
      dbg.skipped = "debug failed: " + describe(e);
    }
  });

  // Cells are pure simulation, so they are recomputed rather than restored.
  std::vector<std::vector<MatrixCell>> cells(jobs.size());
  parallel_for(jobs.size(), cfg.jobs, [&](size_t j) {
    ProblemWork& w = work[jobs[j].problem];
    const Problem& p = *w.problem;
    const size_t s = jobs[j].mutant;
    const TestGenState& gen = w.run.generations[s];
    for (size_t t = 0; t < p.mutants.size(); ++t) {
      MatrixCell c;
      c.source = p.mutants[s].bc;
      c.target = p.mutants[t].bc;
      if (!w.gen_errors[s].empty()) {
        c.skipped = w.gen_errors[s];
      } else if (gen.accepted.empty()) {
        c.skipped = "no accepted tests from " + c.source;
      } else if (!w.targets[t]) {
        c.skipped = w.target_errors[t];
      } else {
        try {
          c.result = pair_result(c.source, c.target,
                                 evaluate_suite(*p.oracle, *w.targets[t], p.spec.signature,
                                                gen.accepted));
        } catch (const Error& e) {
          c.skipped = "evaluation failed: " + describe(e);
        }
      }
      cells[j].push_back(std::move(c));
    }
  });
  for (size_t j = 0; j < jobs.size(); ++j) {
    auto& dst = work[jobs[j].problem].run.cells;
    dst.insert(dst.end(), cells[j].begin(), cells[j].end());
  }

  std::vector<EvalRun> runs;
  for (ProblemWork& w : work) {
    if (writing) write_artifacts(w, cfg);
    runs.push_back(std::move(w.run));
  }
  return runs;
}

std::vector<EvalRun> evaluate_dirs(const std::vector<fs::path>& dirs, const RunConfig& cfg,
                                   Provider& provider, const PromptTemplates& templates,
                                   const ProgressFn& progress) {
  std::vector<Problem> loaded;
  std::vector<std::optional<EvalRun>> fatal(dirs.size());
  for (size_t i = 0; i < dirs.size(); ++i) {
    try {
      loaded.push_back(load_problem(dirs[i], true));
    } catch (const Error& e) {
      EvalRun r;
      r.problem = dirs[i].filename().string();
      r.fatal = describe(e);
      if (progress) progress(r.problem + ": " + r.fatal);
      fatal[i] = std::move(r);
    }
  }
  std::vector<EvalRun> done = evaluate_matrix(loaded, cfg, provider, templates, progress);
  std::vector<EvalRun> runs;
  size_t next = 0;
  for (size_t i = 0; i < dirs.size(); ++i) {
    if (fatal[i]) {
      if (!cfg.output_dir.empty()) {
        write_text(cfg.output_dir / fatal[i]->problem / "matrix.json",
                   matrix_json(*fatal[i], cfg.gen).dump(2) + "\n");
      }
      runs.push_back(std::move(*fatal[i]));
    } else {
      runs.push_back(std::move(done[next++]));
    }
  }
  return runs;
}

}  // namespace hwut
