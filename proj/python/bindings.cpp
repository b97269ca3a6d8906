#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "hwut/elaborate.hpp"
#include "hwut/error.hpp"
#include "hwut/manifest.hpp"
#include "hwut/metrics.hpp"
#include "hwut/mutator.hpp"
#include "hwut/orchestrator.hpp"
#include "hwut/report.hpp"
#include "hwut/response.hpp"
#include "hwut/simulator.hpp"
#include "hwut/stimulus.hpp"
#include "hwut/vcd.hpp"

namespace py = pybind11;
using namespace hwut;

namespace {

py::dict port_list(const std::vector<PortInfo>& ports) {
  py::dict d;
  for (const PortInfo& p : ports) d[py::str(p.name)] = p.width;
  return d;
}

py::dict signature_dict(const DesignSignature& s) {
  py::dict d;
  d["module"] = s.module;
  d["inputs"] = port_list(s.inputs);
  d["outputs"] = port_list(s.outputs);
  d["clock"] = s.clock ? py::object(py::str(*s.clock)) : py::none();
  if (s.reset) {
    py::dict r;
    r["name"] = s.reset->name;
    r["active_high"] = s.reset->active_high;
    r["asynchronous"] = s.reset->asynchronous;
    d["reset"] = r;
  } else {
    d["reset"] = py::none();
  }
  return d;
}

py::dict trace_dict(const Trace& t) {
  py::dict d;
  for (const TraceSignal& s : t.signals) d[py::str(s.name)] = s.values;
  return d;
}

py::dict coverage_dict(const CoverageReport& c) {
  auto cat = [](const CoverageCategory& k) { return py::make_tuple(k.covered, k.total); };
  py::dict d;
  d["line"] = cat(c.line);
  d["branch"] = cat(c.branch);
  d["toggle"] = cat(c.toggle);
  d["fsm"] = cat(c.fsm);
  d["scalar"] = c.scalar();
  d["uncovered"] = c.uncovered;
  return d;
}

// A design held by Python: elaboration result plus its signature.
struct PyDesign {
  std::shared_ptr<const ElaboratedDesign> design;
  DesignSignature signature;

  static PyDesign load(const std::string& text) {
    PyDesign d;
    d.design = std::make_shared<const ElaboratedDesign>(load_design(DesignSource::reference(text)));
    d.signature = extract_signature(*d.design);
    return d;
  }
};

std::vector<UnitTest> parse_tests(const std::vector<std::string>& texts) {
  std::vector<UnitTest> out;
  for (size_t i = 0; i < texts.size(); ++i) {
    out.push_back(parse_stimulus(texts[i], "t" + std::to_string(i + 1)));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_hwut, m) {
  m.doc() = "Bindings for the hwut RTL unit-test generation and debugging toolkit";
  m.attr("__version__") = HWUT_VERSION;

  static py::exception<Error> exc(m, "HwutError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const std::string msg = std::string(errc_name(e.code())) + ": " + e.what();
      PyErr_SetString(exc.ptr(), msg.c_str());
    }
  });

  py::class_<PyDesign>(m, "Design")
      .def_static("from_text", &PyDesign::load, py::arg("text"),
                  "Parse and elaborate HDL text")
      .def_property_readonly("signature",
                             [](const PyDesign& d) { return signature_dict(d.signature); })
      .def_property_readonly("signature_text",
                             [](const PyDesign& d) { return d.signature.to_text(); })
      .def_property_readonly("sequential",
                             [](const PyDesign& d) { return d.design->is_sequential(); })
      .def(
          "simulate",
          [](const PyDesign& d, const std::string& stimulus) {
            Simulator sim(*d.design, d.signature);
            return trace_dict(sim.run(parse_stimulus(stimulus)));
          },
          py::arg("stimulus"), "Per-cycle sampled values of every traced signal")
      .def(
          "vcd",
          [](const PyDesign& d, const std::string& stimulus) {
            Simulator sim(*d.design, d.signature);
            return export_vcd(sim.run(parse_stimulus(stimulus)), d.signature);
          },
          py::arg("stimulus"))
      .def(
          "coverage",
          [](const PyDesign& d, const std::vector<std::string>& tests) {
            return coverage_dict(collect_coverage(*d.design, d.signature, parse_tests(tests)));
          },
          py::arg("tests"))
      .def(
          "exhaustive_test",
          [](const PyDesign& d) { return format_stimulus(exhaustive_test(d.signature)); })
      .def(
          "mutants",
          [](const PyDesign& d, uint64_t seed) {
            const Corpus c = make_corpus(*d.design, seed);
            py::list out;
            for (const MutantRecord& r : c.mutants) {
              py::dict j;
              j["bc"] = r.bc;
              j["operator"] = r.kind;
              j["source"] = r.source.text;
              j["line"] = r.site.line;
              j["before"] = r.site.before;
              j["after"] = r.site.after;
              j["witness"] = format_stimulus(r.witness);
              out.append(j);
            }
            return out;
          },
          py::arg("seed") = 1, "One mutant per applicable BC operator")
      .def(
          "verdicts",
          [](const PyDesign& oracle, const PyDesign& dut, const std::vector<std::string>& tests) {
            std::vector<bool> out;
            for (const Verdict& v :
                 evaluate_suite(*oracle.design, *dut.design, oracle.signature, parse_tests(tests))) {
              out.push_back(v.pass);
            }
            return out;
          },
          py::arg("design"), py::arg("tests"),
          "Pass/fail of each test on `design` with this design as oracle")
      .def(
          "parse_unit_test",
          [](const PyDesign& d, const std::string& response) {
            return format_stimulus(parse_unit_test(response, d.signature));
          },
          py::arg("response"))
      .def(
          "parse_patch",
          [](const PyDesign& d, const std::string& response) {
            return parse_patch(response, d.signature).text;
          },
          py::arg("response"));

  m.def("attack_rate", py::overload_cast<const std::vector<bool>&>(&attack_rate),
        py::arg("attacked"));
  m.def("divergent_attack", &divergent_attack, py::arg("ar_i"), py::arg("dr"));
  m.def("bin_index", &bin_index, py::arg("value"));
  m.def(
      "bin",
      [](const std::vector<double>& values) {
        const BinnedDistribution b = bin(values);
        py::dict d;
        d["counts"] = std::vector<size_t>(b.counts.begin(), b.counts.end());
        d["median"] = b.median;
        d["median_bin"] = b.median_bin;
        return d;
      },
      py::arg("values"));

  m.def(
      "evaluate",
      [](const std::vector<std::filesystem::path>& problems, const std::filesystem::path& out,
         const std::filesystem::path& script, const std::filesystem::path& templates,
         const std::string& strategy, int shots, uint64_t seed, int jobs) {
        RunConfig cfg;
        cfg.gen = GenConfig::make(parse_strategy(strategy), shots);
        cfg.binding.kind = ProviderKind::kMock;
        cfg.binding.script_dir = script;
        cfg.seed = seed;
        cfg.jobs = jobs;
        cfg.output_dir = out;
        for (const auto& p : problems) cfg.problems.push_back(p.filename().string());
        auto provider = make_provider(cfg.binding);
        const PromptTemplates t = PromptTemplates::load(templates);
        const auto runs = [&] {
          py::gil_scoped_release release;
          return evaluate_dirs(problems, cfg, *provider, t);
        }();
        py::list fatal;
        for (const EvalRun& r : runs) {
          if (!r.fatal.empty()) fatal.append(py::make_tuple(r.problem, r.fatal));
        }
        write_report(out);
        return fatal;
      },
      py::arg("problems"), py::arg("out"), py::arg("script"), py::arg("templates"),
      py::arg("strategy") = "nlsc", py::arg("shots") = 0, py::arg("seed") = 1,
      py::arg("jobs") = 1,
      "Evaluate problems with the scripted mock provider; returns fatal problems");
  m.def(
      "report", [](const std::filesystem::path& run) { return write_report(run).json; },
      py::arg("run_dir"), "Write report.json and scoreboard.txt, return the JSON text");
  m.def("data_dir", [] { return std::string(HWUT_DATA_DIR); });
}
