#include "hwut/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <vector>

#include <json.hpp>

#include "hwut/error.hpp"
#include "hwut/manifest.hpp"
#include "hwut/metrics.hpp"

namespace hwut {

namespace fs = std::filesystem;
using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json dist_json(const std::vector<double>& values) {
  if (values.empty()) return nullptr;
  const BinnedDistribution d = bin(values);
  ordered_json j;
  j["n"] = d.size();
  j["counts"] = d.counts;
  j["median"] = d.median;
  j["median_bin"] = d.median_bin;
  return j;
}

std::string median_text(const std::vector<double>& values) {
  if (values.empty()) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", bin(values).median);
  return buf;
}

std::string pad(std::string s, size_t n) {
  if (s.size() < n) s.append(n - s.size(), ' ');
  return s;
}

json read_json_file(const fs::path& file) {
  try {
    return json::parse(read_text(file));
  } catch (const json::exception& e) {
    throw Error(Errc::kIoError, file.string() + ": " + e.what());
  }
}

}  // namespace

RunReport build_report(const fs::path& run_dir) {
  const fs::path config_file = run_dir / "config.json";
  if (!fs::is_directory(run_dir) || !fs::exists(config_file)) {
    throw Error(Errc::kIoError, run_dir.string() + " is not an evaluated run (no config.json)");
  }
  const json config = read_json_file(config_file);

  std::vector<fs::path> matrices;
  for (const auto& entry : fs::directory_iterator(run_dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "matrix.json")) {
      matrices.push_back(entry.path() / "matrix.json");
    }
  }
  if (matrices.empty()) {
    throw Error(Errc::kIoError, run_dir.string() + " holds no problem matrices");
  }
  std::sort(matrices.begin(), matrices.end());

  const char* kMetrics[] = {"ar", "dr", "da"};
  // metric -> source -> target -> values across problems
  std::map<std::string, std::map<std::string, std::map<std::string, std::vector<double>>>> cells;
  std::map<std::string, std::map<std::string, std::vector<double>>> targets;
  std::map<std::string, std::vector<double>> overall;
  std::map<std::string, ordered_json> debug_values;
  std::map<std::string, std::vector<double>> debug_success;
  debug_values["combinational"] = ordered_json::array();
  debug_values["sequential"] = ordered_json::array();

  ordered_json problems = ordered_json::array();
  std::string board_rows;
  for (const fs::path& file : matrices) {
    const json m = read_json_file(file);
    ordered_json p;
    p["id"] = m.at("problem");
    p["kind"] = m.at("kind");
    if (m.contains("fatal")) {
      p["status"] = "fatal";
      p["reason"] = m.at("fatal");
      problems.push_back(p);
      board_rows += pad(m.at("problem").get<std::string>(), 14) + pad(m.at("kind"), 15) +
                    "FATAL " + m.at("fatal").get<std::string>() + "\n";
      continue;
    }
    std::map<std::string, std::vector<double>> local;
    size_t ok = 0, skipped = 0;
    for (const json& c : m.at("cells")) {
      if (c.at("status") != "ok") {
        ++skipped;
        continue;
      }
      ++ok;
      const std::string src = c.at("source"), tgt = c.at("target");
      for (const char* k : kMetrics) {
        const double v = c.at(k).get<double>();
        cells[k][src][tgt].push_back(v);
        targets[k][tgt].push_back(v);
        overall[k].push_back(v);
        local[k].push_back(v);
      }
    }
    const std::string kind = m.at("kind");
    size_t debug_ok = 0, debug_skipped = 0;
    std::vector<double> local_debug;
    for (const json& d : m.at("debug")) {
      if (d.at("status") != "ok") {
        ++debug_skipped;
        continue;
      }
      ++debug_ok;
      const double s = d.at("success").get<double>();
      ordered_json v;
      v["problem"] = m.at("problem");
      v["target"] = d.at("target");
      v["success"] = s;
      debug_values[kind].push_back(v);
      debug_success[kind].push_back(s);
      local_debug.push_back(s);
    }
    p["status"] = "ok";
    p["cells"] = ok;
    p["cells_skipped"] = skipped;
    p["debug"] = debug_ok;
    p["debug_skipped"] = debug_skipped;
    problems.push_back(p);
    board_rows += pad(m.at("problem").get<std::string>(), 14) + pad(kind, 15) +
                  pad(std::to_string(ok) + "/" + std::to_string(ok + skipped), 9) +
                  pad(median_text(local["ar"]), 9) + pad(median_text(local["dr"]), 9) +
                  pad(median_text(local["da"]), 9) + median_text(local_debug) + "\n";
  }

  ordered_json cell_json, target_json;
  for (const char* k : kMetrics) {
    ordered_json by_source = ordered_json::object();
    for (const auto& [src, row] : cells[k]) {
      ordered_json r = ordered_json::object();
      for (const auto& [tgt, values] : row) r[tgt] = dist_json(values);
      by_source[src] = r;
    }
    cell_json[k] = by_source;
    ordered_json by_target = ordered_json::object();
    for (const auto& [tgt, values] : targets[k]) by_target[tgt] = dist_json(values);
    target_json[k] = by_target;
  }
  ordered_json debug;
  for (const char* kind : {"combinational", "sequential"}) {
    ordered_json d;
    d["values"] = debug_values[kind];
    d["distribution"] = dist_json(debug_success[kind]);
    debug[kind] = d;
  }

  ordered_json report;
  report["tool"] = "hwut";
  report["version"] = HWUT_VERSION;
  report["label"] = config.value("label", "");
  report["config"] = ordered_json::parse(config.dump());
  report["problems"] = problems;
  report["overall"] = {{"ar", dist_json(overall["ar"])},
                       {"dr", dist_json(overall["dr"])},
                       {"da", dist_json(overall["da"])}};
  report["targets"] = target_json;
  report["cells"] = cell_json;
  report["debug"] = debug;

  RunReport out;
  out.json = report.dump(2) + "\n";
  const json& provider = config.at("provider");
  out.scoreboard = "hwut " + std::string(HWUT_VERSION) + "  " + config.value("label", "") +
                   "  provider " + provider.value("kind", "") + "  seed " +
                   std::to_string(config.value("seed", 0ull)) + "\n\n";
  out.scoreboard += pad("problem", 14) + pad("kind", 15) + pad("cells", 9) + pad("AR med", 9) +
                    pad("DR med", 9) + pad("DA med", 9) + "debug med\n";
  out.scoreboard += board_rows;
  std::vector<double> all_debug = debug_success["combinational"];
  all_debug.insert(all_debug.end(), debug_success["sequential"].begin(),
                   debug_success["sequential"].end());
  out.scoreboard += pad("all", 29) + pad(std::to_string(overall["ar"].size()), 9) +
                    pad(median_text(overall["ar"]), 9) + pad(median_text(overall["dr"]), 9) +
                    pad(median_text(overall["da"]), 9) + median_text(all_debug) + "\n";
  out.scoreboard += "\ndebug success median: combinational " +
                    median_text(debug_success["combinational"]) + ", sequential " +
                    median_text(debug_success["sequential"]) + "\n";
  return out;
}

RunReport write_report(const fs::path& run_dir) {
  RunReport r = build_report(run_dir);
  write_text(run_dir / "report.json", r.json);
  write_text(run_dir / "scoreboard.txt", r.scoreboard);
  return r;
}

}  // namespace hwut
