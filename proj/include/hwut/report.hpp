#pragma once

#include <filesystem>
#include <string>

namespace hwut {

struct RunReport {
  std::string json;        // report.json
  std::string scoreboard;  // scoreboard.txt
};

// Aggregates config.json and every <problem>/matrix.json of a run directory:
// binned AR/DR/DA per matrix cell and per target across problems, and debug
// success distributions split by problem kind. Throws kIoError when the
// directory holds no evaluated run.
RunReport build_report(const std::filesystem::path& run_dir);

// build_report plus writing report.json and scoreboard.txt into run_dir.
RunReport write_report(const std::filesystem::path& run_dir);

}  // namespace hwut
