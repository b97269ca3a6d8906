#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "hwut/elaborate.hpp"
#include "hwut/stimulus.hpp"

namespace hwut {

struct TraceSignal {
  std::string name;
  int width = 1;
  std::vector<uint64_t> values;  // one per cycle

  bool operator==(const TraceSignal&) const = default;
};

// Values sampled once per cycle, after the rising clock edge has been
// committed and combinational logic has settled.
struct Trace {
  static constexpr const char* kDiscipline = "post-edge";

  std::vector<TraceSignal> signals;
  size_t cycles = 0;
  std::string discipline = kDiscipline;

  const TraceSignal* find(std::string_view name) const;
  bool operator==(const Trace&) const = default;
};

// Raw hit data, mergeable across tests.
struct CoverageData {
  std::vector<bool> statements;        // by statement id
  std::vector<bool> arms;              // by branch arm id
  std::vector<uint64_t> seen_zero;     // by signal, bit mask
  std::vector<uint64_t> seen_one;
  std::vector<std::set<uint64_t>> states;  // by state register

  explicit CoverageData(const ElaboratedDesign& design);
  void merge(const CoverageData& other);
};

struct CoverageCategory {
  int covered = 0;
  int total = 0;

  bool defined() const { return total > 0; }
  double ratio() const { return total > 0 ? static_cast<double>(covered) / total : 0.0; }
  bool operator==(const CoverageCategory&) const = default;
};

// The scalar is the plain mean of the defined categories; it stands in for a
// commercial simulator's weighted coverage score.
struct CoverageReport {
  CoverageCategory line;
  CoverageCategory branch;
  CoverageCategory toggle;
  CoverageCategory fsm;
  std::vector<std::string> uncovered;  // human-readable, stable order

  double scalar() const;
  bool operator==(const CoverageReport&) const = default;
};

CoverageReport make_coverage_report(const ElaboratedDesign& design,
                                    const CoverageData& data);

struct SimOptions {
  int settle_cap = 1000;
};

// One simulation instance per thread; the design is only read.
class Simulator {
 public:
  Simulator(const ElaboratedDesign& design, DesignSignature signature,
            SimOptions options = {});

  // Throws kStimulusMismatch, kSettleDivergence.
  Trace run(const UnitTest& test, CoverageData* coverage = nullptr);

  const DesignSignature& signature() const { return signature_; }

 private:
  struct Pending {
    int lvalue;
    uint64_t value;
  };

  void settle(CoverageData* cov);
  void exec(int stmt, CoverageData* cov, std::vector<Pending>& nba);
  void assign(int lvalue, uint64_t value);
  void commit(std::vector<Pending>& nba);
  void fire_edges(const std::vector<uint64_t>& before, CoverageData* cov);
  void sample(Trace& trace, size_t cycle, CoverageData* cov) const;

  const ElaboratedDesign& d_;
  DesignSignature signature_;
  SimOptions options_;
  int clock_ = -1;
  std::vector<int> columns_;  // stimulus column -> signal
  std::vector<int> traced_;   // signals recorded in traces
  std::vector<uint64_t> values_;
};

// Convenience wrappers that derive the signature from the design.
Trace run(const ElaboratedDesign& design, const UnitTest& test);
CoverageReport collect_coverage(const ElaboratedDesign& design,
                                const std::vector<UnitTest>& tests);
CoverageReport collect_coverage(const ElaboratedDesign& design,
                                const DesignSignature& signature,
                                const std::vector<UnitTest>& tests);

}  // namespace hwut
