#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hwut/ast.hpp"

namespace hwut {

inline uint64_t width_mask(int width) {
  return width >= 64 ? ~uint64_t{0} : ((uint64_t{1} << width) - 1);
}

struct Signal {
  enum class Kind { kInput, kOutput, kWire, kReg };

  std::string name;
  int width = 1;
  int lsb = 0;  // declared [msb:lsb]; bit i of the value is index lsb + i
  Kind kind = Kind::kWire;
  bool procedural = false;  // declared reg/logic, may be assigned in always
  bool continuous = false;  // wire/logic/implicit, may be assigned by assign
  SourceLoc loc;

  bool is_port() const { return kind == Kind::kInput || kind == Kind::kOutput; }
  uint64_t mask() const { return width_mask(width); }
};

struct ParamValue {
  std::string name;
  uint64_t value = 0;
  int width = 32;
};

// Compiled expression node. Children are indices into ElaboratedDesign::nodes,
// variadic children (concatenation) live in ElaboratedDesign::args.
struct Node {
  enum class Op : uint8_t {
    kConst,
    kSignal,
    kIndexConst,
    kIndexDyn,
    kSlice,
    kUnary,
    kBinary,
    kTernary,
    kConcat,
    kReplicate,
  };

  Op op = Op::kConst;
  UnaryOp unary_op = UnaryOp::kLogicNot;
  BinaryOp binary_op = BinaryOp::kAdd;
  int width = 1;   // self-determined width
  int signal = -1;
  int param = -1;  // parameter reference when op == kConst
  uint64_t value = 0;  // constant, or replication count
  int lo = 0;      // slice/const-index low bit; dyn-index declared lsb
  int a = -1, b = -1, c = -1;
  int first_arg = 0, num_args = 0;
};

struct LValuePart {
  int signal = -1;
  int lo = 0;
  int width = 1;
};

// Parts are ordered most-significant first, as written in a concatenation.
struct LValue {
  std::vector<LValuePart> parts;
  int width = 0;
};

struct CaseArm {
  std::vector<int> labels;  // nodes; empty for default
  int body = -1;
  int line = 0;
};

struct CStmt {
  enum class Kind { kBlock, kIf, kCase, kBlocking, kNonBlocking, kNull };

  Kind kind = Kind::kNull;
  int line = 0;
  int statement_id = -1;  // assignments only
  std::vector<int> children;  // block members, or if then/else (-1 = none)
  int cond = -1;              // if condition or case subject
  int case_width = 0;
  std::vector<CaseArm> arms;
  bool implicit_default = false;  // case with an uncovered no-match path
  int branch_base = -1;           // first arm id of an if/case
  int lvalue = -1;
  int rhs = -1;
};

struct Process {
  enum class Kind { kContinuous, kCombinational, kClocked };

  Kind kind = Kind::kContinuous;
  int item_index = -1;  // position in DesignAst::items
  SourceLoc loc;
  // kContinuous
  int lvalue = -1;
  int rhs = -1;
  int statement_id = -1;
  // kCombinational / kClocked
  int body = -1;
  // kClocked
  int clock = -1;
  Edge clock_edge = Edge::kPos;
  std::vector<std::pair<int, Edge>> async_resets;
};

// A register whose assignments draw from a closed set of parameter constants.
struct StateRegister {
  int signal = -1;
  std::vector<uint64_t> values;       // sorted, distinct
  std::vector<std::string> constants;  // parameter names, sorted by value
};

struct BranchInfo {
  int line = 0;
  std::string label;  // "if true", "if false", "case arm 2", ...
};

struct ElaboratedDesign {
  DesignSource source;
  DesignAst ast;

  std::vector<Signal> signals;  // ports first in source order, then internals
  std::vector<ParamValue> params;
  std::vector<Node> nodes;
  std::vector<int> args;
  std::vector<LValue> lvalues;
  std::vector<CStmt> stmts;
  std::vector<Process> processes;
  std::vector<int> comb_order;  // topological order over comb/continuous
  std::vector<StateRegister> state_registers;

  std::vector<int> statement_lines;  // by statement id
  std::vector<BranchInfo> branches;  // by arm id

  int find_signal(std::string_view name) const;
  const ParamValue* find_param(std::string_view name) const;

  int num_continuous() const;
  int num_combinational_blocks() const;
  int num_clocked() const;
  bool is_sequential() const { return num_clocked() > 0; }
};

// Throws Error: kUndeclaredIdentifier, kDuplicateDeclaration, kWidthMismatch,
// kMultipleDrivers, kIllegalAssignment, kCombinationalLoop, kClockEdge,
// kUnsupportedConstruct.
ElaboratedDesign elaborate(const DesignAst& ast, DesignSource source = {});

// parse + elaborate.
ElaboratedDesign load_design(const DesignSource& source);

struct PortInfo {
  std::string name;
  int width = 1;

  bool operator==(const PortInfo&) const = default;
};

struct ResetInfo {
  std::string name;
  bool active_high = true;
  bool asynchronous = true;

  bool operator==(const ResetInfo&) const = default;
};

struct DesignSignature {
  std::string module;
  std::vector<PortInfo> inputs;   // source order, clock included
  std::vector<PortInfo> outputs;  // source order
  std::optional<std::string> clock;
  std::optional<ResetInfo> reset;

  // Inputs a unit test drives: every input except the clock.
  std::vector<PortInfo> stimulus_inputs() const;
  // Human/LLM readable rendering used in prompts and reports.
  std::string to_text() const;

  bool operator==(const DesignSignature&) const = default;
};

struct SignatureOverrides {
  std::optional<std::string> clock;
  std::optional<ResetInfo> reset;
};

// Throws Error kAmbiguousClock when clocked processes use different clocks.
DesignSignature extract_signature(const ElaboratedDesign& design,
                                  const SignatureOverrides& overrides = {});

}  // namespace hwut
