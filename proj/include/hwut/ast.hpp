#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace hwut {

enum class Origin { kReference, kMutant, kPatched };

// HDL text plus where it came from. `label` is the BC id for mutants.
struct DesignSource {
  std::string text;
  Origin origin = Origin::kReference;
  std::string label;

  static DesignSource reference(std::string text);
  static DesignSource mutant(std::string text, std::string bc_id);
  static DesignSource patched(std::string text);
};

std::string origin_name(const DesignSource& source);

// begin/end are byte offsets into the source text; end is one past the last
// character of the construct.
struct SourceLoc {
  int line = 0;
  int column = 0;
  int begin = 0;
  int end = 0;
};

enum class UnaryOp {
  kLogicNot,
  kBitNot,
  kNegate,
  kPlus,
  kReduceAnd,
  kReduceOr,
  kReduceXor,
  kReduceNand,
  kReduceNor,
  kReduceXnor,
};

enum class BinaryOp {
  kAdd,
  kSub,
  kShl,
  kShr,
  kLt,
  kLe,
  kGt,
  kGe,
  kEq,
  kNe,
  kBitAnd,
  kBitXor,
  kBitXnor,
  kBitOr,
  kLogicAnd,
  kLogicOr,
};

const char* op_text(UnaryOp op);
const char* op_text(BinaryOp op);

// Expression node. One struct for all kinds keeps the tree copyable by value,
// which the mutator relies on to edit clones.
struct Expr {
  enum class Kind {
    kNumber,
    kIdent,
    kUnary,
    kBinary,
    kTernary,
    kConcat,
    kReplicate,  // operands[0] = count, operands[1..] = body
    kIndex,      // name[operands[0]]
    kSlice,      // name[operands[0]:operands[1]]
  };

  Kind kind = Kind::kNumber;
  SourceLoc loc;

  // kNumber. width == 0 means an unsized literal. base is one of b, d, h, or
  // '\0' for a plain decimal.
  uint64_t value = 0;
  int width = 0;
  char base = '\0';

  // kIdent, kIndex, kSlice
  std::string name;

  UnaryOp unary_op = UnaryOp::kLogicNot;
  BinaryOp binary_op = BinaryOp::kAdd;
  std::vector<Expr> operands;

  static Expr number(uint64_t value, int width, char base);
  static Expr ident(std::string name);
  static Expr unary(UnaryOp op, Expr operand);
  static Expr binary(BinaryOp op, Expr lhs, Expr rhs);
  static Expr ternary(Expr cond, Expr then_value, Expr else_value);
};

// Structural equality: source locations are ignored.
bool operator==(const Expr& a, const Expr& b);

struct CaseItem;

struct Stmt {
  enum class Kind { kBlock, kIf, kCase, kBlocking, kNonBlocking, kNull };

  Kind kind = Kind::kNull;
  SourceLoc loc;

  // kBlock: body. kIf: body[0] is the then-branch, body[1] the optional else.
  std::vector<Stmt> body;
  std::string label;

  // kIf condition, kCase subject, or assignment left-hand side.
  Expr cond;
  Expr rhs;
  std::vector<CaseItem> items;

  bool has_else() const { return kind == Kind::kIf && body.size() > 1; }
  bool is_assignment() const {
    return kind == Kind::kBlocking || kind == Kind::kNonBlocking;
  }
  const Expr& lhs() const { return cond; }
  Expr& lhs() { return cond; }
};

struct CaseItem {
  std::vector<Expr> labels;  // empty for `default`
  Stmt body;
  SourceLoc loc;

  bool is_default() const { return labels.empty(); }
};

bool operator==(const Stmt& a, const Stmt& b);
bool operator==(const CaseItem& a, const CaseItem& b);

enum class Direction { kInput, kOutput };
enum class NetKind { kImplicit, kWire, kReg, kLogic };

struct Range {
  Expr msb;
  Expr lsb;
};

bool operator==(const Range& a, const Range& b);

struct PortDecl {
  std::string name;
  Direction direction = Direction::kInput;
  NetKind net = NetKind::kImplicit;
  std::optional<Range> range;
  SourceLoc loc;
};

bool operator==(const PortDecl& a, const PortDecl& b);

struct ParamDecl {
  std::string name;
  bool local = false;
  bool in_header = false;
  std::optional<Range> range;
  Expr value;
  SourceLoc loc;
};

struct NetDecl {
  std::string name;
  NetKind net = NetKind::kWire;
  std::optional<Range> range;
  std::optional<Expr> init;  // `wire x = expr;`
  SourceLoc loc;
};

struct ContAssign {
  Expr lhs;
  Expr rhs;
  SourceLoc loc;
};

enum class Edge { kPos, kNeg };

struct EdgeEvent {
  Edge edge = Edge::kPos;
  std::string signal;
  SourceLoc loc;
};

struct AlwaysBlock {
  enum class Style { kAlways, kAlwaysComb, kAlwaysFf };
  Style style = Style::kAlways;
  std::vector<EdgeEvent> events;  // empty: combinational
  Stmt body;
  SourceLoc loc;

  bool is_clocked() const { return !events.empty(); }
};

bool operator==(const ParamDecl& a, const ParamDecl& b);
bool operator==(const NetDecl& a, const NetDecl& b);
bool operator==(const ContAssign& a, const ContAssign& b);
bool operator==(const EdgeEvent& a, const EdgeEvent& b);
bool operator==(const AlwaysBlock& a, const AlwaysBlock& b);

using ModuleItem = std::variant<ParamDecl, NetDecl, ContAssign, AlwaysBlock>;

struct DesignAst {
  std::string name;
  std::vector<PortDecl> ports;  // source order
  std::vector<ModuleItem> items;
  SourceLoc loc;
};

bool operator==(const DesignAst& a, const DesignAst& b);

}  // namespace hwut
