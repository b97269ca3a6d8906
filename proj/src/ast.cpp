#include "hwut/ast.hpp"

#include "hwut/error.hpp"

namespace hwut {

DesignSource DesignSource::reference(std::string text) {
  return {std::move(text), Origin::kReference, "ref"};
}

DesignSource DesignSource::mutant(std::string text, std::string bc_id) {
  return {std::move(text), Origin::kMutant, std::move(bc_id)};
}

DesignSource DesignSource::patched(std::string text) {
  return {std::move(text), Origin::kPatched, "patched"};
}

std::string origin_name(const DesignSource& source) {
  switch (source.origin) {
    case Origin::kReference:
      return "reference";
    case Origin::kMutant:
      return "mutant " + source.label;
    case Origin::kPatched:
      return "patched";
  }
  return "unknown";
}

const char* op_text(UnaryOp op) {
  switch (op) {
    case UnaryOp::kLogicNot: return "!";
    case UnaryOp::kBitNot: return "~";
    case UnaryOp::kNegate: return "-";
    case UnaryOp::kPlus: return "+";
    case UnaryOp::kReduceAnd: return "&";
    case UnaryOp::kReduceOr: return "|";
    case UnaryOp::kReduceXor: return "^";
    case UnaryOp::kReduceNand: return "~&";
    case UnaryOp::kReduceNor: return "~|";
    case UnaryOp::kReduceXnor: return "~^";
  }
  return "?";
}

const char* op_text(BinaryOp op) {
  switch (op) {
    case BinaryOp::kAdd: return "+";
    case BinaryOp::kSub: return "-";
    case BinaryOp::kShl: return "<<";
    case BinaryOp::kShr: return ">>";
    case BinaryOp::kLt: return "<";
    case BinaryOp::kLe: return "<=";
    case BinaryOp::kGt: return ">";
    case BinaryOp::kGe: return ">=";
    case BinaryOp::kEq: return "==";
    case BinaryOp::kNe: return "!=";
    case BinaryOp::kBitAnd: return "&";
    case BinaryOp::kBitXor: return "^";
    case BinaryOp::kBitXnor: return "~^";
    case BinaryOp::kBitOr: return "|";
    case BinaryOp::kLogicAnd: return "&&";
    case BinaryOp::kLogicOr: return "||";
  }
  return "?";
}

Expr Expr::number(uint64_t value, int width, char base) {
  Expr e;
  e.kind = Kind::kNumber;
  e.value = value;
  e.width = width;
  e.base = base;
  return e;
}

Expr Expr::ident(std::string name) {
  Expr e;
  e.kind = Kind::kIdent;
  e.name = std::move(name);
  return e;
}

Expr Expr::unary(UnaryOp op, Expr operand) {
  Expr e;
  e.kind = Kind::kUnary;
  e.unary_op = op;
  e.loc = operand.loc;
  e.operands.push_back(std::move(operand));
  return e;
}

Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs) {
  Expr e;
  e.kind = Kind::kBinary;
  e.binary_op = op;
  e.loc = lhs.loc;
  e.operands.push_back(std::move(lhs));
  e.operands.push_back(std::move(rhs));
  return e;
}

Expr Expr::ternary(Expr cond, Expr then_value, Expr else_value) {
  Expr e;
  e.kind = Kind::kTernary;
  e.loc = cond.loc;
  e.operands.push_back(std::move(cond));
  e.operands.push_back(std::move(then_value));
  e.operands.push_back(std::move(else_value));
  return e;
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Expr::Kind::kNumber:
      return a.value == b.value && a.width == b.width && a.base == b.base;
    case Expr::Kind::kIdent:
      return a.name == b.name;
    case Expr::Kind::kUnary:
      return a.unary_op == b.unary_op && a.operands == b.operands;
    case Expr::Kind::kBinary:
      return a.binary_op == b.binary_op && a.operands == b.operands;
    case Expr::Kind::kIndex:
    case Expr::Kind::kSlice:
      return a.name == b.name && a.operands == b.operands;
    default:
      return a.operands == b.operands;
  }
}

bool operator==(const Stmt& a, const Stmt& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Stmt::Kind::kBlock:
      return a.label == b.label && a.body == b.body;
    case Stmt::Kind::kIf:
      return a.cond == b.cond && a.body == b.body;
    case Stmt::Kind::kCase:
      return a.cond == b.cond && a.items == b.items;
    case Stmt::Kind::kBlocking:
    case Stmt::Kind::kNonBlocking:
      return a.cond == b.cond && a.rhs == b.rhs;
    case Stmt::Kind::kNull:
      return true;
  }
  return false;
}

bool operator==(const CaseItem& a, const CaseItem& b) {
  return a.labels == b.labels && a.body == b.body;
}

bool operator==(const Range& a, const Range& b) {
  return a.msb == b.msb && a.lsb == b.lsb;
}

bool operator==(const PortDecl& a, const PortDecl& b) {
  return a.name == b.name && a.direction == b.direction && a.net == b.net &&
         a.range == b.range;
}

bool operator==(const ParamDecl& a, const ParamDecl& b) {
  return a.name == b.name && a.local == b.local &&
         a.in_header == b.in_header && a.range == b.range &&
         a.value == b.value;
}

bool operator==(const NetDecl& a, const NetDecl& b) {
  return a.name == b.name && a.net == b.net && a.range == b.range &&
         a.init == b.init;
}

bool operator==(const ContAssign& a, const ContAssign& b) {
  return a.lhs == b.lhs && a.rhs == b.rhs;
}

bool operator==(const EdgeEvent& a, const EdgeEvent& b) {
  return a.edge == b.edge && a.signal == b.signal;
}

bool operator==(const AlwaysBlock& a, const AlwaysBlock& b) {
  return a.style == b.style && a.events == b.events && a.body == b.body;
}

bool operator==(const DesignAst& a, const DesignAst& b) {
  return a.name == b.name && a.ports == b.ports && a.items == b.items;
}

}  // namespace hwut
