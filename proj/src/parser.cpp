#include "hwut/parser.hpp"

#include <cctype>
#include <set>
#include <sstream>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "hwut/error.hpp"

namespace hwut {
namespace {

enum class Tok { kIdent, kNumber, kPunct, kEnd };

struct Token {
  Tok kind = Tok::kEnd;
  std::string text;
  SourceLoc loc;
  // kNumber
  uint64_t value = 0;
  int width = 0;
  char base = '\0';
};

const std::unordered_set<std::string_view>& unsupported_keywords() {
  static const std::unordered_set<std::string_view> kWords = {
      "inout",        "initial",      "final",      "generate",
      "endgenerate",  "genvar",       "function",   "endfunction",
      "task",         "endtask",      "for",        "while",
      "repeat",       "forever",      "do",         "casez",
      "casex",        "unique",       "priority",   "integer",
      "int",          "signed",       "unsigned",   "real",
      "time",         "interface",    "endinterface", "typedef",
      "enum",         "struct",       "packed",     "always_latch",
      "assert",       "assume",       "cover",      "property",
      "sequence",     "fork",         "join",       "wait",
      "disable",      "force",        "release",    "deassign",
      "tri",          "supply0",      "supply1",    "defparam",
      "specify",      "primitive",    "package",    "import",
      "bit",          "byte",         "shortint",   "longint",
  };
  return kWords;
}

bool is_keyword(std::string_view word) {
  static const std::unordered_set<std::string_view> kWords = {
      "module",  "endmodule", "input",      "output",    "wire",
      "reg",     "logic",     "assign",     "always",    "always_comb",
      "always_ff", "posedge", "negedge",    "or",        "begin",
      "end",     "if",        "else",       "case",      "endcase",
      "default", "parameter", "localparam",
  };
  return kWords.contains(word) || unsupported_keywords().contains(word);
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_trivia();
      Token t;
      t.loc = here();
      if (pos_ >= text_.size()) {
        t.kind = Tok::kEnd;
        t.loc.end = t.loc.begin;
        out.push_back(t);
        return out;
      }
      char c = text_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                text_[pos_] == '_' || text_[pos_] == '$')) {
          advance();
        }
        t.kind = Tok::kIdent;
        t.text = std::string(text_.substr(start, pos_ - start));
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '\'') {
        lex_number(t);
      } else if (c == '$') {
        throw Error(Errc::kUnsupportedConstruct,
                    "system tasks and functions are not supported", t.loc.line,
                    t.loc.column);
      } else if (c == '`') {
        throw Error(Errc::kUnsupportedConstruct,
                    "compiler directives are not supported", t.loc.line,
                    t.loc.column);
      } else {
        lex_punct(t);
      }
      t.loc.end = static_cast<int>(pos_);
      out.push_back(std::move(t));
    }
  }

 private:
  SourceLoc here() const {
    return {line_, column_, static_cast<int>(pos_), static_cast<int>(pos_)};
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_trivia() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (text_.substr(pos_, 2) == "//") {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (text_.substr(pos_, 2) == "/*") {
        SourceLoc start = here();
        advance();
        advance();
        while (pos_ < text_.size() && text_.substr(pos_, 2) != "*/") advance();
        if (pos_ >= text_.size()) {
          throw Error(Errc::kSyntaxError, "unterminated block comment",
                      start.line, start.column);
        }
        advance();
        advance();
      } else if (c == '`') {
        // `timescale and `default_nettype carry no meaning for two-valued
        // cycle simulation; any other directive is rejected by the caller.
        size_t end = pos_ + 1;
        while (end < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[end])) ||
                text_[end] == '_')) {
          ++end;
        }
        std::string_view name = text_.substr(pos_ + 1, end - pos_ - 1);
        if (name != "timescale" && name != "default_nettype") return;
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else {
        return;
      }
    }
  }

  [[noreturn]] void fail(Errc code, const std::string& msg,
                         const SourceLoc& loc) const {
    throw Error(code, msg, loc.line, loc.column);
  }

  void lex_number(Token& t) {
    t.kind = Tok::kNumber;
    size_t start = pos_;
    std::string size_digits;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '_')) {
      if (text_[pos_] != '_') size_digits += text_[pos_];
      advance();
    }
    if (pos_ < text_.size() && text_[pos_] == '\'') {
      advance();
      if (pos_ < text_.size() && (text_[pos_] == 's' || text_[pos_] == 'S')) {
        fail(Errc::kUnsupportedConstruct, "signed literals are not supported",
             t.loc);
      }
      if (pos_ >= text_.size()) fail(Errc::kSyntaxError, "truncated literal", t.loc);
      char base = static_cast<char>(std::tolower(text_[pos_]));
      if (base == '0' || base == '1' || base == 'x' || base == 'z') {
        fail(Errc::kUnsupportedConstruct,
             "fill literals ('0, '1, 'x, 'z) are not supported", t.loc);
      }
      if (base != 'b' && base != 'd' && base != 'h' && base != 'o') {
        fail(Errc::kSyntaxError, "invalid literal base", t.loc);
      }
      advance();
      while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) {
        advance();
      }
      std::string digits;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_' || text_[pos_] == '?')) {
        if (text_[pos_] != '_') {
          digits += static_cast<char>(std::tolower(text_[pos_]));
        }
        advance();
      }
      if (digits.empty()) fail(Errc::kSyntaxError, "literal has no digits", t.loc);
      int radix = base == 'b' ? 2 : base == 'o' ? 8 : base == 'd' ? 10 : 16;
      uint64_t value = 0;
      for (char d : digits) {
        if (d == 'x' || d == 'z' || d == '?') {
          fail(Errc::kUnsupportedConstruct,
               "4-state literal digits are not supported", t.loc);
        }
        int v = std::isdigit(static_cast<unsigned char>(d)) ? d - '0'
                : (d >= 'a' && d <= 'f')                    ? d - 'a' + 10
                                                            : 99;
        if (v >= radix) fail(Errc::kSyntaxError, "invalid digit in literal", t.loc);
        if (value > (UINT64_MAX - static_cast<uint64_t>(v)) / radix) {
          fail(Errc::kUnsupportedConstruct, "literal wider than 64 bits", t.loc);
        }
        value = value * radix + static_cast<uint64_t>(v);
      }
      int width = 0;
      if (!size_digits.empty()) {
        if (size_digits.size() > 4) {
          fail(Errc::kUnsupportedConstruct, "vectors wider than 64 bits", t.loc);
        }
        width = std::stoi(size_digits);
        if (width == 0) fail(Errc::kSyntaxError, "zero-width literal", t.loc);
        if (width > 64) {
          fail(Errc::kUnsupportedConstruct, "vectors wider than 64 bits", t.loc);
        }
      }
      t.value = value;
      t.width = width;
      t.base = base;
    } else {
      if (size_digits.size() > 19) {
        fail(Errc::kUnsupportedConstruct, "literal wider than 64 bits", t.loc);
      }
      t.value = std::stoull(size_digits);
      t.width = 0;
      t.base = '\0';
    }
    t.text = std::string(text_.substr(start, pos_ - start));
  }

  void lex_punct(Token& t) {
    static const std::vector<std::string_view> kPuncts = {
        "<<<", ">>>", "===", "!==", "**", "->", "~&", "~|", "~^", "^~", "&&",
        "||",  "==",  "!=",  "<=",  ">=", "<<", ">>", "(",  ")",  "[",  "]",
        "{",   "}",   ";",   ",",   ":",  "?",  "@",  "#",  "=",  "+",  "-",
        "!",   "~",   "&",   "|",   "^",  "<",  ">",  ".",  "*",  "/",  "%",
    };
    t.kind = Tok::kPunct;
    for (std::string_view p : kPuncts) {
      if (text_.substr(pos_, p.size()) == p) {
        for (size_t i = 0; i < p.size(); ++i) advance();
        t.text = std::string(p == "^~" ? "~^" : p);
        if (t.text == "<<<" || t.text == ">>>" || t.text == "===" ||
            t.text == "!==" || t.text == "**" || t.text == "->" ||
            t.text == "/" || t.text == "%") {
          fail(Errc::kUnsupportedConstruct,
               "operator '" + t.text + "' is not supported", t.loc);
        }
        return;
      }
    }
    fail(Errc::kSyntaxError,
         std::string("unexpected character '") + text_[pos_] + "'", t.loc);
  }

  std::string_view text_;
  size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  DesignAst parse() {
    if (peek().kind == Tok::kEnd) {
      fail(Errc::kSyntaxError, "no module found");
    }
    DesignAst ast = parse_module();
    if (peek().kind != Tok::kEnd) {
      if (is_word("module")) {
        fail(Errc::kUnsupportedConstruct,
             "only one module per source is supported");
      }
      fail(Errc::kSyntaxError, "unexpected text after endmodule");
    }
    return ast;
  }

 private:
  const Token& peek(size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& prev() const { return toks_[pos_ == 0 ? 0 : pos_ - 1]; }
  Token take() {
    Token t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }

  bool is_punct(std::string_view p, size_t ahead = 0) const {
    return peek(ahead).kind == Tok::kPunct && peek(ahead).text == p;
  }
  bool is_word(std::string_view w, size_t ahead = 0) const {
    return peek(ahead).kind == Tok::kIdent && peek(ahead).text == w;
  }
  bool accept_punct(std::string_view p) {
    if (!is_punct(p)) return false;
    take();
    return true;
  }
  bool accept_word(std::string_view w) {
    if (!is_word(w)) return false;
    take();
    return true;
  }

  [[noreturn]] void fail(Errc code, const std::string& msg) const {
    const Token& t = peek();
    throw Error(code, msg, t.loc.line, t.loc.column);
  }

  [[noreturn]] void unexpected(const std::string& wanted) const {
    const Token& t = peek();
    if (t.kind == Tok::kIdent && unsupported_keywords().contains(t.text)) {
      fail(Errc::kUnsupportedConstruct,
           "'" + t.text + "' is not supported");
    }
    if (is_punct("#")) {
      fail(Errc::kUnsupportedConstruct, "delays are not supported");
    }
    std::string got = t.kind == Tok::kEnd ? "end of input" : "'" + t.text + "'";
    fail(Errc::kSyntaxError, "expected " + wanted + ", got " + got);
  }

  void expect_punct(std::string_view p) {
    if (!accept_punct(p)) unexpected("'" + std::string(p) + "'");
  }
  void expect_word(std::string_view w) {
    if (!accept_word(w)) unexpected("'" + std::string(w) + "'");
  }

  std::string expect_ident() {
    const Token& t = peek();
    if (t.kind != Tok::kIdent || is_keyword(t.text)) unexpected("identifier");
    return take().text;
  }

  // Closes a span that started at `start` with the previously consumed token.
  SourceLoc span_from(const SourceLoc& start) const {
    SourceLoc loc = start;
    loc.end = prev().loc.end;
    return loc;
  }

  DesignAst parse_module() {
    DesignAst ast;
    ast.loc = peek().loc;
    if (!is_word("module")) {
      if (is_word("interface") || is_word("package")) unexpected("'module'");
      unexpected("'module'");
    }
    take();
    ast.name = expect_ident();
    if (accept_punct("#")) {
      expect_punct("(");
      if (!is_punct(")")) {
        do {
          accept_word("parameter");
          ParamDecl p = parse_param_body(false);
          p.in_header = true;
          ast.items.emplace_back(std::move(p));
        } while (accept_punct(","));
      }
      expect_punct(")");
    }
    std::vector<std::string> non_ansi;
    if (accept_punct("(")) {
      if (!is_punct(")")) {
        if (is_word("input") || is_word("output") || is_word("inout")) {
          parse_ansi_ports(ast);
        } else {
          do {
            non_ansi.push_back(expect_ident());
          } while (accept_punct(","));
        }
      }
      expect_punct(")");
    }
    expect_punct(";");

    std::unordered_map<std::string, bool> pending;  // non-ANSI port -> declared
    for (const auto& n : non_ansi) pending[n] = false;
    std::vector<PortDecl> non_ansi_decls(non_ansi.size());

    while (!is_word("endmodule")) {
      if (peek().kind == Tok::kEnd) unexpected("'endmodule'");
      parse_item(ast, non_ansi, non_ansi_decls, pending);
    }
    take();
    if (!non_ansi.empty()) {
      for (size_t i = 0; i < non_ansi.size(); ++i) {
        if (!pending[non_ansi[i]]) {
          throw Error(Errc::kSyntaxError,
                      "port '" + non_ansi[i] + "' has no direction declaration",
                      ast.loc.line, ast.loc.column);
        }
        ast.ports.push_back(std::move(non_ansi_decls[i]));
      }
    }
    ast.loc = span_from(ast.loc);
    return ast;
  }

  NetKind parse_net_kind() {
    if (accept_word("wire")) return NetKind::kWire;
    if (accept_word("reg")) return NetKind::kReg;
    if (accept_word("logic")) return NetKind::kLogic;
    return NetKind::kImplicit;
  }

  std::optional<Range> parse_opt_range() {
    if (!is_punct("[")) return std::nullopt;
    take();
    Range r{parse_expr(), Expr{}};
    expect_punct(":");
    r.lsb = parse_expr();
    expect_punct("]");
    return r;
  }

  void parse_ansi_ports(DesignAst& ast) {
    Direction dir = Direction::kInput;
    NetKind net = NetKind::kImplicit;
    std::optional<Range> range;
    do {
      SourceLoc start = peek().loc;
      if (is_word("inout")) unexpected("port direction");
      if (accept_word("input")) {
        dir = Direction::kInput;
        net = parse_net_kind();
        range = parse_opt_range();
      } else if (accept_word("output")) {
        dir = Direction::kOutput;
        net = parse_net_kind();
        range = parse_opt_range();
      } else if (is_word("wire") || is_word("reg") || is_word("logic") ||
                 is_punct("[")) {
        net = parse_net_kind();
        range = parse_opt_range();
      }
      PortDecl p;
      p.name = expect_ident();
      p.direction = dir;
      p.net = net;
      p.range = range;
      p.loc = span_from(start);
      if (is_punct("[")) {
        fail(Errc::kUnsupportedConstruct, "unpacked arrays are not supported");
      }
      ast.ports.push_back(std::move(p));
    } while (accept_punct(","));
  }

  void parse_item(DesignAst& ast, const std::vector<std::string>& non_ansi,
                  std::vector<PortDecl>& non_ansi_decls,
                  std::unordered_map<std::string, bool>& pending) {
    SourceLoc start = peek().loc;
    if (is_word("input") || is_word("output")) {
      Direction dir = take().text == "input" ? Direction::kInput
                                             : Direction::kOutput;
      NetKind net = parse_net_kind();
      std::optional<Range> range = parse_opt_range();
      do {
        SourceLoc nstart = peek().loc;
        std::string name = expect_ident();
        auto it = pending.find(name);
        if (it == pending.end()) {
          throw Error(Errc::kSyntaxError,
                      "'" + name + "' is not in the module port list",
                      nstart.line, nstart.column);
        }
        if (it->second) {
          throw Error(Errc::kDuplicateDeclaration,
                      "port '" + name + "' declared twice", nstart.line,
                      nstart.column);
        }
        it->second = true;
        size_t idx = 0;
        while (non_ansi[idx] != name) ++idx;
        PortDecl& p = non_ansi_decls[idx];
        p.name = name;
        p.direction = dir;
        p.net = net;
        p.range = range;
        p.loc = span_from(nstart);
      } while (accept_punct(","));
      expect_punct(";");
      return;
    }
    if (is_word("wire") || is_word("reg") || is_word("logic")) {
      NetKind net = parse_net_kind();
      std::optional<Range> range = parse_opt_range();
      do {
        SourceLoc nstart = peek().loc;
        std::string name = expect_ident();
        if (is_punct("[")) {
          fail(Errc::kUnsupportedConstruct,
               "unpacked arrays (memories) are not supported");
        }
        auto it = pending.find(name);
        if (it != pending.end()) {
          // `output q; reg q;` style: fold the net kind into the port.
          size_t idx = 0;
          while (non_ansi[idx] != name) ++idx;
          PortDecl& p = non_ansi_decls[idx];
          if (!it->second) {
            throw Error(Errc::kSyntaxError,
                        "net kind for '" + name + "' precedes its direction",
                        nstart.line, nstart.column);
          }
          if (range && p.range && !(*range == *p.range)) {
            throw Error(Errc::kWidthMismatch,
                        "conflicting ranges for port '" + name + "'",
                        nstart.line, nstart.column);
          }
          if (is_punct("=")) {
            fail(Errc::kUnsupportedConstruct,
                 "initializers on port declarations are not supported");
          }
          p.net = net;
          if (range) p.range = range;
          continue;
        }
        NetDecl d;
        d.name = name;
        d.net = net;
        d.range = range;
        if (accept_punct("=")) {
          if (net != NetKind::kWire) {
            fail(Errc::kUnsupportedConstruct,
                 "variable initializers are not supported (registers start "
                 "at 0)");
          }
          d.init = parse_expr();
        }
        d.loc = span_from(nstart);
        ast.items.emplace_back(std::move(d));
      } while (accept_punct(","));
      expect_punct(";");
      return;
    }
    if (is_word("parameter") || is_word("localparam")) {
      bool local = take().text == "localparam";
      std::optional<Range> range = parse_opt_range();
      do {
        ParamDecl p = parse_param_body(local, false);
        p.range = range;
        ast.items.emplace_back(std::move(p));
      } while (accept_punct(","));
      expect_punct(";");
      return;
    }
    if (accept_word("assign")) {
      do {
        SourceLoc astart = peek().loc;
        ContAssign a;
        a.lhs = parse_lvalue();
        expect_punct("=");
        a.rhs = parse_expr();
        a.loc = span_from(astart);
        ast.items.emplace_back(std::move(a));
      } while (accept_punct(","));
      expect_punct(";");
      return;
    }
    if (is_word("always") || is_word("always_comb") || is_word("always_ff")) {
      ast.items.emplace_back(parse_always(start));
      return;
    }
    if (peek().kind == Tok::kIdent && !is_keyword(peek().text) &&
        peek(1).kind == Tok::kIdent) {
      fail(Errc::kUnsupportedConstruct,
           "module instantiation is not supported");
    }
    unexpected("module item");
  }

  ParamDecl parse_param_body(bool local, bool allow_range = true) {
    SourceLoc start = peek().loc;
    ParamDecl p;
    p.local = local;
    if (allow_range) p.range = parse_opt_range();
    p.name = expect_ident();
    expect_punct("=");
    p.value = parse_expr();
    p.loc = span_from(start);
    return p;
  }

  AlwaysBlock parse_always(const SourceLoc& start) {
    AlwaysBlock blk;
    std::string kw = take().text;
    if (kw == "always_comb") {
      blk.style = AlwaysBlock::Style::kAlwaysComb;
    } else {
      blk.style = kw == "always_ff" ? AlwaysBlock::Style::kAlwaysFf
                                    : AlwaysBlock::Style::kAlways;
      if (!is_punct("@")) {
        if (is_punct("#")) unexpected("'@'");
        fail(Errc::kUnsupportedConstruct,
             "always blocks without an event control are not supported");
      }
      take();
      if (accept_punct("*")) {
        // @*
      } else {
        expect_punct("(");
        if (accept_punct("*")) {
          expect_punct(")");
        } else {
          bool any_edge = false;
          bool any_level = false;
          do {
            SourceLoc estart = peek().loc;
            if (is_word("posedge") || is_word("negedge")) {
              EdgeEvent ev;
              ev.edge = take().text == "posedge" ? Edge::kPos : Edge::kNeg;
              ev.signal = expect_ident();
              ev.loc = span_from(estart);
              blk.events.push_back(std::move(ev));
              any_edge = true;
            } else {
              expect_ident();
              any_level = true;
            }
          } while (accept_punct(",") || accept_word("or"));
          expect_punct(")");
          if (any_edge && any_level) {
            throw Error(Errc::kUnsupportedConstruct,
                        "mixed edge and level sensitivity is not supported",
                        start.line, start.column);
          }
          // A pure level list is treated like @(*).
        }
      }
      if (blk.style == AlwaysBlock::Style::kAlwaysFf && blk.events.empty()) {
        throw Error(Errc::kSyntaxError, "always_ff requires edge events",
                    start.line, start.column);
      }
    }
    blk.body = parse_stmt();
    blk.loc = span_from(start);
    return blk;
  }

  Stmt parse_stmt() {
    SourceLoc start = peek().loc;
    Stmt s;
    if (accept_punct(";")) {
      s.kind = Stmt::Kind::kNull;
    } else if (accept_word("begin")) {
      s.kind = Stmt::Kind::kBlock;
      if (accept_punct(":")) s.label = expect_ident();
      while (!is_word("end")) {
        if (peek().kind == Tok::kEnd) unexpected("'end'");
        s.body.push_back(parse_stmt());
      }
      take();
      if (accept_punct(":")) {
        std::string closing = expect_ident();
        if (closing != s.label) fail(Errc::kSyntaxError, "mismatched block label");
      }
    } else if (accept_word("if")) {
      s.kind = Stmt::Kind::kIf;
      expect_punct("(");
      s.cond = parse_expr();
      expect_punct(")");
      s.body.push_back(parse_stmt());
      if (accept_word("else")) s.body.push_back(parse_stmt());
    } else if (accept_word("case")) {
      s.kind = Stmt::Kind::kCase;
      expect_punct("(");
      s.cond = parse_expr();
      expect_punct(")");
      bool seen_default = false;
      while (!is_word("endcase")) {
        if (peek().kind == Tok::kEnd) unexpected("'endcase'");
        CaseItem item;
        SourceLoc istart = peek().loc;
        if (accept_word("default")) {
          if (seen_default) fail(Errc::kSyntaxError, "duplicate default arm");
          seen_default = true;
          accept_punct(":");
        } else {
          do {
            item.labels.push_back(parse_expr());
          } while (accept_punct(","));
          expect_punct(":");
        }
        item.body = parse_stmt();
        item.loc = span_from(istart);
        s.items.push_back(std::move(item));
      }
      take();
    } else if (peek().kind == Tok::kIdent && !is_keyword(peek().text)) {
      s.lhs() = parse_lvalue();
      if (accept_punct("=")) {
        s.kind = Stmt::Kind::kBlocking;
      } else if (accept_punct("<=")) {
        s.kind = Stmt::Kind::kNonBlocking;
      } else {
        unexpected("'=' or '<='");
      }
      if (is_punct("#")) unexpected("expression");
      s.rhs = parse_expr();
      expect_punct(";");
    } else if (is_punct("{")) {
      s.lhs() = parse_lvalue();
      if (accept_punct("=")) {
        s.kind = Stmt::Kind::kBlocking;
      } else if (accept_punct("<=")) {
        s.kind = Stmt::Kind::kNonBlocking;
      } else {
        unexpected("'=' or '<='");
      }
      s.rhs = parse_expr();
      expect_punct(";");
    } else {
      unexpected("statement");
    }
    s.loc = span_from(start);
    return s;
  }

  Expr parse_lvalue() {
    SourceLoc start = peek().loc;
    if (accept_punct("{")) {
      Expr e;
      e.kind = Expr::Kind::kConcat;
      do {
        e.operands.push_back(parse_lvalue());
      } while (accept_punct(","));
      expect_punct("}");
      e.loc = span_from(start);
      return e;
    }
    Expr e = Expr::ident(expect_ident());
    if (accept_punct("[")) {
      Expr hi = parse_expr();
      if (accept_punct(":")) {
        e.kind = Expr::Kind::kSlice;
        e.operands.push_back(std::move(hi));
        e.operands.push_back(parse_expr());
      } else {
        if (is_punct("+:") || is_punct("-:")) {
          fail(Errc::kUnsupportedConstruct, "indexed part-selects are not supported");
        }
        e.kind = Expr::Kind::kIndex;
        e.operands.push_back(std::move(hi));
      }
      expect_punct("]");
    }
    e.loc = span_from(start);
    return e;
  }

  Expr parse_expr() {
    SourceLoc start = peek().loc;
    Expr cond = parse_binary(0);
    if (!accept_punct("?")) return cond;
    Expr then_value = parse_expr();
    expect_punct(":");
    Expr else_value = parse_expr();
    Expr e = Expr::ternary(std::move(cond), std::move(then_value),
                           std::move(else_value));
    e.loc = span_from(start);
    return e;
  }

  static int binary_prec(const Token& t, BinaryOp* op) {
    if (t.kind != Tok::kPunct) return -1;
    static const std::unordered_map<std::string, std::pair<int, BinaryOp>> k = {
        {"||", {1, BinaryOp::kLogicOr}},  {"&&", {2, BinaryOp::kLogicAnd}},
        {"|", {3, BinaryOp::kBitOr}},     {"^", {4, BinaryOp::kBitXor}},
        {"~^", {4, BinaryOp::kBitXnor}},  {"&", {5, BinaryOp::kBitAnd}},
        {"==", {6, BinaryOp::kEq}},       {"!=", {6, BinaryOp::kNe}},
        {"<", {7, BinaryOp::kLt}},        {"<=", {7, BinaryOp::kLe}},
        {">", {7, BinaryOp::kGt}},        {">=", {7, BinaryOp::kGe}},
        {"<<", {8, BinaryOp::kShl}},      {">>", {8, BinaryOp::kShr}},
        {"+", {9, BinaryOp::kAdd}},       {"-", {9, BinaryOp::kSub}},
    };
    auto it = k.find(t.text);
    if (it == k.end()) return -1;
    *op = it->second.second;
    return it->second.first;
  }

  Expr parse_binary(int min_prec) {
    SourceLoc start = peek().loc;
    Expr lhs = parse_unary();
    for (;;) {
      BinaryOp op;
      int prec = binary_prec(peek(), &op);
      if (prec < 0 || prec <= min_prec) {
        if (is_punct("*")) {
          fail(Errc::kUnsupportedConstruct, "operator '*' is not supported");
        }
        return lhs;
      }
      take();
      Expr rhs = parse_binary(prec);
      lhs = Expr::binary(op, std::move(lhs), std::move(rhs));
      lhs.loc = span_from(start);
    }
  }

  Expr parse_unary() {
    SourceLoc start = peek().loc;
    static const std::unordered_map<std::string, UnaryOp> kUnary = {
        {"!", UnaryOp::kLogicNot},    {"~", UnaryOp::kBitNot},
        {"-", UnaryOp::kNegate},      {"+", UnaryOp::kPlus},
        {"&", UnaryOp::kReduceAnd},   {"|", UnaryOp::kReduceOr},
        {"^", UnaryOp::kReduceXor},   {"~&", UnaryOp::kReduceNand},
        {"~|", UnaryOp::kReduceNor},  {"~^", UnaryOp::kReduceXnor},
    };
    if (peek().kind == Tok::kPunct) {
      auto it = kUnary.find(peek().text);
      if (it != kUnary.end()) {
        take();
        Expr e = Expr::unary(it->second, parse_unary());
        e.loc = span_from(start);
        return e;
      }
    }
    return parse_primary();
  }

  Expr parse_primary() {
    SourceLoc start = peek().loc;
    const Token& t = peek();
    if (t.kind == Tok::kNumber) {
      Token n = take();
      Expr e = Expr::number(n.value, n.width, n.base);
      e.loc = n.loc;
      return e;
    }
    if (accept_punct("(")) {
      Expr e = parse_expr();
      expect_punct(")");
      return e;
    }
    if (accept_punct("{")) {
      Expr first = parse_expr();
      Expr e;
      if (is_punct("{")) {
        // replication {n{a, b}}
        take();
        e.kind = Expr::Kind::kReplicate;
        e.operands.push_back(std::move(first));
        do {
          e.operands.push_back(parse_expr());
        } while (accept_punct(","));
        expect_punct("}");
      } else {
        e.kind = Expr::Kind::kConcat;
        e.operands.push_back(std::move(first));
        while (accept_punct(",")) e.operands.push_back(parse_expr());
      }
      expect_punct("}");
      e.loc = span_from(start);
      return e;
    }
    if (t.kind == Tok::kIdent && !is_keyword(t.text)) {
      Expr e = Expr::ident(take().text);
      if (is_punct("(")) {
        fail(Errc::kUnsupportedConstruct, "function calls are not supported");
      }
      if (accept_punct("[")) {
        Expr hi = parse_expr();
        if (accept_punct(":")) {
          e.kind = Expr::Kind::kSlice;
          e.operands.push_back(std::move(hi));
          e.operands.push_back(parse_expr());
        } else {
          e.kind = Expr::Kind::kIndex;
          e.operands.push_back(std::move(hi));
        }
        expect_punct("]");
        if (is_punct("[")) {
          fail(Errc::kUnsupportedConstruct,
               "multi-dimensional selects are not supported");
        }
      }
      e.loc = span_from(start);
      return e;
    }
    unexpected("expression");
  }

  std::vector<Token> toks_;
  size_t pos_ = 0;
};

// --- printing -------------------------------------------------------------

int expr_prec(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::kTernary:
      return 0;
    case Expr::Kind::kBinary:
      switch (e.binary_op) {
        case BinaryOp::kLogicOr: return 1;
        case BinaryOp::kLogicAnd: return 2;
        case BinaryOp::kBitOr: return 3;
        case BinaryOp::kBitXor:
        case BinaryOp::kBitXnor: return 4;
        case BinaryOp::kBitAnd: return 5;
        case BinaryOp::kEq:
        case BinaryOp::kNe: return 6;
        case BinaryOp::kLt:
        case BinaryOp::kLe:
        case BinaryOp::kGt:
        case BinaryOp::kGe: return 7;
        case BinaryOp::kShl:
        case BinaryOp::kShr: return 8;
        case BinaryOp::kAdd:
        case BinaryOp::kSub: return 9;
      }
      return 9;
    case Expr::Kind::kUnary:
      return 10;
    default:
      return 11;
  }
}

std::string number_text(const Expr& e) {
  if (e.base == '\0') return std::to_string(e.value);
  std::string digits;
  switch (e.base) {
    case 'b': {
      int n = e.width > 0 ? e.width : 1;
      uint64_t v = e.value;
      int top = 63;
      while (top > 0 && !((v >> top) & 1)) --top;
      n = std::max(n, top + 1);
      if (e.width > 0) n = e.width;
      for (int i = n - 1; i >= 0; --i) digits += ((v >> i) & 1) ? '1' : '0';
      break;
    }
    case 'o': {
      std::ostringstream os;
      os << std::oct << e.value;
      digits = os.str();
      break;
    }
    case 'h': {
      std::ostringstream os;
      os << std::hex << e.value;
      digits = os.str();
      break;
    }
    default:
      digits = std::to_string(e.value);
  }
  std::string out = e.width > 0 ? std::to_string(e.width) : "";
  out += '\'';
  out += e.base;
  out += digits;
  return out;
}

void print_expr_to(const Expr& e, std::string& out);

void print_operand(const Expr& e, int parent_prec, bool right, std::string& out) {
  int p = expr_prec(e);
  bool paren = p < parent_prec || (right && p == parent_prec);
  if (paren) out += '(';
  print_expr_to(e, out);
  if (paren) out += ')';
}

void print_expr_to(const Expr& e, std::string& out) {
  switch (e.kind) {
    case Expr::Kind::kNumber:
      out += number_text(e);
      return;
    case Expr::Kind::kIdent:
      out += e.name;
      return;
    case Expr::Kind::kIndex:
      out += e.name + "[";
      print_expr_to(e.operands[0], out);
      out += "]";
      return;
    case Expr::Kind::kSlice:
      out += e.name + "[";
      print_expr_to(e.operands[0], out);
      out += ":";
      print_expr_to(e.operands[1], out);
      out += "]";
      return;
    case Expr::Kind::kUnary: {
      out += op_text(e.unary_op);
      const Expr& x = e.operands[0];
      // Parenthesize nested unary operands so "- -a" and "~&" never fuse.
      bool paren = expr_prec(x) <= 10;
      if (paren) out += '(';
      print_expr_to(x, out);
      if (paren) out += ')';
      return;
    }
    case Expr::Kind::kBinary: {
      int p = expr_prec(e);
      print_operand(e.operands[0], p, false, out);
      out += ' ';
      out += op_text(e.binary_op);
      out += ' ';
      print_operand(e.operands[1], p, true, out);
      return;
    }
    case Expr::Kind::kTernary:
      print_operand(e.operands[0], 1, false, out);
      out += " ? ";
      print_operand(e.operands[1], 0, false, out);
      out += " : ";
      print_operand(e.operands[2], 0, false, out);
      return;
    case Expr::Kind::kConcat:
      out += '{';
      for (size_t i = 0; i < e.operands.size(); ++i) {
        if (i) out += ", ";
        print_expr_to(e.operands[i], out);
      }
      out += '}';
      return;
    case Expr::Kind::kReplicate:
      out += '{';
      print_operand(e.operands[0], 11, false, out);
      out += '{';
      for (size_t i = 1; i < e.operands.size(); ++i) {
        if (i > 1) out += ", ";
        print_expr_to(e.operands[i], out);
      }
      out += "}}";
      return;
  }
}

std::string range_text(const std::optional<Range>& r) {
  if (!r) return "";
  return "[" + print_expr(r->msb) + ":" + print_expr(r->lsb) + "] ";
}

const char* net_text(NetKind k) {
  switch (k) {
    case NetKind::kWire: return "wire ";
    case NetKind::kReg: return "reg ";
    case NetKind::kLogic: return "logic ";
    case NetKind::kImplicit: return "";
  }
  return "";
}

void print_stmt_to(const Stmt& s, int indent, std::string& out);

void print_branch(const Stmt& s, int indent, std::string& out) {
  if (s.kind == Stmt::Kind::kBlock) {
    out += " ";
    std::string tmp;
    print_stmt_to(s, indent, tmp);
    out += tmp.substr(static_cast<size_t>(indent));
  } else {
    out += "\n";
    print_stmt_to(s, indent + 4, out);
  }
}

void print_stmt_to(const Stmt& s, int indent, std::string& out) {
  std::string pad(static_cast<size_t>(indent), ' ');
  switch (s.kind) {
    case Stmt::Kind::kNull:
      out += pad + ";\n";
      return;
    case Stmt::Kind::kBlocking:
    case Stmt::Kind::kNonBlocking:
      out += pad + print_expr(s.lhs()) +
             (s.kind == Stmt::Kind::kBlocking ? " = " : " <= ") +
             print_expr(s.rhs) + ";\n";
      return;
    case Stmt::Kind::kBlock:
      out += pad + "begin";
      if (!s.label.empty()) out += " : " + s.label;
      out += "\n";
      for (const Stmt& c : s.body) print_stmt_to(c, indent + 4, out);
      out += pad + "end\n";
      return;
    case Stmt::Kind::kIf: {
      out += pad + "if (" + print_expr(s.cond) + ")";
      print_branch(s.body[0], indent, out);
      if (s.has_else()) {
        const Stmt& e = s.body[1];
        if (e.kind == Stmt::Kind::kIf) {
          std::string tmp;
          print_stmt_to(e, indent, tmp);
          out += pad + "else " + tmp.substr(static_cast<size_t>(indent));
        } else {
          out += pad + "else";
          print_branch(e, indent, out);
        }
      }
      return;
    }
    case Stmt::Kind::kCase:
      out += pad + "case (" + print_expr(s.cond) + ")\n";
      for (const CaseItem& item : s.items) {
        std::string head = std::string(static_cast<size_t>(indent + 4), ' ');
        if (item.is_default()) {
          head += "default:";
        } else {
          for (size_t i = 0; i < item.labels.size(); ++i) {
            if (i) head += ", ";
            head += print_expr(item.labels[i]);
          }
          head += ":";
        }
        out += head;
        print_branch(item.body, indent + 4, out);
      }
      out += pad + "endcase\n";
      return;
  }
}

}  // namespace

DesignAst parse_design(const DesignSource& source) {
  std::vector<Token> tokens = Lexer(source.text).run();
  return Parser(std::move(tokens)).parse();
}

std::string print_expr(const Expr& expr) {
  std::string out;
  print_expr_to(expr, out);
  return out;
}

std::string print_stmt(const Stmt& stmt, int indent) {
  std::string out;
  print_stmt_to(stmt, indent, out);
  return out;
}

std::string pretty_print(const DesignAst& ast) {
  std::string out = "module " + ast.name;
  std::vector<const ParamDecl*> header;
  for (const ModuleItem& item : ast.items) {
    if (const auto* p = std::get_if<ParamDecl>(&item); p && p->in_header) {
      header.push_back(p);
    }
  }
  if (!header.empty()) {
    out += " #(\n";
    for (size_t i = 0; i < header.size(); ++i) {
      const ParamDecl& p = *header[i];
      out += "    parameter " + range_text(p.range) + p.name + " = " +
             print_expr(p.value) + (i + 1 < header.size() ? ",\n" : "\n");
    }
    out += ")";
  }
  out += " (\n";
  for (size_t i = 0; i < ast.ports.size(); ++i) {
    const PortDecl& p = ast.ports[i];
    out += std::string("    ") +
           (p.direction == Direction::kInput ? "input " : "output ") +
           net_text(p.net) + range_text(p.range) + p.name +
           (i + 1 < ast.ports.size() ? ",\n" : "\n");
  }
  out += ");\n";
  for (const ModuleItem& item : ast.items) {
    if (const auto* p = std::get_if<ParamDecl>(&item)) {
      if (p->in_header) continue;
      out += std::string("    ") + (p->local ? "localparam " : "parameter ") +
             range_text(p->range) + p->name + " = " + print_expr(p->value) +
             ";\n";
    } else if (const auto* n = std::get_if<NetDecl>(&item)) {
      out += "    " + std::string(net_text(n->net)) + range_text(n->range) +
             n->name;
      if (n->init) out += " = " + print_expr(*n->init);
      out += ";\n";
    } else if (const auto* a = std::get_if<ContAssign>(&item)) {
      out += "    assign " + print_expr(a->lhs) + " = " + print_expr(a->rhs) +
             ";\n";
    } else if (const auto* b = std::get_if<AlwaysBlock>(&item)) {
      std::string head = "    ";
      switch (b->style) {
        case AlwaysBlock::Style::kAlwaysComb:
          head += "always_comb";
          break;
        case AlwaysBlock::Style::kAlwaysFf:
        case AlwaysBlock::Style::kAlways:
          head += b->style == AlwaysBlock::Style::kAlwaysFf ? "always_ff @("
                                                             : "always @(";
          if (b->events.empty()) {
            head += "*";
          } else {
            for (size_t i = 0; i < b->events.size(); ++i) {
              if (i) head += " or ";
              head += b->events[i].edge == Edge::kPos ? "posedge " : "negedge ";
              head += b->events[i].signal;
            }
          }
          head += ")";
          break;
      }
      out += head;
      print_branch(b->body, 4, out);
    }
  }
  out += "endmodule\n";
  return out;
}

}  // namespace hwut
