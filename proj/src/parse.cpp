#include "asyncst/parse.hpp"

#include <cctype>
#include <cstring>
#include <functional>
#include <set>

namespace asyncst {

// ---------------------------------------------------------------------------
// Lexer.
// ---------------------------------------------------------------------------
namespace {

struct Token {
  enum class K { Ident, Int, Punct, Eof } kind = K::Eof;
  std::string text;
  Int value = 0;
  SrcLoc loc;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }
  Token next() {
    Token t = tok_;
    advance();
    return t;
  }
  bool atPunct(const std::string& p) const {
    return tok_.kind == Token::K::Punct && tok_.text == p;
  }
  bool atIdent(const std::string& id) const {
    return tok_.kind == Token::K::Ident && tok_.text == id;
  }
  bool eof() const { return tok_.kind == Token::K::Eof; }

  Token expectPunct(const std::string& p) {
    if (!atPunct(p)) fail("expected '" + p + "'");
    return next();
  }
  Token expectIdent() {
    if (tok_.kind != Token::K::Ident) fail("expected identifier");
    return next();
  }
  Token expectKeyword(const std::string& kw) {
    if (!atIdent(kw)) fail("expected '" + kw + "'");
    return next();
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg + (tok_.kind == Token::K::Eof
                                ? " at end of input"
                                : " before '" + tok_.text + "'"),
                     tok_.loc);
  }

 private:
  void advance() {
    skipWs();
    tok_.loc = {line_, col_};
    if (pos_ >= src_.size()) {
      tok_ = Token{Token::K::Eof, "", 0, tok_.loc};
      return;
    }
    char c = src_[pos_];
    if (std::isalpha((unsigned char)c) || c == '_') {
      size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum((unsigned char)src_[pos_]) || src_[pos_] == '_'))
        bump();
      tok_ = Token{Token::K::Ident, src_.substr(start, pos_ - start), 0, tok_.loc};
      return;
    }
    if (std::isdigit((unsigned char)c)) {
      size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit((unsigned char)src_[pos_])) bump();
      Token t{Token::K::Int, src_.substr(start, pos_ - start), 0, tok_.loc};
      t.value = std::stoll(t.text);
      tok_ = t;
      return;
    }
    // Multi-character punctuation, longest match first.
    static const char* multi[] = {"-[", "]->", "->", "==", "!=", "<=", ">=",
                                  "&&", "||", ")*", "=>", "::"};
    for (const char* m : multi) {
      size_t n = std::strlen(m);
      if (src_.compare(pos_, n, m) == 0) {
        for (size_t i = 0; i < n; ++i) bump();
        tok_ = Token{Token::K::Punct, m, 0, tok_.loc};
        return;
      }
    }
    bump();
    tok_ = Token{Token::K::Punct, std::string(1, c), 0, tok_.loc};
  }

  void skipWs() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') bump();
      } else if (std::isspace((unsigned char)c)) {
        bump();
      } else {
        break;
      }
    }
  }

  void bump() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  const std::string& src_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token tok_;
};

// ---------------------------------------------------------------------------
// Shared small parsers.
// ---------------------------------------------------------------------------

Type parseType(Lexer& lx) {
  Token t = lx.expectIdent();
  if (t.text == "Int") return Type::intT();
  if (t.text == "Bool") return Type::boolT();
  if (t.text == "Unit") return Type::unitT();
  if (t.text == "List") {
    lx.expectPunct("<");
    lx.expectKeyword("Int");
    lx.expectPunct(">");
    return Type::listT();
  }
  if (t.text == "Fut") {
    lx.expectPunct("<");
    Type inner = parseType(lx);
    lx.expectPunct(">");
    return Type::futT(inner);
  }
  throw ParseError("unknown type '" + t.text + "'", t.loc);
}

Sort parseSort(Lexer& lx) {
  Token t = lx.expectIdent();
  if (t.text == "Int") return Sort::Int;
  if (t.text == "Bool") return Sort::Bool;
  if (t.text == "Fut") return Sort::Fut;
  if (t.text == "List") return Sort::List;
  if (t.text == "Obj") return Sort::Obj;
  if (t.text == "Unit") return Sort::UnitS;
  throw ParseError("unknown sort '" + t.text + "'", t.loc);
}

// ---------------------------------------------------------------------------
// Formula parser.
// ---------------------------------------------------------------------------

class FormulaParser {
 public:
  FormulaParser(Lexer& lx, const SymbolScope& scope) : lx_(lx), scope_(scope) {}

  FormulaP parse() { return parseOr(std::map<std::string, Sort>{}); }

 private:
  using Binders = std::map<std::string, Sort>;

  FormulaP parseOr(Binders b) {
    FormulaP l = parseAnd(b);
    while (lx_.atPunct("||")) {
      lx_.next();
      l = mkOr(l, parseAnd(b));
    }
    return l;
  }

  FormulaP parseAnd(Binders b) {
    FormulaP l = parseUnary(b);
    while (lx_.atPunct("&&")) {
      lx_.next();
      l = mkAnd(l, parseUnary(b));
    }
    return l;
  }

  FormulaP parseUnary(Binders b) {
    if (lx_.atPunct("!")) {
      lx_.next();
      return mkNeg(parseUnary(b));
    }
    if (lx_.atIdent("exists")) {
      lx_.next();
      Sort sort = parseSort(lx_);
      Token v = lx_.expectIdent();
      lx_.expectPunct(".");
      Binders b2 = b;
      b2[v.text] = sort;
      return mkExists(sort, v.text, parseOr(b2));
    }
    if (lx_.atPunct("(")) {
      lx_.next();
      FormulaP f = parseOr(b);
      lx_.expectPunct(")");
      return parseCmpTail(f, b);
    }
    if (lx_.atIdent("top")) {
      lx_.next();
      return mkTop();
    }
    // term [cmpop term]
    TermP t = parseTerm(b);
    return parseCmpOrAtom(t, b);
  }

  // After a parenthesized formula there is never a comparison tail in this
  // grammar (parenthesized terms are not supported); kept as a hook.
  FormulaP parseCmpTail(FormulaP f, Binders&) { return f; }

  FormulaP parseCmpOrAtom(TermP t, Binders& b) {
    struct OpMap {
      const char* tok;
      Formula::Cmp::Op op;
      bool flip;
      bool negate;
    };
    static const OpMap ops[] = {
        {"==", Formula::Cmp::Op::Eq, false, false},
        {"!=", Formula::Cmp::Op::Eq, false, true},
        {">=", Formula::Cmp::Op::Geq, false, false},
        {">", Formula::Cmp::Op::Gt, false, false},
        {"<=", Formula::Cmp::Op::Geq, true, false},
        {"<", Formula::Cmp::Op::Gt, true, false},
    };
    for (const auto& om : ops) {
      if (!lx_.atPunct(om.tok)) continue;
      // In an angle-delimited formula a trailing '>' closes the bracket;
      // treat it as a comparison only when a term can follow.
      if (std::string(om.tok) == ">") {
        Lexer probe = lx_;
        probe.next();
        const Token& t2 = probe.peek();
        bool startsTerm = t2.kind == Token::K::Int || t2.kind == Token::K::Ident ||
                          (t2.kind == Token::K::Punct && (t2.text == "-" || t2.text == "["));
        if (!startsTerm) continue;
      }
      lx_.next();
      TermP r = parseTerm(b);
      FormulaP f = om.flip ? mkCmp(om.op, r, t) : mkCmp(om.op, t, r);
      return om.negate ? mkNeg(f) : f;
    }
    return mkBoolAtom(t);
  }

  TermP parseTerm(Binders& b) {
    TermP l = parseFactor(b);
    while (lx_.atPunct("+") || lx_.atPunct("-")) {
      std::string op = lx_.next().text;
      l = mkFn(op, {l, parseFactor(b)});
    }
    return l;
  }

  TermP parseFactor(Binders& b) {
    TermP l = parsePrimary(b);
    while (lx_.atPunct("*")) {
      lx_.next();
      l = mkFn("*", {l, parsePrimary(b)});
    }
    return l;
  }

  TermP parsePrimary(Binders& b) {
    const Token& t = lx_.peek();
    if (t.kind == Token::K::Int) return mkLit(lx_.next().value);
    if (lx_.atPunct("-")) {
      lx_.next();
      Token n = lx_.next();
      if (n.kind != Token::K::Int) throw ParseError("expected integer after '-'", n.loc);
      return mkLit(-n.value);
    }
    if (lx_.atPunct("[")) {
      lx_.next();
      ListVal lv;
      if (!lx_.atPunct("]")) {
        for (;;) {
          bool neg = false;
          if (lx_.atPunct("-")) {
            lx_.next();
            neg = true;
          }
          Token n = lx_.next();
          if (n.kind != Token::K::Int) throw ParseError("expected integer in list", n.loc);
          lv.elems.push_back(neg ? -n.value : n.value);
          if (lx_.atPunct(",")) {
            lx_.next();
            continue;
          }
          break;
        }
      }
      lx_.expectPunct("]");
      return mkLit(lv);
    }
    if (t.kind != Token::K::Ident) lx_.fail("expected a term");
    Token id = lx_.next();
    if (id.text == "true") return mkLit(true);
    if (id.text == "false") return mkLit(false);
    if (id.text == "unit") return mkLit(Unit{});
    if (id.text == "Nil") return mkLit(ListVal{});
    if (id.text == "result") return mkResult();
    if (id.text == "length") {
      lx_.expectPunct("(");
      TermP arg = parseTerm(b);
      lx_.expectPunct(")");
      return mkFn("length", {arg});
    }
    if (id.text == "self") {
      lx_.expectPunct(".");
      Token f = lx_.expectIdent();
      if (scope_.selfObject.empty())
        throw ParseError("'self' is not meaningful here", id.loc);
      return mkSelect(mkHeap(), scope_.selfObject, f.text);
    }
    if (lx_.atPunct(".")) {  // X.f
      lx_.next();
      Token f = lx_.expectIdent();
      return mkSelect(mkHeap(), id.text, f.text);
    }
    // Bare name: binder, known symbol, bare field of self, or default.
    auto bit = b.find(id.text);
    if (bit != b.end()) return mkVar(id.text, bit->second, VarRole::Logical);
    auto sit = scope_.names.find(id.text);
    if (sit != scope_.names.end())
      return mkVar(id.text, sit->second.sort, sit->second.role, sit->second.owner);
    return mkVar(id.text, Sort::Unknown, scope_.defaultRole, scope_.defaultOwner);
  }

  Lexer& lx_;
  const SymbolScope& scope_;
};

FormulaP parseFormulaWith(Lexer& lx, const SymbolScope& scope) {
  return FormulaParser(lx, scope).parse();
}

// ---------------------------------------------------------------------------
// Program parser.
// ---------------------------------------------------------------------------

class ProgramParser {
 public:
  explicit ProgramParser(Lexer& lx) : lx_(lx) {}

  Program parse() {
    Program p;
    while (!lx_.eof()) {
      if (lx_.atIdent("object")) {
        p.objects.push_back(parseObject());
      } else if (lx_.atIdent("main")) {
        Token m = lx_.next();
        p.mainLoc = m.loc;
        lx_.expectPunct("{");
        Token callee = lx_.expectIdent();
        lx_.expectPunct("!");
        Token method = lx_.expectIdent();
        lx_.expectPunct("(");
        if (!lx_.atPunct(")")) {
          for (;;) {
            p.mainArgs.push_back(parseExpr());
            if (lx_.atPunct(",")) {
              lx_.next();
              continue;
            }
            break;
          }
        }
        lx_.expectPunct(")");
        lx_.expectPunct(";");
        lx_.expectPunct("}");
        p.mainCallee = callee.text;
        p.mainMethod = method.text;
      } else {
        lx_.fail("expected 'object' or 'main'");
      }
    }
    if (p.mainCallee.empty()) throw ParseError("missing main block", SrcLoc{1, 1});
    validate(p);
    return p;
  }

 private:
  ObjectDecl parseObject() {
    ObjectDecl o;
    o.loc = lx_.next().loc;  // 'object'
    o.name = lx_.expectIdent().text;
    lx_.expectPunct("{");
    while (!lx_.atPunct("}")) {
      // Both "T name = e;" (field) and "T name(...){...}" (method) start with
      // a type and a name; disambiguate on the following token.
      Type ty = parseType(lx_);
      Token name = lx_.expectIdent();
      if (lx_.atPunct("=")) {
        lx_.next();
        ExprP init = parseExpr();
        lx_.expectPunct(";");
        o.fields.push_back(FieldDecl{ty, name.text, init, name.loc});
      } else if (lx_.atPunct("(")) {
        o.methods.push_back(parseMethodRest(ty, name));
      } else {
        lx_.fail("expected '=' (field) or '(' (method)");
      }
    }
    lx_.expectPunct("}");
    return o;
  }

  MethodDecl parseMethodRest(Type retType, const Token& name) {
    MethodDecl m;
    m.retType = retType;
    m.name = name.text;
    m.loc = name.loc;
    lx_.expectPunct("(");
    if (!lx_.atPunct(")")) {
      for (;;) {
        Type pt = parseType(lx_);
        Token pn = lx_.expectIdent();
        m.params.emplace_back(pt, pn.text);
        if (lx_.atPunct(",")) {
          lx_.next();
          continue;
        }
        break;
      }
    }
    lx_.expectPunct(")");
    m.body = parseBlock();
    return m;
  }

  StmtP parseBlock() {
    lx_.expectPunct("{");
    std::vector<StmtP> stmts;
    while (!lx_.atPunct("}")) stmts.push_back(parseStmt());
    lx_.expectPunct("}");
    return listToSeq(stmts);
  }

  StmtP parseStmt() {
    SrcLoc loc = lx_.peek().loc;
    if (lx_.atIdent("skip")) {
      lx_.next();
      lx_.expectPunct(";");
      return mkStmt(Stmt::Skip{}, loc);
    }
    if (lx_.atIdent("return")) {
      lx_.next();
      ExprP e = parseExpr();
      lx_.expectPunct(";");
      return mkStmt(Stmt::Return{e}, loc);
    }
    if (lx_.atIdent("if")) {
      lx_.next();
      lx_.expectPunct("(");
      ExprP g = parseExpr();
      lx_.expectPunct(")");
      StmtP thenS = parseBlock();
      StmtP elseS = mkStmt(Stmt::Skip{}, loc);
      if (lx_.atIdent("else")) {
        lx_.next();
        elseS = parseBlock();
      }
      return mkStmt(Stmt::If{g, thenS, elseS}, loc);
    }
    if (lx_.atIdent("while")) {
      lx_.next();
      lx_.expectPunct("(");
      ExprP g = parseExpr();
      lx_.expectPunct(")");
      StmtP body = parseBlock();
      return mkStmt(Stmt::While{g, body}, loc);
    }
    if (lx_.atIdent("this")) {
      lx_.next();
      lx_.expectPunct(".");
      Token f = lx_.expectIdent();
      lx_.expectPunct("=");
      StmtP s = parseRhs(std::nullopt, f.text, /*fieldTarget=*/true, loc);
      lx_.expectPunct(";");
      return s;
    }
    // Either "Type x = rhs;", "x = rhs;" or "X!m(args);".
    Token first = lx_.expectIdent();
    if (lx_.atPunct("!")) {
      lx_.next();
      Token method = lx_.expectIdent();
      Stmt::Call call{};
      call.callee = first.text;
      call.method = method.text;
      call.args = parseArgs();
      lx_.expectPunct(";");
      return mkStmt(std::move(call), loc);
    }
    std::optional<Type> declType;
    std::string target;
    if (lx_.atPunct("=")) {
      target = first.text;
    } else {
      // first was a type name
      Type ty = reparseType(first);
      Token name = lx_.expectIdent();
      declType = ty;
      target = name.text;
    }
    lx_.expectPunct("=");
    StmtP s = parseRhs(declType, target, /*fieldTarget=*/false, loc);
    lx_.expectPunct(";");
    return s;
  }

  Type reparseType(const Token& first) {
    if (first.text == "Int") return Type::intT();
    if (first.text == "Bool") return Type::boolT();
    if (first.text == "Unit") return Type::unitT();
    if (first.text == "List") {
      lx_.expectPunct("<");
      lx_.expectKeyword("Int");
      lx_.expectPunct(">");
      return Type::listT();
    }
    if (first.text == "Fut") {
      lx_.expectPunct("<");
      Type inner = parseType(lx_);
      lx_.expectPunct(">");
      return Type::futT(inner);
    }
    throw ParseError("expected a type or '=' after '" + first.text + "'", first.loc);
  }

  StmtP parseRhs(std::optional<Type> declType, const std::string& target, bool fieldTarget,
                 SrcLoc loc) {
    // Call rhs: IDENT ! m(args)
    if (lx_.peek().kind == Token::K::Ident) {
      Lexer probe = lx_;  // cheap copy: lexer holds a reference + offsets
      Token id = probe.next();
      if (probe.atPunct("!")) {
        lx_.next();
        lx_.expectPunct("!");
        Token method = lx_.expectIdent();
        Stmt::Call call{};
        call.declType = declType;
        call.target = target;
        call.fieldTarget = fieldTarget;
        call.callee = id.text;
        call.method = method.text;
        call.args = parseArgs();
        return mkStmt(std::move(call), loc);
      }
    }
    ExprP e = parseExpr();
    if (lx_.atPunct(".")) {
      lx_.next();
      lx_.expectKeyword("get");
      return mkStmt(Stmt::Get{declType, fieldTarget, target, e}, loc);
    }
    return mkStmt(Stmt::Assign{declType, fieldTarget, target, e}, loc);
  }

  std::vector<ExprP> parseArgs() {
    lx_.expectPunct("(");
    std::vector<ExprP> args;
    if (!lx_.atPunct(")")) {
      for (;;) {
        args.push_back(parseExpr());
        if (lx_.atPunct(",")) {
          lx_.next();
          continue;
        }
        break;
      }
    }
    lx_.expectPunct(")");
    return args;
  }

  // Expression precedence: || < && < ! < cmp < +- < * < primary.
  ExprP parseExpr() { return parseOrE(); }

  ExprP parseOrE() {
    ExprP l = parseAndE();
    while (lx_.atPunct("||")) {
      SrcLoc loc = lx_.next().loc;
      l = mkExpr(Expr::Bin{"||", l, parseAndE()}, loc);
    }
    return l;
  }
  ExprP parseAndE() {
    ExprP l = parseNotE();
    while (lx_.atPunct("&&")) {
      SrcLoc loc = lx_.next().loc;
      l = mkExpr(Expr::Bin{"&&", l, parseNotE()}, loc);
    }
    return l;
  }
  ExprP parseNotE() {
    if (lx_.atPunct("!")) {
      SrcLoc loc = lx_.next().loc;
      return mkExpr(Expr::Not{parseNotE()}, loc);
    }
    return parseCmpE();
  }
  ExprP parseCmpE() {
    ExprP l = parseAddE();
    static const char* cmps[] = {"==", "!=", "<=", ">=", "<", ">"};
    for (const char* c : cmps) {
      if (lx_.atPunct(c)) {
        SrcLoc loc = lx_.next().loc;
        return mkExpr(Expr::Bin{c, l, parseAddE()}, loc);
      }
    }
    return l;
  }
  ExprP parseAddE() {
    ExprP l = parseMulE();
    while (lx_.atPunct("+") || lx_.atPunct("-")) {
      Token t = lx_.next();
      l = mkExpr(Expr::Bin{t.text, l, parseMulE()}, t.loc);
    }
    return l;
  }
  ExprP parseMulE() {
    ExprP l = parsePrimE();
    while (lx_.atPunct("*")) {
      SrcLoc loc = lx_.next().loc;
      l = mkExpr(Expr::Bin{"*", l, parsePrimE()}, loc);
    }
    return l;
  }
  ExprP parsePrimE() {
    const Token& t = lx_.peek();
    SrcLoc loc = t.loc;
    if (t.kind == Token::K::Int) return mkExpr(Expr::Lit{lx_.next().value}, loc);
    if (lx_.atPunct("-")) {
      lx_.next();
      Token n = lx_.next();
      if (n.kind != Token::K::Int) throw ParseError("expected integer after '-'", n.loc);
      return mkExpr(Expr::Lit{-n.value}, loc);
    }
    if (lx_.atPunct("(")) {
      lx_.next();
      ExprP e = parseExpr();
      lx_.expectPunct(")");
      return e;
    }
    if (lx_.atPunct("[")) {
      lx_.next();
      ListVal lv;
      if (!lx_.atPunct("]")) {
        for (;;) {
          bool neg = lx_.atPunct("-");
          if (neg) lx_.next();
          Token n = lx_.next();
          if (n.kind != Token::K::Int) throw ParseError("expected integer in list", n.loc);
          lv.elems.push_back(neg ? -n.value : n.value);
          if (lx_.atPunct(",")) {
            lx_.next();
            continue;
          }
          break;
        }
      }
      lx_.expectPunct("]");
      return mkExpr(Expr::Lit{lv}, loc);
    }
    if (t.kind != Token::K::Ident) lx_.fail("expected expression");
    Token id = lx_.next();
    if (id.text == "true") return mkExpr(Expr::Lit{true}, loc);
    if (id.text == "false") return mkExpr(Expr::Lit{false}, loc);
    if (id.text == "unit") return mkExpr(Expr::Lit{Unit{}}, loc);
    if (id.text == "Nil") return mkExpr(Expr::Lit{ListVal{}}, loc);
    if (id.text == "length") {
      lx_.expectPunct("(");
      ExprP e = parseExpr();
      lx_.expectPunct(")");
      return mkExpr(Expr::Length{e}, loc);
    }
    if (id.text == "this") {
      lx_.expectPunct(".");
      Token f = lx_.expectIdent();
      return mkExpr(Expr::FieldRef{f.text}, loc);
    }
    return mkExpr(Expr::VarRef{id.text}, loc);
  }

  // -------------------------------------------------------------------------
  // Validation (type-lite): names, references, return position, future types.
  // -------------------------------------------------------------------------
  void validate(const Program& p) {
    std::set<std::string> objNames;
    for (const auto& o : p.objects) {
      if (!objNames.insert(o.name).second)
        throw ParseError("duplicate object name '" + o.name + "'", o.loc);
      std::set<std::string> methodNames;
      for (const auto& m : o.methods)
        if (!methodNames.insert(m.name).second)
          throw ParseError("duplicate method '" + o.name + "." + m.name + "'", m.loc);
      std::set<std::string> fieldNames;
      for (const auto& f : o.fields)
        if (!fieldNames.insert(f.name).second)
          throw ParseError("duplicate field '" + o.name + "." + f.name + "'", f.loc);
    }
    if (!p.object(p.mainCallee))
      throw ParseError("unresolved reference: main calls undeclared object '" +
                           p.mainCallee + "'",
                       p.mainLoc);
    const MethodDecl* mm = p.method(p.mainCallee, p.mainMethod);
    if (!mm)
      throw ParseError("unresolved reference: main calls undeclared method '" +
                           p.mainCallee + "." + p.mainMethod + "'",
                       p.mainLoc);
    if (mm->params.size() != p.mainArgs.size())
      throw ParseError("main call arity mismatch for '" + p.mainCallee + "." +
                           p.mainMethod + "'",
                       p.mainLoc);
    for (const auto& o : p.objects) {
      for (const auto& f : o.fields) checkClosedExpr(f.init);
      for (const auto& m : o.methods) validateMethod(p, o, m);
    }
    for (const auto& a : p.mainArgs) checkClosedExpr(a);
  }

  // Field initializers and main arguments evaluate before any process runs.
  void checkClosedExpr(const ExprP& e) {
    if (!e) return;
    if (e->as<Expr::VarRef>() || e->as<Expr::FieldRef>())
      throw ParseError("initializer must not reference variables or fields", e->loc);
    if (const auto* b = e->as<Expr::Bin>()) {
      checkClosedExpr(b->l);
      checkClosedExpr(b->r);
    } else if (const auto* n = e->as<Expr::Not>()) {
      checkClosedExpr(n->e);
    } else if (const auto* l = e->as<Expr::Length>()) {
      checkClosedExpr(l->e);
    }
  }

  void validateMethod(const Program& p, const ObjectDecl& o, const MethodDecl& m) {
    // Locals in scope: params plus declarations seen so far.
    std::map<std::string, Type> locals;
    for (const auto& pr : m.params) locals[pr.second] = pr.first;
    int returns = 0;
    std::function<void(const StmtP&, bool)> walk = [&](const StmtP& s, bool finalPos) {
      std::vector<StmtP> list = seqToList(s);
      for (size_t i = 0; i < list.size(); ++i) {
        const StmtP& st = list[i];
        bool last = finalPos && i + 1 == list.size();
        if (const auto* r = st->as<Stmt::Return>()) {
          checkExpr(p, o, locals, r->expr);
          ++returns;
          if (!last)
            throw ParseError("return must be the final statement of '" + o.name + "." +
                                 m.name + "'",
                             st->loc);
          continue;
        }
        if (const auto* a = st->as<Stmt::Assign>()) {
          checkExpr(p, o, locals, a->expr);
          checkTarget(p, o, locals, a->declType, a->target, a->fieldTarget, st->loc);
          continue;
        }
        if (const auto* c = st->as<Stmt::Call>()) {
          const ObjectDecl* callee = p.object(c->callee);
          if (!callee)
            throw ParseError("unresolved reference: call to undeclared object '" +
                                 c->callee + "'",
                             st->loc);
          const MethodDecl* cm = callee->method(c->method);
          if (!cm)
            throw ParseError("unresolved reference: call to undeclared method '" +
                                 c->callee + "." + c->method + "'",
                             st->loc);
          if (cm->params.size() != c->args.size())
            throw ParseError("arity mismatch calling '" + c->callee + "." + c->method + "'",
                             st->loc);
          for (const auto& a : c->args) checkExpr(p, o, locals, a);
          if (c->target) {
            checkTarget(p, o, locals, c->declType, *c->target, c->fieldTarget, st->loc);
            Type t = targetType(o, locals, *c->target, c->fieldTarget);
            if (!t.isFut())
              throw ParseError("call target '" + *c->target + "' must have a future type",
                               st->loc);
          }
          continue;
        }
        if (const auto* g = st->as<Stmt::Get>()) {
          checkExpr(p, o, locals, g->fut);
          checkTarget(p, o, locals, g->declType, g->target, g->fieldTarget, st->loc);
          Type t = targetType(o, locals, g->target, g->fieldTarget);
          if (t.isFut())
            throw ParseError("get target '" + g->target + "' must not have a future type",
                             st->loc);
          continue;
        }
        if (const auto* f = st->as<Stmt::If>()) {
          checkExpr(p, o, locals, f->guard);
          auto saved = locals;
          walk(f->thenS, last);
          locals = saved;
          walk(f->elseS, last);
          locals = saved;
          continue;
        }
        if (const auto* w = st->as<Stmt::While>()) {
          checkExpr(p, o, locals, w->guard);
          auto saved = locals;
          walk(w->body, false);
          locals = saved;
          continue;
        }
      }
    };
    walk(m.body, true);
    std::vector<StmtP> top = seqToList(m.body);
    if (top.empty() || !top.back()->as<Stmt::Return>()) {
      // Returns inside both if-branches do not satisfy the final-position rule.
      throw ParseError("method '" + o.name + "." + m.name +
                           "' must end with a single return statement",
                       m.loc);
    }
    if (returns != 1)
      throw ParseError("method '" + o.name + "." + m.name +
                           "' must contain exactly one return",
                       m.loc);
  }

  void checkTarget(const Program& p, const ObjectDecl& o, std::map<std::string, Type>& locals,
                   const std::optional<Type>& declType, const std::string& target,
                   bool fieldTarget, SrcLoc loc) {
    if (fieldTarget) {
      if (!o.field(target))
        throw ParseError("unresolved reference: field 'this." + target + "'", loc);
      return;
    }
    if (declType) {
      locals[target] = *declType;
      return;
    }
    if (!locals.count(target))
      throw ParseError("unresolved reference: variable '" + target + "'", loc);
  }

  Type targetType(const ObjectDecl& o, const std::map<std::string, Type>& locals,
                  const std::string& target, bool fieldTarget) {
    if (fieldTarget) {
      const FieldDecl* f = o.field(target);
      return f ? f->type : Type::intT();
    }
    auto it = locals.find(target);
    return it != locals.end() ? it->second : Type::intT();
  }

  void checkExpr(const Program& p, const ObjectDecl& o, const std::map<std::string, Type>& locals,
                 const ExprP& e) {
    if (!e) return;
    if (const auto* v = e->as<Expr::VarRef>()) {
      if (!locals.count(v->name))
        throw ParseError("unresolved reference: variable '" + v->name + "'", e->loc);
    } else if (const auto* f = e->as<Expr::FieldRef>()) {
      if (!o.field(f->name))
        throw ParseError("unresolved reference: field 'this." + f->name + "'", e->loc);
    } else if (const auto* b = e->as<Expr::Bin>()) {
      checkExpr(p, o, locals, b->l);
      checkExpr(p, o, locals, b->r);
    } else if (const auto* n = e->as<Expr::Not>()) {
      checkExpr(p, o, locals, n->e);
    } else if (const auto* l = e->as<Expr::Length>()) {
      checkExpr(p, o, locals, l->e);
    }
  }

  Lexer& lx_;
};

}  // namespace

Program parseProgram(const std::string& text) {
  Lexer lx(text);
  return ProgramParser(lx).parse();
}

// ---------------------------------------------------------------------------
// Protocol parser.
// ---------------------------------------------------------------------------
namespace {

class ProtoParser {
 public:
  ProtoParser(Lexer& lx, const Program* prog) : lx_(lx), prog_(prog) {}

  GlobalType parse() {
    GlobalType g;
    g.loc = lx_.peek().loc;
    lx_.expectKeyword("main");
    lx_.expectPunct("->");
    Token callee = lx_.expectIdent();
    lx_.expectPunct(".");
    Token method = lx_.expectIdent();
    g.head.callee = callee.text;
    g.head.method = method.text;
    g.head.params = parseParamNames(callee.text, method.text);
    registerParams(callee.text, method.text, g.head.params);
    lx_.expectPunct("{");
    lx_.expectKeyword("post");
    lx_.expectPunct(":");
    g.head.post = parseAnnotation(calleeScope(callee.text, method.text, g.head.params,
                                              /*isPost=*/true));
    lx_.expectPunct("}");
    g.body = parseItems(/*topLevel=*/true);
    return g;
  }

 private:
  GBody parseItems(bool topLevel) {
    GBody items;
    bool done = false;
    while (!done) {
      if (lx_.eof()) lx_.fail("protocol not terminated by 'end'");
      SrcLoc loc = lx_.peek().loc;
      if (lx_.atIdent("end")) {
        lx_.next();
        items.push_back(mkGItem(GItem::End{}, loc));
        done = true;
      } else if (lx_.atIdent("repeat")) {
        lx_.next();
        lx_.expectPunct("{");
        GBody body = parseItemsUntilBrace();
        lx_.expectPunct("}");
        lx_.expectKeyword("invariant");
        FormulaP inv = parseAnnotation(invariantScope());
        if (body.empty())
          throw ParseError("repeat body must be nonempty", loc);
        items.push_back(mkGItem(GItem::Repeat{std::move(body), inv}, loc));
      } else if (lx_.atIdent("choice")) {
        items.push_back(parseChoice(loc));
        done = true;  // choice is terminal; branches carry their own ends
      } else {
        Token first = lx_.expectIdent();
        if (lx_.atIdent("reads")) {
          lx_.next();
          SymbolScope sc;
          sc.defaultOwner = first.text;
          sc.defaultRole = VarRole::CallerSide;
          sc.selfObject = first.text;
          for (const auto& [n, e] : registry_) sc.names[n] = e;
          TermP t = parseLocTerm(sc);
          items.push_back(mkGItem(GItem::Read{first.text, t}, loc));
        } else {
          items.push_back(parseCall(first, loc));
        }
      }
    }
    return items;
  }

  GBody parseItemsUntilBrace() {
    GBody items;
    while (!lx_.atPunct("}")) {
      if (lx_.eof()) lx_.fail("unterminated block");
      SrcLoc loc = lx_.peek().loc;
      if (lx_.atIdent("end")) {
        lx_.next();
        items.push_back(mkGItem(GItem::End{}, loc));
        continue;
      }
      if (lx_.atIdent("repeat")) {
        lx_.next();
        lx_.expectPunct("{");
        GBody body = parseItemsUntilBrace();
        lx_.expectPunct("}");
        lx_.expectKeyword("invariant");
        FormulaP inv = parseAnnotation(invariantScope());
        items.push_back(mkGItem(GItem::Repeat{std::move(body), inv}, loc));
        continue;
      }
      Token first = lx_.expectIdent();
      if (lx_.atIdent("reads")) {
        lx_.next();
        SymbolScope sc;
        sc.defaultOwner = first.text;
        sc.defaultRole = VarRole::CallerSide;
        sc.selfObject = first.text;
        for (const auto& [n, e] : registry_) sc.names[n] = e;
        TermP t = parseLocTerm(sc);
        items.push_back(mkGItem(GItem::Read{first.text, t}, loc));
        continue;
      }
      items.push_back(parseCall(first, loc));
    }
    return items;
  }

  GItemP parseCall(const Token& caller, SrcLoc loc) {
    GItem::Call call{};
    call.caller = caller.text;
    if (lx_.atPunct("-[")) {
      lx_.next();
      Token locName = lx_.expectIdent();
      lx_.expectPunct("]->");
      call.loc = locName.text;
      registry_[locName.text] =
          SymbolScope::Entry{caller.text, VarRole::CallerSide, Sort::Fut};
    } else {
      lx_.expectPunct("->");
    }
    Token callee = lx_.expectIdent();
    lx_.expectPunct(".");
    Token method = lx_.expectIdent();
    call.callee = callee.text;
    call.method = method.text;
    call.params = parseParamNames(callee.text, method.text);
    registerParams(callee.text, method.text, call.params);
    call.pre = mkTop();
    call.post = mkTop();
    lx_.expectPunct("{");
    bool any = false;
    while (!lx_.atPunct("}")) {
      if (any) lx_.expectPunct(",");
      Token kw = lx_.expectIdent();
      lx_.expectPunct(":");
      if (kw.text == "pre") {
        call.pre = parseAnnotation(
            calleeScope(callee.text, method.text, call.params, /*isPost=*/false));
      } else if (kw.text == "post") {
        call.post = parseAnnotation(
            calleeScope(callee.text, method.text, call.params, /*isPost=*/true));
      } else {
        throw ParseError("expected 'pre' or 'post'", kw.loc);
      }
      any = true;
    }
    lx_.expectPunct("}");
    return mkGItem(std::move(call), loc);
  }

  GItemP parseChoice(SrcLoc loc) {
    lx_.expectKeyword("choice");
    Token chooser = lx_.expectIdent();
    GItem::Choice ch;
    ch.chooser = chooser.text;
    lx_.expectPunct("{");
    while (!lx_.atPunct("}")) {
      lx_.expectKeyword("branch");
      lx_.expectPunct("{");
      GItem::Choice::Branch br;
      lx_.expectKeyword("post");
      lx_.expectPunct(":");
      br.post = parseAnnotation(chooserScope(chooser.text));
      if (lx_.atPunct(",")) {
        lx_.next();
        lx_.expectKeyword("reacts");
        lx_.expectPunct(":");
        lx_.expectPunct("[");
        while (!lx_.atPunct("]")) {
          Token obj = lx_.expectIdent();
          lx_.expectPunct("{");
          lx_.expectKeyword("post");
          lx_.expectPunct(":");
          FormulaP f = parseAnnotation(chooserScope(obj.text));
          lx_.expectPunct("}");
          br.reacts.emplace_back(obj.text, f);
          if (lx_.atPunct(",")) lx_.next();
        }
        lx_.expectPunct("]");
      }
      lx_.expectPunct("}");
      lx_.expectPunct("=>");
      lx_.expectPunct("{");
      br.body = parseItemsUntilBrace();
      lx_.expectPunct("}");
      ch.branches.push_back(std::move(br));
    }
    lx_.expectPunct("}");
    if (ch.branches.empty()) throw ParseError("choice must have at least one branch", loc);
    return mkGItem(std::move(ch), loc);
  }

  std::vector<std::string> parseParamNames(const std::string& obj, const std::string& method) {
    std::vector<std::string> names;
    if (lx_.atPunct("(")) {
      lx_.next();
      while (!lx_.atPunct(")")) {
        names.push_back(lx_.expectIdent().text);
        if (lx_.atPunct(",")) lx_.next();
      }
      lx_.expectPunct(")");
    } else if (prog_) {
      if (const MethodDecl* m = prog_->method(obj, method)) {
        for (const auto& p : m->params) names.push_back(p.second);
      }
    }
    return names;
  }

  void registerParams(const std::string& obj, const std::string& method,
                      const std::vector<std::string>& names) {
    for (size_t i = 0; i < names.size(); ++i) {
      Sort s = Sort::Unknown;
      if (prog_) {
        if (const MethodDecl* m = prog_->method(obj, method)) {
          if (i < m->params.size()) s = m->params[i].first.sort();
        }
      }
      registry_[names[i]] = SymbolScope::Entry{obj, VarRole::CallerSide, s};
    }
  }

  // Scope for a call annotation: the callee's params are callee-owned; every
  // other registered name resolves to its registered owner; unknown bare
  // names default to callee params.
  SymbolScope calleeScope(const std::string& callee, const std::string& method,
                          const std::vector<std::string>& params, bool isPost) {
    SymbolScope sc;
    sc.defaultOwner = callee;
    sc.defaultRole = VarRole::CalleeParam;
    for (const auto& [n, e] : registry_) sc.names[n] = e;
    for (size_t i = 0; i < params.size(); ++i) {
      Sort s = Sort::Unknown;
      if (prog_) {
        if (const MethodDecl* m = prog_->method(callee, method)) {
          if (i < m->params.size()) s = m->params[i].first.sort();
        }
      }
      sc.names[params[i]] = SymbolScope::Entry{callee, VarRole::CalleeParam, s};
    }
    (void)isPost;
    return sc;
  }

  SymbolScope chooserScope(const std::string& obj) {
    SymbolScope sc;
    sc.defaultOwner = obj;
    sc.defaultRole = VarRole::CallerSide;
    for (const auto& [n, e] : registry_) sc.names[n] = e;
    return sc;
  }

  SymbolScope invariantScope() {
    SymbolScope sc;
    for (const auto& [n, e] : registry_) sc.names[n] = e;
    return sc;
  }

  FormulaP parseAnnotation(const SymbolScope& sc) {
    FormulaP f = parseFormulaWith(lx_, sc);
    if (containsModal(f))
      throw ParseError("modalities are not allowed in protocol annotations",
                       lx_.peek().loc);
    return f;
  }

  TermP parseLocTerm(const SymbolScope& sc) {
    // Location expressions are plain terms (a variable or X.f / self.f).
    Token id = lx_.expectIdent();
    if (id.text == "self" || (prog_ && prog_->object(id.text)) || lx_.atPunct(".")) {
      if (lx_.atPunct(".")) {
        lx_.next();
        Token f = lx_.expectIdent();
        std::string obj = id.text == "self" ? sc.selfObject : id.text;
        return mkSelect(mkHeap(), obj, f.text);
      }
    }
    auto it = sc.names.find(id.text);
    if (it != sc.names.end())
      return mkVar(id.text, it->second.sort, it->second.role, it->second.owner);
    return mkVar(id.text, Sort::Fut, sc.defaultRole, sc.defaultOwner);
  }

  Lexer& lx_;
  const Program* prog_;
  std::map<std::string, SymbolScope::Entry> registry_;
};

}  // namespace

GlobalType parseGlobalType(const std::string& text, const Program* prog) {
  Lexer lx(text);
  ProtoParser pp(lx, prog);
  GlobalType g = pp.parse();
  if (!lx.eof()) lx.fail("unexpected trailing input after protocol end");
  return g;
}

std::set<std::string> GlobalType::roles() const {
  std::set<std::string> out;
  out.insert(head.callee);
  std::function<void(const GBody&)> walk = [&](const GBody& items) {
    for (const auto& it : items) {
      if (const auto* c = it->as<GItem::Call>()) {
        out.insert(c->caller);
        out.insert(c->callee);
      } else if (const auto* r = it->as<GItem::Read>()) {
        out.insert(r->object);
      } else if (const auto* rp = it->as<GItem::Repeat>()) {
        walk(rp->body);
      } else if (const auto* ch = it->as<GItem::Choice>()) {
        out.insert(ch->chooser);
        for (const auto& br : ch->branches) {
          for (const auto& [obj, f] : br.reacts) out.insert(obj);
          walk(br.body);
        }
      }
    }
  };
  walk(body);
  return out;
}

// ---------------------------------------------------------------------------
// Local type parser (round-trips with prettyLocal).
// ---------------------------------------------------------------------------
namespace {

class LocalTypeParser {
 public:
  LocalTypeParser(Lexer& lx, const std::string& object) : lx_(lx), object_(object) {}

  LocalType parse() {
    LocalType t;
    t.object = object_;
    t.items = parseBody();
    return t;
  }

 private:
  LBody parseBody() {
    LBody items;
    for (;;) {
      items.push_back(parseItem());
      if (lx_.atPunct(".")) {
        lx_.next();
        continue;
      }
      break;
    }
    return items;
  }

  SymbolScope scope() const {
    SymbolScope sc;
    sc.selfObject = object_;
    sc.defaultOwner = object_;
    sc.defaultRole = VarRole::CalleeParam;
    return sc;
  }

  FormulaP parseAngleFormula() {
    lx_.expectPunct("<");
    SymbolScope sc = scope();
    FormulaP f = parseFormulaWith(lx_, sc);
    lx_.expectPunct(">");
    return f;
  }

  LItemP parseItem() {
    if (lx_.atIdent("end")) {
      lx_.next();
      return mkLItem(LItem::End{});
    }
    if (lx_.atIdent("skip")) {
      lx_.next();
      return mkLItem(LItem::SkipI{});
    }
    if (lx_.atIdent("Put")) {
      lx_.next();
      return mkLItem(LItem::Put{parseAngleFormula()});
    }
    if (lx_.atIdent("Read")) {
      lx_.next();
      lx_.expectPunct("<");
      SymbolScope sc = scope();
      TermP t = parseReadLoc(sc);
      lx_.expectPunct(">");
      return mkLItem(LItem::Read{t});
    }
    if (lx_.atPunct("(")) {  // repeat
      lx_.next();
      LBody body = parseBody();
      lx_.expectPunct(")*");
      FormulaP inv = parseAngleFormula();
      return mkLItem(LItem::Repeat{std::move(body), inv});
    }
    if (lx_.atPunct("+")) {  // select
      lx_.next();
      lx_.expectPunct("{");
      LItem::Select sel;
      sel.branches.push_back(parseBody());
      while (lx_.atPunct("|")) {
        lx_.next();
        sel.branches.push_back(parseBody());
      }
      lx_.expectPunct("}");
      return mkLItem(std::move(sel));
    }
    if (lx_.atPunct("&")) {  // offer
      lx_.next();
      lx_.expectPunct("{");
      LItem::Offer off;
      for (;;) {
        Token obj = lx_.expectIdent();
        lx_.expectPunct(".");
        Token m = lx_.expectIdent();
        off.srcObject = obj.text;
        off.srcMethod = m.text;
        FormulaP guard = parseAngleFormula();
        lx_.expectPunct(";");
        LBody body = parseBody();
        off.branches.push_back(LItem::Offer::Branch{guard, std::move(body)});
        if (lx_.atPunct("|")) {
          lx_.next();
          continue;
        }
        break;
      }
      lx_.expectPunct("}");
      return mkLItem(std::move(off));
    }
    // receive m?<φ> or send X!m[x]<φ>
    Token first = lx_.expectIdent();
    if (lx_.atPunct("?")) {
      lx_.next();
      return mkLItem(LItem::Receive{first.text, parseAngleFormula()});
    }
    if (lx_.atPunct("!")) {
      lx_.next();
      Token m = lx_.expectIdent();
      LItem::Send send;
      send.callee = first.text;
      send.method = m.text;
      if (lx_.atPunct("[")) {
        lx_.next();
        send.loc = lx_.expectIdent().text;
        lx_.expectPunct("]");
      }
      send.pre = parseAngleFormula();
      return mkLItem(std::move(send));
    }
    lx_.fail("expected a local type item");
  }

  TermP parseReadLoc(const SymbolScope& sc) {
    Token id = lx_.expectIdent();
    if (id.text == "self") {
      lx_.expectPunct(".");
      Token f = lx_.expectIdent();
      return mkSelect(mkHeap(), object_, f.text);
    }
    if (lx_.atPunct(".")) {
      lx_.next();
      Token f = lx_.expectIdent();
      return mkSelect(mkHeap(), id.text, f.text);
    }
    return mkVar(id.text, Sort::Fut, sc.defaultRole, sc.defaultOwner);
  }

  Lexer& lx_;
  std::string object_;
};

}  // namespace

LocalType parseLocalType(const std::string& text, const std::string& object) {
  Lexer lx(text);
  LocalTypeParser p(lx, object);
  LocalType t = p.parse();
  if (!lx.eof()) lx.fail("unexpected trailing input after local type");
  return t;
}

FormulaP parseFormula(const std::string& text, const SymbolScope& scope) {
  Lexer lx(text);
  FormulaP f = parseFormulaWith(lx, scope);
  if (!lx.eof()) lx.fail("unexpected trailing input after formula");
  return f;
}

}  // namespace asyncst
