#include "blogc/frontend/parser.hpp"

#include <initializer_list>

namespace blogc::fe {

namespace {

class Parser {
 public:
  explicit Parser(const std::vector<Token>& toks) : toks_(toks) {
    end_.kind = Tok::End;
    if (!toks.empty()) {
      end_.loc = toks.back().loc;
      end_.loc.col += static_cast<int>(toks.back().text.size());
    } else {
      end_.loc = {1, 1};
    }
  }

  Model program() {
    Model m;
    while (peek().kind != Tok::End) declaration(m);
    return m;
  }

 private:
  const Token& peek(std::size_t k = 0) const { return pos_ + k < toks_.size() ? toks_[pos_ + k] : end_; }
  bool at(Tok t) const { return peek().kind == t; }
  const Token& next() {
    const Token& t = peek();
    if (pos_ < toks_.size()) ++pos_;
    return t;
  }
  bool accept(Tok t) {
    if (!at(t)) return false;
    next();
    return true;
  }

  [[noreturn]] void fail(std::initializer_list<Tok> expected) const {
    const Token& t = peek();
    std::string msg = "syntax error at ";
    msg += t.kind == Tok::End ? std::string(tok_name(Tok::End)) : "'" + t.text + "'";
    msg += ", expected ";
    bool first = true;
    for (Tok e : expected) {
      if (!first) msg += " or ";
      first = false;
      msg += tok_name(e);
    }
    throw SyntaxError(t.loc, msg);
  }

  const Token& expect(Tok t) {
    if (!at(t)) fail({t});
    return next();
  }

  void declaration(Model& m) {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Type: {
        next();
        TypeDecl d{expect(Tok::Ident).text, t.loc};
        expect(Tok::Semi);
        m.type_decls.push_back(d);
        return;
      }
      case Tok::Distinct: {
        next();
        DistinctDecl d;
        d.loc = t.loc;
        d.type_name = expect(Tok::Ident).text;
        do {
          std::string name = expect(Tok::Ident).text;
          long long count = -1;
          if (accept(Tok::LBracket)) {
            count = std::stoll(expect(Tok::IntLit).text);
            expect(Tok::RBracket);
          }
          d.names.emplace_back(name, count);
        } while (accept(Tok::Comma));
        expect(Tok::Semi);
        m.distinct_decls.push_back(std::move(d));
        return;
      }
      case Tok::Hash: {
        next();
        NumberStmt s;
        s.loc = t.loc;
        s.type_name = expect(Tok::Ident).text;
        expect(Tok::Tilde);
        s.body = expr();
        expect(Tok::Semi);
        m.number_stmts.push_back(std::move(s));
        return;
      }
      case Tok::Random:
      case Tok::Fixed: {
        next();
        FuncDecl f;
        f.random = t.kind == Tok::Random;
        f.loc = t.loc;
        f.ret_type_name = expect(Tok::Ident).text;
        f.name = expect(Tok::Ident).text;
        if (accept(Tok::LParen)) {
          if (!at(Tok::RParen)) {
            do {
              Param p;
              p.loc = peek().loc;
              p.type_name = expect(Tok::Ident).text;
              p.name = expect(Tok::Ident).text;
              f.params.push_back(p);
            } while (accept(Tok::Comma));
          }
          expect(Tok::RParen);
        }
        expect(f.random ? Tok::Tilde : Tok::Assign);
        f.body = expr();
        expect(Tok::Semi);
        (f.random ? m.random_fns : m.fixed_fns).push_back(std::move(f));
        return;
      }
      case Tok::Obs: {
        next();
        ObsStmt o;
        o.loc = t.loc;
        o.lhs = expr();
        expect(Tok::Assign);
        o.rhs = expr();
        expect(Tok::Semi);
        m.evidence.push_back(std::move(o));
        return;
      }
      case Tok::Query: {
        next();
        QueryStmt q;
        q.loc = t.loc;
        q.expr = expr();
        expect(Tok::Semi);
        m.queries.push_back(std::move(q));
        return;
      }
      default:
        fail({Tok::Type, Tok::Distinct, Tok::Hash, Tok::Random, Tok::Fixed, Tok::Obs, Tok::Query});
    }
  }

  ExprPtr expr() {
    if (at(Tok::If)) return if_expr();
    if (at(Tok::Case)) return case_expr();
    return or_expr();
  }

  ExprPtr if_expr() {
    auto e = make_expr(ExprKind::If, next().loc);
    e->args.push_back(expr());
    expect(Tok::Then);
    e->args.push_back(expr());
    expect(Tok::Else);
    e->args.push_back(expr());
    return e;
  }

  // case s in {v1 -> e1, ..., vk -> ek}  ==>  if s == v1 then e1 else ... else ek
  ExprPtr case_expr() {
    const Loc loc = next().loc;
    ExprPtr scrutinee = expr();
    expect(Tok::In);
    expect(Tok::LBrace);
    std::vector<std::pair<ExprPtr, ExprPtr>> arms;
    do {
      ExprPtr key = or_expr();
      expect(Tok::Arrow);
      ExprPtr val = expr();
      arms.emplace_back(key, val);
    } while (accept(Tok::Comma));
    expect(Tok::RBrace);
    if (arms.size() < 2) throw SyntaxError(loc, "case needs at least two arms");

    ExprPtr tail = arms.back().second;
    for (std::size_t i = arms.size() - 1; i-- > 0;) {
      auto cond = make_expr(ExprKind::Binary, arms[i].first->loc);
      cond->name = "==";
      cond->args = {scrutinee->clone(), arms[i].first};
      auto e = make_expr(ExprKind::If, i == 0 ? loc : arms[i].first->loc);
      e->args = {cond, arms[i].second, tail};
      tail = e;
    }
    for (auto& arm : arms) tail->case_keys.push_back(arm.first->clone());
    return tail;
  }

  ExprPtr binary(const char* op, ExprPtr l, ExprPtr r, Loc loc) {
    auto e = make_expr(ExprKind::Binary, loc);
    e->name = op;
    e->args = {std::move(l), std::move(r)};
    return e;
  }

  ExprPtr or_expr() {
    ExprPtr l = and_expr();
    while (at(Tok::Or)) {
      const Loc loc = next().loc;
      l = binary("|", l, and_expr(), loc);
    }
    return l;
  }

  ExprPtr and_expr() {
    ExprPtr l = cmp_expr();
    while (at(Tok::And)) {
      const Loc loc = next().loc;
      l = binary("&", l, cmp_expr(), loc);
    }
    return l;
  }

  ExprPtr cmp_expr() {
    ExprPtr l = add_expr();
    const char* op = nullptr;
    switch (peek().kind) {
      case Tok::EqEq: op = "=="; break;
      case Tok::NotEq: op = "!="; break;
      case Tok::Lt: op = "<"; break;
      case Tok::Le: op = "<="; break;
      case Tok::Gt: op = ">"; break;
      case Tok::Ge: op = ">="; break;
      default: return l;
    }
    const Loc loc = next().loc;
    return binary(op, l, add_expr(), loc);
  }

  ExprPtr add_expr() {
    ExprPtr l = mul_expr();
    while (at(Tok::Plus) || at(Tok::Minus)) {
      const Token& t = next();
      l = binary(t.kind == Tok::Plus ? "+" : "-", l, mul_expr(), t.loc);
    }
    return l;
  }

  ExprPtr mul_expr() {
    ExprPtr l = unary_expr();
    while (at(Tok::Star) || at(Tok::Slash)) {
      const Token& t = next();
      l = binary(t.kind == Tok::Star ? "*" : "/", l, unary_expr(), t.loc);
    }
    return l;
  }

  ExprPtr unary_expr() {
    if (at(Tok::Minus) || at(Tok::Bang)) {
      const Token& t = next();
      ExprPtr operand = unary_expr();
      if (t.kind == Tok::Minus && operand->kind == ExprKind::Int) {
        operand->ival = -operand->ival;
        operand->loc = t.loc;
        return operand;
      }
      if (t.kind == Tok::Minus && operand->kind == ExprKind::Real) {
        operand->rval = -operand->rval;
        operand->loc = t.loc;
        return operand;
      }
      auto e = make_expr(ExprKind::Unary, t.loc);
      e->name = t.kind == Tok::Minus ? "-" : "!";
      e->args.push_back(operand);
      return e;
    }
    return primary();
  }

  ExprPtr primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::IntLit: {
        next();
        auto e = make_expr(ExprKind::Int, t.loc);
        try {
          e->ival = std::stoll(t.text);
        } catch (const std::exception&) {
          throw SyntaxError(t.loc, "integer literal out of range: " + t.text);
        }
        return e;
      }
      case Tok::RealLit: {
        next();
        auto e = make_expr(ExprKind::Real, t.loc);
        e->rval = std::stod(t.text);
        return e;
      }
      case Tok::True:
      case Tok::False: {
        next();
        auto e = make_expr(ExprKind::Bool, t.loc);
        e->bval = t.kind == Tok::True;
        return e;
      }
      case Tok::LParen: {
        next();
        ExprPtr e = expr();
        expect(Tok::RParen);
        return e;
      }
      case Tok::If:
        return if_expr();
      case Tok::Case:
        return case_expr();
      case Tok::Hash: {
        next();
        auto e = make_expr(ExprKind::Number, t.loc);
        e->name = expect(Tok::Ident).text;
        return e;
      }
      case Tok::LBrace:
        return brace();
      case Tok::Ident: {
        next();
        if (accept(Tok::LParen)) {
          DistKind dk;
          auto e = make_expr(lookup_dist(t.text, dk) ? ExprKind::Dist : ExprKind::Call, t.loc);
          e->name = t.text;
          if (!at(Tok::RParen)) {
            do e->args.push_back(expr());
            while (accept(Tok::Comma));
          }
          expect(Tok::RParen);
          return e;
        }
        if (accept(Tok::LBracket)) {
          auto e = make_expr(ExprKind::Indexed, t.loc);
          e->name = t.text;
          e->ival = std::stoll(expect(Tok::IntLit).text);
          expect(Tok::RBracket);
          return e;
        }
        auto e = make_expr(ExprKind::Name, t.loc);
        e->name = t.text;
        return e;
      }
      default:
        fail({Tok::IntLit, Tok::RealLit, Tok::Ident, Tok::LParen, Tok::LBrace, Tok::Hash, Tok::If, Tok::Case});
    }
  }

  // {T t} or {k -> v, ...}
  ExprPtr brace() {
    const Loc loc = expect(Tok::LBrace).loc;
    if (peek().kind == Tok::Ident && peek(1).kind == Tok::Ident && peek(2).kind == Tok::RBrace) {
      auto e = make_expr(ExprKind::TypeSet, loc);
      e->name = next().text;
      e->var = next().text;
      next();
      return e;
    }
    auto e = make_expr(ExprKind::Map, loc);
    do {
      e->args.push_back(or_expr());
      expect(Tok::Arrow);
      e->args.push_back(expr());
    } while (accept(Tok::Comma));
    expect(Tok::RBrace);
    return e;
  }

  const std::vector<Token>& toks_;
  std::size_t pos_ = 0;
  Token end_;
};

}  // namespace

Model parse(const std::vector<Token>& tokens) { return Parser(tokens).program(); }

Model parse_source(std::string_view source) { return parse(tokenize(source)); }

}  // namespace blogc::fe
