#include <cctype>
#include <charconv>
#include <optional>
#include <string>
#include <string_view>

#include "sblab/expr.hpp"

namespace sblab {

namespace {

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
  Tok kind;
  std::size_t offset;
  std::string text;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    const std::size_t start = pos_;
    if (pos_ >= src_.size()) {
      tok_ = {Tok::End, start, ""};
      return;
    }
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && pos_ + 1 < src_.size() &&
         std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      lex_number(start);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                    src_[pos_] == '_'))
        ++pos_;
      tok_ = {Tok::Ident, start, std::string(src_.substr(start, pos_ - start))};
      return;
    }
    ++pos_;
    switch (c) {
      case '+': tok_ = {Tok::Plus, start, "+"}; return;
      case '-': tok_ = {Tok::Minus, start, "-"}; return;
      case '*': tok_ = {Tok::Star, start, "*"}; return;
      case '/': tok_ = {Tok::Slash, start, "/"}; return;
      case '^': tok_ = {Tok::Caret, start, "^"}; return;
      case '(': tok_ = {Tok::LParen, start, "("}; return;
      case ')': tok_ = {Tok::RParen, start, ")"}; return;
      default:
        throw SyntaxError(start, std::string("unexpected character '") + c + "'");
    }
  }

  void lex_number(std::size_t start) {
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      } else {
        pos_ = mark;  // "2e" is the number 2 followed by identifier "e"
      }
    }
    tok_ = {Tok::Number, start, std::string(src_.substr(start, pos_ - start))};
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  Token tok_{Tok::End, 0, ""};
};

class Parser {
 public:
  explicit Parser(std::string_view src) : lex_(src) {}

  Expr parse() {
    Expr e = expression();
    const Token& t = lex_.peek();
    if (t.kind != Tok::End)
      throw SyntaxError(t.offset, "unexpected trailing input '" + t.text + "'");
    return e;
  }

 private:
  Expr expression() {
    std::vector<Expr> terms;
    terms.push_back(unary_term());
    while (true) {
      const Tok k = lex_.peek().kind;
      if (k == Tok::Plus) {
        lex_.take();
        terms.push_back(term());
      } else if (k == Tok::Minus) {
        lex_.take();
        terms.push_back(Expr::negate(term()));
      } else {
        break;
      }
    }
    return Expr::sum(std::move(terms));
  }

  Expr unary_term() { return term(); }

  Expr term() {
    std::vector<Expr> factors;
    factors.push_back(unary());
    while (true) {
      const Tok k = lex_.peek().kind;
      if (k == Tok::Star) {
        lex_.take();
        factors.push_back(unary());
      } else if (k == Tok::Slash) {
        lex_.take();
        Expr lhs = Expr::product(std::move(factors));
        Expr rhs = unary();
        factors.clear();
        factors.push_back(Expr::quotient(std::move(lhs), std::move(rhs)));
      } else {
        break;
      }
    }
    return Expr::product(std::move(factors));
  }

  Expr unary() {
    if (lex_.peek().kind == Tok::Minus) {
      lex_.take();
      return Expr::negate(unary());
    }
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (lex_.peek().kind == Tok::Caret) {
      lex_.take();
      return Expr::pow(std::move(base), exponent());
    }
    return base;
  }

  Rational exponent() {
    // Rational literal: [-]number, or ([-]number[/number]).
    bool wrapped = false;
    if (lex_.peek().kind == Tok::LParen) {
      lex_.take();
      wrapped = true;
    }
    bool negative = false;
    if (lex_.peek().kind == Tok::Minus) {
      lex_.take();
      negative = true;
    }
    Token num = expect(Tok::Number, "rational literal exponent");
    Rational r = rational_of(num);
    if (wrapped && lex_.peek().kind == Tok::Slash) {
      lex_.take();
      Token den = expect(Tok::Number, "integer denominator");
      Rational d = rational_of(den);
      if (!r.is_integer() || !d.is_integer() || d.num == 0)
        throw SyntaxError(den.offset, "exponent fraction must be integer/integer");
      r = Rational(r.num, d.num);
    }
    if (negative) r = Rational(-r.num, r.den);
    if (wrapped) expect(Tok::RParen, "')'");
    return r;
  }

  static Rational rational_of(const Token& t) {
    try {
      return Rational::from_decimal(t.text);
    } catch (const Error& e) {
      throw SyntaxError(t.offset, e.what());
    }
  }

  Expr primary() {
    Token t = lex_.take();
    switch (t.kind) {
      case Tok::Number: {
        double v = 0.0;
        auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (res.ec != std::errc() || res.ptr != t.text.data() + t.text.size())
          throw SyntaxError(t.offset, "bad numeric literal '" + t.text + "'");
        return Expr::constant(v);
      }
      case Tok::Ident: {
        if (lex_.peek().kind == Tok::LParen) {
          std::optional<FuncKind> f = lookup_function(t.text);
          if (!f) throw UnknownFunctionError(t.offset, t.text);
          lex_.take();
          Expr arg = expression();
          expect(Tok::RParen, "')'");
          return Expr::apply(*f, std::move(arg));
        }
        return Expr::variable(t.text);
      }
      case Tok::LParen: {
        Expr e = expression();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::Minus:
        // Reachable only via exponent mis-parse; treat as ordinary unary.
        return Expr::negate(unary());
      default:
        throw SyntaxError(t.offset, t.kind == Tok::End ? "unexpected end of input"
                                                       : "unexpected '" + t.text + "'");
    }
  }

  static std::optional<FuncKind> lookup_function(const std::string& name) {
    if (name == "exp") return FuncKind::Exp;
    if (name == "ln") return FuncKind::Ln;
    if (name == "sqrt") return FuncKind::Sqrt;
    if (name == "sin") return FuncKind::Sin;
    if (name == "cos") return FuncKind::Cos;
    if (name == "tanh") return FuncKind::Tanh;
    return std::nullopt;
  }

  Token expect(Tok kind, const std::string& what) {
    const Token& t = lex_.peek();
    if (t.kind != kind)
      throw SyntaxError(t.offset, "expected " + what +
                                      (t.kind == Tok::End ? " before end of input"
                                                          : ", got '" + t.text + "'"));
    return lex_.take();
  }

  Lexer lex_;
};

}  // namespace

Expr parse_expr(std::string_view text) { return Parser(text).parse(); }

}  // namespace sblab
