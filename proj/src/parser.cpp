#include <cctype>
#include <cmath>
#include <charconv>
#include <cstdlib>
#include <sstream>

#include "paisc/constraint.hpp"
#include "paisc/error.hpp"

namespace paisc {

namespace {

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& vars)
      : text_(text), vars_(vars) {}

  std::vector<Atom> constraint() {
    std::vector<Atom> atoms;
    atoms.push_back(atom());
    while (accept("&&")) atoms.push_back(atom());
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return atoms;
  }

 private:
  Atom atom() {
    Expr lhs = expr();
    Rel rel = relation();
    Expr rhs = expr();
    return Atom(std::move(lhs), rel, std::move(rhs));
  }

  Rel relation() {
    if (accept("<=")) return Rel::Le;
    if (accept(">=")) return Rel::Ge;
    if (accept("==")) return Rel::Eq;
    if (accept("<")) return Rel::Lt;
    if (accept(">")) return Rel::Gt;
    if (accept("=")) return Rel::Eq;
    fail("expected relational operator");
  }

  Expr expr() {
    Expr e = term();
    for (;;) {
      if (accept("+"))
        e = e + term();
      else if (accept("-"))
        e = e - term();
      else
        return e;
    }
  }

  Expr term() {
    Expr e = unary();
    for (;;) {
      if (accept("*"))
        e = e * unary();
      else if (accept("/"))
        e = e / unary();
      else
        return e;
    }
  }

  Expr unary() {
    if (accept("-")) return -unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (!accept("^")) return base;
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("exponent must be a non-negative integer literal");
    int k = 0;
    auto [_, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, k);
    if (ec != std::errc{}) fail("exponent out of range");
    return pow(base, k);
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      expect(")");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      std::string name = identifier();
      if (name == "sqrt") {
        expect("(");
        Expr e = expr();
        expect(")");
        return sqrt(e);
      }
      for (std::size_t i = 0; i < vars_.size(); ++i)
        if (vars_[i] == name) return Expr::variable(static_cast<int>(i));
      throw ParseError("undeclared variable '" + name + "'", start);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Expr number() {
    const char* begin = text_.data() + pos_;
    char* end = nullptr;
    // strtod accepts the same decimal/exponent forms we print.
    const std::string tail(begin, text_.size() - pos_);
    const double v = std::strtod(tail.c_str(), &end);
    const std::size_t used = static_cast<std::size_t>(end - tail.c_str());
    if (used == 0) fail("malformed number");
    pos_ += used;
    return Expr::constant(v);
  }

  std::string identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool peek_is(std::string_view tok) {
    skip_ws();
    return text_.substr(pos_, tok.size()) == tok;
  }

  bool accept(std::string_view tok) {
    if (!peek_is(tok)) return false;
    pos_ += tok.size();
    return true;
  }

  void expect(std::string_view tok) {
    if (!accept(tok)) fail("expected '" + std::string(tok) + "'");
  }

  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, pos_); }

  std::string_view text_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

}  // namespace

DomainDecl parse_domain(std::string_view decls) {
  DomainDecl out;
  std::vector<Interval> sides;
  std::istringstream in{std::string(decls)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::string name, lo_s, hi_s, extra;
    if (!(fields >> name)) continue;
    if (!(fields >> lo_s >> hi_s) || (fields >> extra))
      throw ConfigError("domain line " + std::to_string(lineno) + ": expected `name lo hi`");
    char* end = nullptr;
    const double lo = std::strtod(lo_s.c_str(), &end);
    const double hi = std::strtod(hi_s.c_str(), &end);
    if (!std::isfinite(lo) || !std::isfinite(hi))
      throw ConfigError("variable '" + name + "' needs a bounded domain");
    if (!(lo <= hi)) throw ConfigError("variable '" + name + "' has lo > hi");
    for (const auto& n : out.names)
      if (n == name) throw ConfigError("variable '" + name + "' declared twice");
    out.names.push_back(name);
    sides.emplace_back(lo, hi);
  }
  out.box = Box(std::move(sides));
  return out;
}

Constraint parse_constraint(std::string_view text, std::string_view domain_decls) {
  DomainDecl domain = parse_domain(domain_decls);
  Parser p(text, domain.names);
  auto atoms = p.constraint();
  return Constraint(std::move(atoms), std::move(domain.names), std::move(domain.box));
}

}  // namespace paisc
