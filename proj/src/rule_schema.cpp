#include "iac/rule_schema.hpp"

#include <algorithm>
#include <cctype>

#include "iac/errors.hpp"

namespace iac {

std::set<Placeholder> SchemaFormula::placeholders() const {
  std::set<Placeholder> out;
  for (const auto* side : {&lhs, &rhs}) {
    for (const auto& m : side->monomials) {
      if (m.placeholder) out.insert(*m.placeholder);
    }
  }
  return out;
}

namespace {

enum class Tok { Number, Ident, Op, LParen, RParen, Comma, End };

struct Token {
  Tok kind;
  std::string text;
};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto is_ident = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == ':';
  };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '.')) ++j;
      if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
        ++j;
        if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
        while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      }
      out.push_back({Tok::Number, std::string(s.substr(i, j - i))});
      i = j;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && is_ident(s[j])) ++j;
      out.push_back({Tok::Ident, std::string(s.substr(i, j - i))});
      i = j;
    } else if (c == '(') {
      out.push_back({Tok::LParen, "("});
      ++i;
    } else if (c == ')') {
      out.push_back({Tok::RParen, ")"});
      ++i;
    } else if (c == ',') {
      out.push_back({Tok::Comma, ","});
      ++i;
    } else if (c == '<' || c == '>' || c == '=') {
      if (i + 1 < s.size() && s[i + 1] == '=') {
        out.push_back({Tok::Op, std::string(s.substr(i, 2))});
        i += 2;
      } else {
        out.push_back({Tok::Op, std::string(1, c)});
        ++i;
      }
    } else if (c == '+' || c == '-' || c == '*' || c == '/') {
      out.push_back({Tok::Op, std::string(1, c)});
      ++i;
    } else {
      throw CatalogError("unexpected character '" + std::string(1, c) + "' in rule formula");
    }
  }
  out.push_back({Tok::End, ""});
  return out;
}

bool has_placeholder(const SchemaExpr& e) {
  return std::any_of(e.monomials.begin(), e.monomials.end(),
                     [](const auto& m) { return m.placeholder.has_value(); });
}

SchemaExpr scaled(SchemaExpr e, const Rational& k) {
  for (auto& m : e.monomials) m.coefficient *= k;
  return e;
}

SchemaExpr multiply(const SchemaExpr& a, const SchemaExpr& b, std::string_view source) {
  if (has_placeholder(a) && has_placeholder(b)) {
    throw CatalogError("non-linear product in rule formula '" + std::string(source) + "'");
  }
  SchemaExpr out;
  for (const auto& x : a.monomials) {
    for (const auto& y : b.monomials) {
      SchemaMonomial m;
      m.coefficient = x.coefficient * y.coefficient;
      m.factors = x.factors;
      m.factors.insert(m.factors.end(), y.factors.begin(), y.factors.end());
      std::sort(m.factors.begin(), m.factors.end());
      m.placeholder = x.placeholder ? x.placeholder : y.placeholder;
      out.monomials.push_back(std::move(m));
    }
  }
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view source) : source_(source), tokens_(tokenize(source)) {}

  SchemaFormula formula() {
    SchemaFormula f;
    f.source = std::string(source_);
    f.lhs = expr();
    const Token& op = next();
    if (op.kind != Tok::Op) fail("expected a comparison");
    if (op.text == "=" || op.text == "==") {
      f.relation = Relation::Eq;
    } else if (op.text == "<=") {
      f.relation = Relation::Le;
    } else if (op.text == "<") {
      f.relation = Relation::Lt;
    } else if (op.text == ">=") {
      f.relation = Relation::Ge;
    } else if (op.text == ">") {
      f.relation = Relation::Gt;
    } else {
      fail("expected a comparison, found '" + op.text + "'");
    }
    f.rhs = expr();
    if (peek().kind != Tok::End) fail("trailing input");
    return f;
  }

 private:
  SchemaExpr expr() {
    bool negate = false;
    if (peek().kind == Tok::Op && peek().text == "-") {
      next();
      negate = true;
    }
    SchemaExpr e = term();
    if (negate) e = scaled(std::move(e), -1);
    while (peek().kind == Tok::Op && (peek().text == "+" || peek().text == "-")) {
      bool minus = next().text == "-";
      SchemaExpr rhs = term();
      if (minus) rhs = scaled(std::move(rhs), -1);
      e.monomials.insert(e.monomials.end(), rhs.monomials.begin(), rhs.monomials.end());
    }
    return e;
  }

  SchemaExpr term() {
    SchemaExpr e = factor();
    while (peek().kind == Tok::Op && (peek().text == "*" || peek().text == "/")) {
      bool divide = next().text == "/";
      SchemaExpr rhs = factor();
      if (!divide) {
        e = multiply(e, rhs, source_);
        continue;
      }
      if (rhs.monomials.size() != 1 || rhs.monomials[0].placeholder ||
          !rhs.monomials[0].factors.empty() || rhs.monomials[0].coefficient == 0) {
        fail("division is only allowed by a nonzero numeric constant");
      }
      e = scaled(std::move(e), 1 / rhs.monomials[0].coefficient);
    }
    return e;
  }

  SchemaExpr factor() {
    const Token& t = next();
    SchemaExpr e;
    SchemaMonomial m;
    m.coefficient = 1;
    switch (t.kind) {
      case Tok::Number: {
        auto value = parse_rational(t.text);
        if (!value) fail("bad number '" + t.text + "'");
        m.coefficient = *value;
        break;
      }
      case Tok::LParen: {
        e = expr();
        expect(Tok::RParen, ")");
        return e;
      }
      case Tok::Ident: {
        if (t.text == "prop" || t.text == "count") {
          m.factors.push_back(property_factor(t.text == "prop"));
        } else if (t.text == "in") {
          m.placeholder = Placeholder{PlaceholderKind::In, {}};
        } else if (t.text == "out") {
          m.placeholder = Placeholder{PlaceholderKind::Out, {}};
        } else if (t.text == "routed") {
          m.placeholder = Placeholder{PlaceholderKind::Routed, {}};
        } else if (t.text.starts_with("self.") && t.text.size() > 5) {
          m.placeholder = Placeholder{PlaceholderKind::Self, t.text.substr(5)};
        } else {
          fail("unknown placeholder '" + t.text + "'");
        }
        break;
      }
      default:
        fail("unexpected '" + t.text + "'");
    }
    e.monomials.push_back(std::move(m));
    return e;
  }

  PropertyFactor property_factor(bool is_prop) {
    expect(Tok::LParen, "(");
    const Token& path = next();
    if (path.kind != Tok::Ident) fail("expected a property path");
    PropertyFactor f;
    f.kind = is_prop ? PropertyFactor::Kind::Prop : PropertyFactor::Kind::Count;
    f.path = path.text;
    if (is_prop && peek().kind == Tok::Comma) {
      next();
      const Token& fallback = next();
      auto value = fallback.kind == Tok::Number ? parse_rational(fallback.text) : std::nullopt;
      if (!value) fail("property default must be a number");
      f.fallback = *value;
    }
    expect(Tok::RParen, ")");
    return f;
  }

  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() {
    const Token& t = tokens_[pos_];
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return t;
  }
  void expect(Tok kind, std::string_view what) {
    if (next().kind != kind) fail("expected '" + std::string(what) + "'");
  }
  [[noreturn]] void fail(const std::string& message) const {
    throw CatalogError("rule formula '" + std::string(source_) + "': " + message);
  }

  std::string_view source_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

SchemaFormula parse_schema_formula(std::string_view text) { return Parser(text).formula(); }

std::optional<Rational> evaluate_factor(const PropertyFactor& factor, const PropertyValue& properties) {
  const PropertyValue* value = properties.at_path(factor.path);
  if (factor.kind == PropertyFactor::Kind::Count) {
    if (value == nullptr) return Rational(0);
    if (const auto* l = value->list()) return Rational(static_cast<long>(l->size()));
    return std::nullopt;
  }
  if (value == nullptr) return factor.fallback;
  const auto* s = value->scalar();
  if (s == nullptr) return std::nullopt;
  if (s->kind == ScalarKind::Null) return factor.fallback;
  if (s->kind == ScalarKind::Bool) return std::nullopt;
  return parse_rational(s->text);
}

}  // namespace iac
