#include "iac/formula.hpp"

#include <algorithm>
#include <map>

namespace iac {

std::string_view relation_symbol(Relation r) {
  switch (r) {
    case Relation::Eq: return "=";
    case Relation::Le: return "<=";
    case Relation::Lt: return "<";
    case Relation::Ge: return ">=";
    case Relation::Gt: return ">";
  }
  return "=";
}

LinearExpr LinearExpr::variable(VarId var, Rational coefficient) {
  LinearExpr e;
  e.add_term(var, coefficient);
  return e;
}

LinearExpr LinearExpr::constant_of(Rational value) {
  LinearExpr e;
  e.constant_ = std::move(value);
  return e;
}

void LinearExpr::add_term(VarId var, const Rational& coefficient) {
  auto it = std::find_if(terms_.begin(), terms_.end(), [&](const auto& t) { return t.var == var; });
  if (it == terms_.end()) {
    if (coefficient != 0) terms_.push_back({coefficient, var});
    return;
  }
  it->coefficient += coefficient;
  if (it->coefficient == 0) terms_.erase(it);
}

void LinearExpr::add(const LinearExpr& other, const Rational& scale) {
  for (const auto& t : other.terms_) add_term(t.var, t.coefficient * scale);
  constant_ += other.constant_ * scale;
}

std::vector<VarId> Formula::free_vars() const {
  std::map<VarId, Rational> net;
  for (const auto& t : lhs.terms()) net[t.var] += t.coefficient;
  for (const auto& t : rhs.terms()) net[t.var] -= t.coefficient;
  std::vector<VarId> vars;
  for (const auto& [v, c] : net) {
    if (c != 0) vars.push_back(v);
  }
  return vars;
}

namespace {

std::string render_side(const LinearExpr& e, const VarNamer& name) {
  std::string out;
  bool first = true;
  auto emit = [&](const Rational& coefficient, const std::string& body) {
    Rational magnitude = coefficient < 0 ? Rational(-coefficient) : coefficient;
    if (first) {
      if (coefficient < 0) out += "-";
    } else {
      out += coefficient < 0 ? " - " : " + ";
    }
    if (body.empty()) {
      out += to_string(magnitude);
    } else {
      if (magnitude != 1) out += to_string(magnitude) + " * ";
      out += body;
    }
    first = false;
  };
  for (const auto& t : e.terms()) emit(t.coefficient, name(t.var));
  if (e.constant() != 0 || first) {
    if (first) {
      out = to_string(e.constant());
    } else {
      emit(e.constant(), "");
    }
  }
  return out;
}

BigInt lcm_of_denominators(const Formula& f) {
  using boost::multiprecision::denominator;
  BigInt l = 1;
  auto fold = [&](const Rational& r) {
    BigInt d = denominator(r);
    l = l / boost::multiprecision::gcd(l, d) * d;
  };
  for (const auto* side : {&f.lhs, &f.rhs}) {
    for (const auto& t : side->terms()) fold(t.coefficient);
    fold(side->constant());
  }
  return l;
}

std::string smt_side(const LinearExpr& e, const Rational& scale, bool real_mode,
                     const VarNamer& symbol, const std::function<bool(VarId)>& sort_is_real) {
  auto literal = [&](const Rational& value) {
    return real_mode ? smtlib_real(value) : smtlib_int(value);
  };
  std::vector<std::string> parts;
  for (const auto& t : e.terms()) {
    std::string atom = symbol(t.var);
    if (real_mode && !sort_is_real(t.var)) atom = "(to_real " + atom + ")";
    Rational c = t.coefficient * scale;
    if (c == 1) {
      parts.push_back(atom);
    } else if (c == -1) {
      parts.push_back("(- " + atom + ")");
    } else {
      parts.push_back("(* " + literal(c) + " " + atom + ")");
    }
  }
  if (e.constant() != 0 || parts.empty()) parts.push_back(literal(e.constant() * scale));
  if (parts.size() == 1) return parts.front();
  std::string out = "(+";
  for (const auto& p : parts) out += " " + p;
  return out + ")";
}

}  // namespace

std::string render_infix(const Formula& f, const VarNamer& name) {
  return render_side(f.lhs, name) + " " + std::string(relation_symbol(f.relation)) + " " +
         render_side(f.rhs, name);
}

std::string render_smtlib(const Formula& f, const VarNamer& symbol,
                          const std::function<bool(VarId)>& sort_is_real) {
  bool real_mode = false;
  for (const auto* side : {&f.lhs, &f.rhs}) {
    for (const auto& t : side->terms()) real_mode = real_mode || sort_is_real(t.var);
  }
  Rational scale = real_mode ? Rational(1) : Rational(lcm_of_denominators(f));
  return "(" + std::string(relation_symbol(f.relation)) + " " +
         smt_side(f.lhs, scale, real_mode, symbol, sort_is_real) + " " +
         smt_side(f.rhs, scale, real_mode, symbol, sort_is_real) + ")";
}

}  // namespace iac
