#include "iac/user_constraints.hpp"

#include <algorithm>
#include <set>

#include "iac/errors.hpp"

namespace iac {

namespace {

const std::set<std::string, std::less<>>& operators() {
  static const std::set<std::string, std::less<>> ops = {
      "and", "or",  "not", "=>",  "xor", "ite",     "distinct", "=",      "<=",   "<",
      ">=",  ">",   "+",   "-",   "*",   "/",       "div",      "mod",    "abs",  "to_real",
      "to_int", "is_int"};
  return ops;
}

const std::set<std::string, std::less<>>& ignored_commands() {
  static const std::set<std::string, std::less<>> cmds = {
      "set-info", "set-option", "set-logic", "check-sat", "get-model", "exit"};
  return cmds;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

void collect_symbols(const SExpr& term, const VariableSet& vars, std::vector<VarId>& out) {
  switch (term.kind) {
    case SExpr::Kind::Symbol: {
      if (!term.quoted && (term.text == "true" || term.text == "false")) return;
      if (auto id = vars.find(term.text)) {
        out.push_back(*id);
        return;
      }
      throw UnknownSymbolError(term.text, nearest_variable(term.text, vars));
    }
    case SExpr::Kind::List: {
      if (term.items.empty()) throw SmtSyntaxError("empty application '()'");
      const auto& head = term.items.front();
      if (head.kind != SExpr::Kind::Symbol || head.quoted || operators().count(head.text) == 0) {
        throw SmtSyntaxError("unsupported function '" + to_string(head) + "' in user constraint");
      }
      if (term.items.size() < 2) throw SmtSyntaxError("'" + head.text + "' needs arguments");
      for (std::size_t i = 1; i < term.items.size(); ++i) collect_symbols(term.items[i], vars, out);
      return;
    }
    case SExpr::Kind::Numeral:
    case SExpr::Kind::Decimal:
      return;
    default:
      throw SmtSyntaxError("unexpected '" + to_string(term) + "' in user constraint");
  }
}

std::optional<Relation> relation_of(std::string_view op) {
  if (op == "=") return Relation::Eq;
  if (op == "<=") return Relation::Le;
  if (op == "<") return Relation::Lt;
  if (op == ">=") return Relation::Ge;
  if (op == ">") return Relation::Gt;
  return std::nullopt;
}

}  // namespace

std::string nearest_variable(std::string_view name, const VariableSet& vars) {
  std::string best;
  std::size_t best_distance = SIZE_MAX;
  for (const auto& v : vars.all()) {
    auto d = edit_distance(name, v.name);
    if (d < best_distance) {
      best_distance = d;
      best = v.name;
    }
  }
  return best;
}

std::optional<LinearExpr> linear_of(const SExpr& term, const SymbolResolver& resolve) {
  switch (term.kind) {
    case SExpr::Kind::Numeral:
    case SExpr::Kind::Decimal:
      return LinearExpr::constant_of(*parse_rational(term.text));
    case SExpr::Kind::Symbol: {
      auto id = resolve(term.text);
      if (!id) return std::nullopt;
      return LinearExpr::variable(*id);
    }
    case SExpr::Kind::List:
      break;
    default:
      return std::nullopt;
  }
  auto op = term.head();
  std::size_t argc = term.items.size() - (term.items.empty() ? 0 : 1);
  if (op.empty() || argc == 0) return std::nullopt;

  std::vector<LinearExpr> args;
  for (std::size_t i = 1; i < term.items.size(); ++i) {
    auto a = linear_of(term.items[i], resolve);
    if (!a) return std::nullopt;
    args.push_back(std::move(*a));
  }

  if (op == "to_real" && argc == 1) return args[0];
  if (op == "+") {
    LinearExpr sum;
    for (const auto& a : args) sum.add(a);
    return sum;
  }
  if (op == "-") {
    if (argc == 1) {
      LinearExpr neg;
      neg.add(args[0], -1);
      return neg;
    }
    LinearExpr diff = args[0];
    for (std::size_t i = 1; i < args.size(); ++i) diff.add(args[i], -1);
    return diff;
  }
  if (op == "*") {
    // At most one factor may mention variables.
    Rational scale = 1;
    std::optional<LinearExpr> varying;
    for (auto& a : args) {
      if (a.is_constant()) {
        scale *= a.constant();
      } else if (varying) {
        return std::nullopt;
      } else {
        varying = std::move(a);
      }
    }
    LinearExpr product;
    if (varying) {
      product.add(*varying, scale);
    } else {
      product.add_constant(scale);
    }
    return product;
  }
  if (op == "/" && argc >= 2) {
    Rational divisor = 1;
    for (std::size_t i = 1; i < args.size(); ++i) {
      if (!args[i].is_constant() || args[i].constant() == 0) return std::nullopt;
      divisor *= args[i].constant();
    }
    LinearExpr out;
    out.add(args[0], Rational(1) / divisor);
    return out;
  }
  return std::nullopt;
}

std::optional<Formula> formula_of(const SExpr& term, const SymbolResolver& resolve) {
  if (!term.is_list() || term.items.size() != 3) return std::nullopt;
  auto relation = relation_of(term.head());
  if (!relation) return std::nullopt;
  auto lhs = linear_of(term.items[1], resolve);
  auto rhs = linear_of(term.items[2], resolve);
  if (!lhs || !rhs) return std::nullopt;
  return Formula{std::move(*lhs), *relation, std::move(*rhs)};
}

std::vector<Constraint> parse_user_constraints(std::string_view smtlib_text, const VariableSet& vars) {
  std::vector<Constraint> out;
  SymbolResolver resolve = [&](const std::string& name) { return vars.find(name); };
  for (const auto& cmd : parse_sexprs(smtlib_text)) {
    auto head = cmd.head();
    if (head.empty()) throw SmtSyntaxError("expected a command, got '" + to_string(cmd) + "'");
    if (ignored_commands().count(head) != 0) continue;
    if (head != "assert") {
      throw SmtSyntaxError("unsupported command '" + std::string(head) +
                           "' in constraints file; only assert is accepted");
    }
    if (cmd.items.size() != 2) throw SmtSyntaxError("assert takes exactly one term");

    const SExpr* term = &cmd.items[1];
    if (term->head() == "!") {
      if (term->items.size() < 2) throw SmtSyntaxError("empty '!' annotation");
      term = &term->items[1];
    }
    std::vector<VarId> free_vars;
    collect_symbols(*term, vars, free_vars);
    auto text = std::string(smtlib_text.substr(term->begin, term->end - term->begin));
    out.push_back(Constraint::user(std::move(text), std::move(free_vars), formula_of(*term, resolve), vars));
  }
  return out;
}

}  // namespace iac
