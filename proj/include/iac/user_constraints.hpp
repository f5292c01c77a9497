#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iac/constraints.hpp"
#include "iac/sexpr.hpp"

namespace iac {

/// Parses application-layer assertions. Each `(assert t)` becomes one user
/// constraint whose SMT-LIB term is `t` exactly as written (a `(! t :named n)`
/// wrapper is dropped; the script assigns its own names). set-info,
/// set-option, set-logic, check-sat, get-model and exit are ignored; any
/// other command is an SmtSyntaxError. Symbols that are not declared
/// variables raise UnknownSymbolError.
std::vector<Constraint> parse_user_constraints(std::string_view smtlib_text, const VariableSet& vars);

/// The declared variable name closest to `name` by edit distance.
std::string nearest_variable(std::string_view name, const VariableSet& vars);

using SymbolResolver = std::function<std::optional<VarId>(const std::string&)>;

/// Linear form of an arithmetic term built from numerals, decimals, symbols,
/// +, -, *, / (by a constant) and to_real. nullopt otherwise.
std::optional<LinearExpr> linear_of(const SExpr& term, const SymbolResolver& resolve);

/// A two-argument comparison of linear terms.
std::optional<Formula> formula_of(const SExpr& term, const SymbolResolver& resolve);

}  // namespace iac
