#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "iac/rational.hpp"

namespace iac {

using VarId = std::size_t;

enum class Relation { Eq, Le, Lt, Ge, Gt };

/// "=", "<=", "<", ">=", ">" (also the SMT-LIB operator names).
std::string_view relation_symbol(Relation r);

struct LinearTerm {
  Rational coefficient;
  VarId var = 0;
};

/// Sum of coefficient*variable terms plus a constant. Terms keep first-seen
/// order; adding a variable twice merges the coefficients and zero terms are
/// dropped.
class LinearExpr {
 public:
  LinearExpr() = default;
  static LinearExpr variable(VarId var, Rational coefficient = 1);
  static LinearExpr constant_of(Rational value);

  void add_term(VarId var, const Rational& coefficient);
  void add_constant(const Rational& value) { constant_ += value; }
  void add(const LinearExpr& other, const Rational& scale = 1);

  const std::vector<LinearTerm>& terms() const { return terms_; }
  const Rational& constant() const { return constant_; }
  bool is_constant() const { return terms_.empty(); }

 private:
  std::vector<LinearTerm> terms_;
  Rational constant_ = 0;
};

/// lhs <relation> rhs over linear expressions.
struct Formula {
  LinearExpr lhs;
  Relation relation = Relation::Eq;
  LinearExpr rhs;

  /// Distinct variables with a nonzero net coefficient, ascending.
  std::vector<VarId> free_vars() const;
};

using VarNamer = std::function<std::string(VarId)>;

/// Infix rendering, e.g. "A.monthly_requests = A.monthly_GETs + A.monthly_POSTs".
std::string render_infix(const Formula& f, const VarNamer& name);

/// SMT-LIB term. `sort_is_real` reports each variable's sort; when any
/// variable is Real, Int variables are wrapped in to_real and constants are
/// written as decimals. All-Int formulas are scaled to integer coefficients.
std::string render_smtlib(const Formula& f, const VarNamer& symbol,
                          const std::function<bool(VarId)>& sort_is_real);

}  // namespace iac
