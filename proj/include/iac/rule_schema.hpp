#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "iac/formula.hpp"
#include "iac/rational.hpp"
#include "iac/template_model.hpp"

namespace iac {

/// Metric and edge placeholders a catalog rule formula may mention.
///   self.<metric>  a node variable of the node the rule is instantiated on
///   in             sum of incoming edge variables of the bound public metric
///   out            the outgoing edge variable the rule is instantiated for
///   routed         sum of self route metrics selected by the edge's routes
enum class PlaceholderKind { Self, In, Out, Routed };

struct Placeholder {
  PlaceholderKind kind = PlaceholderKind::Self;
  std::string metric;  // Self only

  friend auto operator<=>(const Placeholder&, const Placeholder&) = default;
};

/// A configuration-dependent constant: `prop(Path[, default])` reads a numeric
/// property, `count(Path)` the length of a list property (0 when absent).
struct PropertyFactor {
  enum class Kind { Prop, Count } kind = Kind::Prop;
  std::string path;
  std::optional<Rational> fallback;

  friend bool operator<(const PropertyFactor& a, const PropertyFactor& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.path != b.path) return a.path < b.path;
    return a.fallback < b.fallback;
  }
  friend bool operator==(const PropertyFactor&, const PropertyFactor&) = default;
};

/// coefficient * factors... * placeholder (placeholder optional).
struct SchemaMonomial {
  Rational coefficient;
  std::vector<PropertyFactor> factors;
  std::optional<Placeholder> placeholder;
};

struct SchemaExpr {
  std::vector<SchemaMonomial> monomials;
};

struct SchemaFormula {
  SchemaExpr lhs;
  Relation relation = Relation::Eq;
  SchemaExpr rhs;
  std::string source;

  std::set<Placeholder> placeholders() const;
};

/// Parses rule text such as
///   "1024 * self.monthly_gb_seconds <= prop(MemorySize, 128) * prop(Timeout, 3) * self.monthly_requests".
/// Throws CatalogError on syntax errors or non-linear products.
SchemaFormula parse_schema_formula(std::string_view text);

/// Evaluates a property factor against a node's configuration; nullopt when
/// the property is absent without a fallback or is not a numeric literal.
std::optional<Rational> evaluate_factor(const PropertyFactor& factor, const PropertyValue& properties);

}  // namespace iac
