#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iac/formula.hpp"
#include "iac/resource_catalog.hpp"
#include "iac/resource_graph.hpp"

namespace iac {

enum class VariableKind { Node, Edge };

struct Variable {
  VarId id = 0;
  VariableKind kind = VariableKind::Node;
  std::string node;    // owner (Node kind) or destination (Edge kind)
  std::string source;  // Edge kind only
  std::string metric;
  Visibility visibility = Visibility::Public;
  Sort sort = Sort::Int;
  std::string name;  // "A.metric" or "A->B.metric"

  /// Pipe-quoted SMT-LIB symbol, e.g. "|A->B.monthly_requests|".
  std::string symbol() const { return "|" + name + "|"; }
};

std::string node_variable_name(std::string_view node, std::string_view metric);
std::string edge_variable_name(std::string_view source, std::string_view target,
                               std::string_view metric);

/// Node variables first (nodes in id order, public metrics then private, in
/// catalog order), then edge variables (edges in graph order, destination
/// public metrics in catalog order).
class VariableSet {
 public:
  const std::vector<Variable>& all() const { return vars_; }
  const Variable& at(VarId id) const { return vars_.at(id); }
  std::size_t size() const { return vars_.size(); }
  std::size_t node_variable_count() const { return node_count_; }
  std::size_t edge_variable_count() const { return vars_.size() - node_count_; }

  /// Looks up by unquoted name ("A.m" or "A->B.m").
  std::optional<VarId> find(std::string_view name) const;
  std::optional<VarId> node_var(std::string_view node, std::string_view metric) const;
  std::optional<VarId> edge_var(std::string_view source, std::string_view target,
                                std::string_view metric) const;

  std::vector<VarId> NV(std::string_view node) const;
  std::vector<VarId> NV_pub(std::string_view node) const;
  std::vector<VarId> NV_priv(std::string_view node) const;
  /// Edge variables of edges whose destination is `node`.
  std::vector<VarId> EV_in(std::string_view node) const;
  /// Edge variables of edges whose source is `node`.
  std::vector<VarId> EV_out(std::string_view node) const;

  bool is_real(VarId id) const { return vars_.at(id).sort == Sort::Real; }
  std::string name_of(VarId id) const { return vars_.at(id).name; }
  std::string symbol_of(VarId id) const { return vars_.at(id).symbol(); }

  friend VariableSet instantiate_variables(const ResourceGraph& graph, const Catalog& catalog);

 private:
  void add(Variable v);

  std::vector<Variable> vars_;
  std::size_t node_count_ = 0;
  std::map<std::string, VarId, std::less<>> by_name_;
  std::map<std::string, std::vector<VarId>, std::less<>> node_vars_;
  std::map<std::string, std::vector<VarId>, std::less<>> in_vars_;
  std::map<std::string, std::vector<VarId>, std::less<>> out_vars_;
};

VariableSet instantiate_variables(const ResourceGraph& graph, const Catalog& catalog);

enum class ConstraintCategory { Basic, Incoming, Intrinsic, Outgoing, User, Estimate };

std::string_view to_string(ConstraintCategory c);

/// A categorized assertion. Generated and estimate constraints carry a linear
/// formula; user constraints keep their SMT-LIB term verbatim and carry a
/// formula only when the term is a single linear comparison.
class Constraint {
 public:
  static Constraint generated(ConstraintCategory category, std::optional<std::string> anchor,
                              Formula formula, const VariableSet& vars);
  static Constraint user(std::string smtlib_term, std::vector<VarId> free_vars,
                         std::optional<Formula> formula, const VariableSet& vars);

  ConstraintCategory category() const { return category_; }
  const std::optional<std::string>& anchor() const { return anchor_; }
  const std::optional<Formula>& formula() const { return formula_; }
  const std::vector<VarId>& free_vars() const { return free_vars_; }
  /// SMT-LIB term without the name annotation.
  const std::string& smtlib() const { return smtlib_; }
  /// Human-readable form: infix when a formula exists, else the SMT-LIB term.
  const std::string& description() const { return description_; }
  /// "category|anchor|smtlib": stable, name-independent identity.
  std::string canonical() const;

 private:
  ConstraintCategory category_ = ConstraintCategory::Basic;
  std::optional<std::string> anchor_;
  std::optional<Formula> formula_;
  std::vector<VarId> free_vars_;
  std::string smtlib_;
  std::string description_;
};

/// Constraints in emission order, each with a unique assertion name made of
/// its category and a per-category ordinal ("basic0", "user3").
class ConstraintSet {
 public:
  void add(Constraint c);
  void append(const ConstraintSet& other);

  std::size_t size() const { return items_.size(); }
  const Constraint& operator[](std::size_t i) const { return items_[i]; }
  const std::string& name(std::size_t i) const { return names_[i]; }
  const std::vector<Constraint>& items() const { return items_; }

  std::optional<std::size_t> index_of(std::string_view name) const;
  std::size_t count(ConstraintCategory category) const;
  std::vector<const Constraint*> anchored_at(std::string_view node) const;

 private:
  std::vector<Constraint> items_;
  std::vector<std::string> names_;
  std::map<ConstraintCategory, std::size_t> counts_;
};

/// Basic constraints for every variable, then incoming, intrinsic and
/// outgoing constraints node by node. Each node's constraints are derived
/// from the node, its properties and its incident edge variables only.
ConstraintSet generate_constraints(const ResourceGraph& graph, const VariableSet& vars,
                                   const Catalog& catalog);

/// Constraints anchored at a single node, in generation order.
std::vector<Constraint> generate_node_constraints(const NodeRecord& node, const ResourceGraph& graph,
                                                 const VariableSet& vars, const Catalog& catalog);

struct ScopingViolation {
  std::string constraint;  // description
  std::string reason;
};

/// Empty when the constraint's free variables respect its category's scope.
std::vector<ScopingViolation> validate_scoping(const Constraint& constraint, const ResourceGraph& graph,
                                               const VariableSet& vars);

}  // namespace iac
