#include "iac/constraints.hpp"

#include <algorithm>
#include <set>

#include "iac/errors.hpp"

namespace iac {

std::string node_variable_name(std::string_view node, std::string_view metric) {
  return std::string(node) + "." + std::string(metric);
}

std::string edge_variable_name(std::string_view source, std::string_view target,
                               std::string_view metric) {
  return std::string(source) + "->" + std::string(target) + "." + std::string(metric);
}

void VariableSet::add(Variable v) {
  v.id = vars_.size();
  by_name_.emplace(v.name, v.id);
  if (v.kind == VariableKind::Node) {
    node_vars_[v.node].push_back(v.id);
    ++node_count_;
  } else {
    in_vars_[v.node].push_back(v.id);
    out_vars_[v.source].push_back(v.id);
  }
  vars_.push_back(std::move(v));
}

std::optional<VarId> VariableSet::find(std::string_view name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::optional<VarId> VariableSet::node_var(std::string_view node, std::string_view metric) const {
  return find(node_variable_name(node, metric));
}

std::optional<VarId> VariableSet::edge_var(std::string_view source, std::string_view target,
                                           std::string_view metric) const {
  return find(edge_variable_name(source, target, metric));
}

namespace {

std::vector<VarId> lookup(const std::map<std::string, std::vector<VarId>, std::less<>>& index,
                          std::string_view key) {
  auto it = index.find(key);
  return it == index.end() ? std::vector<VarId>{} : it->second;
}

}  // namespace

std::vector<VarId> VariableSet::NV(std::string_view node) const { return lookup(node_vars_, node); }

std::vector<VarId> VariableSet::NV_pub(std::string_view node) const {
  std::vector<VarId> out;
  for (auto id : NV(node)) {
    if (vars_[id].visibility == Visibility::Public) out.push_back(id);
  }
  return out;
}

std::vector<VarId> VariableSet::NV_priv(std::string_view node) const {
  std::vector<VarId> out;
  for (auto id : NV(node)) {
    if (vars_[id].visibility == Visibility::Private) out.push_back(id);
  }
  return out;
}

std::vector<VarId> VariableSet::EV_in(std::string_view node) const { return lookup(in_vars_, node); }
std::vector<VarId> VariableSet::EV_out(std::string_view node) const { return lookup(out_vars_, node); }

VariableSet instantiate_variables(const ResourceGraph& graph, const Catalog& catalog) {
  VariableSet vars;
  for (const auto& node : graph.nodes()) {
    if (node.classification != Classification::Supported) continue;
    for (const auto& m : catalog.descriptor(node.type_name).all_metrics()) {
      Variable v;
      v.kind = VariableKind::Node;
      v.node = node.logical_id;
      v.metric = m.name;
      v.visibility = m.visibility;
      v.sort = m.sort;
      v.name = node_variable_name(node.logical_id, m.name);
      vars.add(std::move(v));
    }
  }
  for (const auto& edge : graph.edges()) {
    const auto* target = graph.find(edge.target);
    if (target->classification != Classification::Supported) continue;
    for (const auto& m : catalog.descriptor(target->type_name).public_metrics) {
      Variable v;
      v.kind = VariableKind::Edge;
      v.node = edge.target;
      v.source = edge.source;
      v.metric = m.name;
      v.sort = m.sort;
      v.name = edge_variable_name(edge.source, edge.target, m.name);
      vars.add(std::move(v));
    }
  }
  return vars;
}

std::string_view to_string(ConstraintCategory c) {
  switch (c) {
    case ConstraintCategory::Basic: return "basic";
    case ConstraintCategory::Incoming: return "incoming";
    case ConstraintCategory::Intrinsic: return "intrinsic";
    case ConstraintCategory::Outgoing: return "outgoing";
    case ConstraintCategory::User: return "user";
    case ConstraintCategory::Estimate: return "estimate";
  }
  return "?";
}

Constraint Constraint::generated(ConstraintCategory category, std::optional<std::string> anchor,
                                 Formula formula, const VariableSet& vars) {
  Constraint c;
  c.category_ = category;
  c.anchor_ = std::move(anchor);
  auto name = [&](VarId id) { return vars.name_of(id); };
  auto symbol = [&](VarId id) { return vars.symbol_of(id); };
  auto real = [&](VarId id) { return vars.is_real(id); };
  c.smtlib_ = render_smtlib(formula, symbol, real);
  c.description_ = render_infix(formula, name);
  c.free_vars_ = formula.free_vars();
  c.formula_ = std::move(formula);
  return c;
}

Constraint Constraint::user(std::string smtlib_term, std::vector<VarId> free_vars,
                            std::optional<Formula> formula, const VariableSet& vars) {
  Constraint c;
  c.category_ = ConstraintCategory::User;
  std::sort(free_vars.begin(), free_vars.end());
  free_vars.erase(std::unique(free_vars.begin(), free_vars.end()), free_vars.end());
  c.free_vars_ = std::move(free_vars);
  c.smtlib_ = std::move(smtlib_term);
  c.description_ =
      formula ? render_infix(*formula, [&](VarId id) { return vars.name_of(id); }) : c.smtlib_;
  c.formula_ = std::move(formula);
  return c;
}

std::string Constraint::canonical() const {
  return std::string(to_string(category_)) + "|" + anchor_.value_or("") + "|" + smtlib_;
}

void ConstraintSet::add(Constraint c) {
  auto& ordinal = counts_[c.category()];
  names_.push_back(std::string(to_string(c.category())) + std::to_string(ordinal));
  ++ordinal;
  items_.push_back(std::move(c));
}

void ConstraintSet::append(const ConstraintSet& other) {
  for (const auto& c : other.items_) add(c);
}

std::optional<std::size_t> ConstraintSet::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t ConstraintSet::count(ConstraintCategory category) const {
  auto it = counts_.find(category);
  return it == counts_.end() ? 0 : it->second;
}

std::vector<const Constraint*> ConstraintSet::anchored_at(std::string_view node) const {
  std::vector<const Constraint*> out;
  for (const auto& c : items_) {
    if (c.anchor() && *c.anchor() == node) out.push_back(&c);
  }
  return out;
}

namespace {

struct Bindings {
  std::vector<VarId> in;
  std::optional<VarId> out;
  std::vector<VarId> routed;
};

/// nullopt when a property factor has no numeric value (the rule does not
/// apply to this configuration).
std::optional<LinearExpr> instantiate_side(const SchemaExpr& side, const NodeRecord& node,
                                           const ResourceTypeDescriptor& type, const VariableSet& vars,
                                           const Bindings& bindings, const std::string& source) {
  LinearExpr expr;
  for (const auto& mono : side.monomials) {
    Rational scale = mono.coefficient;
    for (const auto& factor : mono.factors) {
      auto value = evaluate_factor(factor, node.properties);
      if (!value) return std::nullopt;
      scale *= *value;
    }
    if (!mono.placeholder) {
      expr.add_constant(scale);
      continue;
    }
    const auto& ph = *mono.placeholder;
    switch (ph.kind) {
      case PlaceholderKind::Self: {
        if (type.find_metric(ph.metric) == nullptr) {
          throw RuleInstantiationError("rule '" + source + "' on " + node.logical_id + " (" +
                                       type.type_name + ") names unknown metric '" + ph.metric + "'");
        }
        expr.add_term(*vars.node_var(node.logical_id, ph.metric), scale);
        break;
      }
      case PlaceholderKind::In:
        for (auto id : bindings.in) expr.add_term(id, scale);
        break;
      case PlaceholderKind::Out:
        expr.add_term(*bindings.out, scale);
        break;
      case PlaceholderKind::Routed:
        for (auto id : bindings.routed) expr.add_term(id, scale);
        break;
    }
  }
  return expr;
}

std::optional<Formula> instantiate_rule(const ConstraintRule& rule, const NodeRecord& node,
                                        const ResourceTypeDescriptor& type, const VariableSet& vars,
                                        const Bindings& bindings) {
  const auto& schema = rule.schema;
  auto lhs = instantiate_side(schema.lhs, node, type, vars, bindings, schema.source);
  if (!lhs) return std::nullopt;
  auto rhs = instantiate_side(schema.rhs, node, type, vars, bindings, schema.source);
  if (!rhs) return std::nullopt;
  return Formula{std::move(*lhs), schema.relation, std::move(*rhs)};
}

bool mentions(const SchemaExpr& side, PlaceholderKind kind) {
  return std::any_of(side.monomials.begin(), side.monomials.end(),
                     [&](const auto& m) { return m.placeholder && m.placeholder->kind == kind; });
}

/// Self route metrics selected by an edge's labels ("ANY" selects all).
std::set<std::string> routed_metrics(const ResourceTypeDescriptor& type, const Edge& edge) {
  std::set<std::string> out;
  for (const auto& label : edge.routes) {
    if (label == "ANY") {
      for (const auto& [_, metric] : type.routes) out.insert(metric);
    } else if (auto it = type.routes.find(label); it != type.routes.end()) {
      out.insert(it->second);
    }
  }
  return out;
}

}  // namespace

std::vector<Constraint> generate_node_constraints(const NodeRecord& node, const ResourceGraph& graph,
                                                 const VariableSet& vars, const Catalog& catalog) {
  std::vector<Constraint> out;
  if (node.classification != Classification::Supported) return out;
  const auto& type = catalog.descriptor(node.type_name);
  const auto& id = node.logical_id;
  auto rules = catalog.rules_for(node.type_name, node.properties);

  auto ev_in_of = [&](const std::string& metric) {
    std::vector<VarId> ids;
    for (auto v : vars.EV_in(id)) {
      if (vars.at(v).metric == metric) ids.push_back(v);
    }
    return ids;
  };

  // Incoming: catalog rules first, then the default conservation rule for
  // every public metric no catalog rule claimed.
  std::set<std::string> claimed;
  for (const auto* rule : rules) {
    if (rule->category != RuleCategory::Incoming) continue;
    std::string metric;
    for (const auto& ph : rule->schema.placeholders()) {
      if (ph.kind == PlaceholderKind::Self) metric = ph.metric;
    }
    const auto* m = type.find_metric(metric);
    if (m == nullptr || m->visibility != Visibility::Public) {
      throw RuleInstantiationError("incoming rule '" + rule->schema.source + "' on " + id +
                                   " must bind a public metric of " + type.type_name);
    }
    Bindings b;
    b.in = ev_in_of(metric);
    if (b.in.empty()) continue;
    if (auto f = instantiate_rule(*rule, node, type, vars, b)) {
      claimed.insert(metric);
      out.push_back(Constraint::generated(ConstraintCategory::Incoming, id, std::move(*f), vars));
    }
  }
  if (type.default_incoming) {
    for (const auto& m : type.public_metrics) {
      if (claimed.count(m.name) != 0) continue;
      auto in = ev_in_of(m.name);
      if (in.empty()) continue;
      LinearExpr rhs;
      for (auto v : in) rhs.add_term(v, 1);
      Formula f{LinearExpr::variable(*vars.node_var(id, m.name)), Relation::Eq, std::move(rhs)};
      out.push_back(Constraint::generated(ConstraintCategory::Incoming, id, std::move(f), vars));
    }
  }

  for (const auto* rule : rules) {
    if (rule->category != RuleCategory::Intrinsic) continue;
    if (auto f = instantiate_rule(*rule, node, type, vars, {})) {
      out.push_back(Constraint::generated(ConstraintCategory::Intrinsic, id, std::move(*f), vars));
    }
  }

  auto out_edges = graph.out_edges(id);
  std::vector<std::set<std::string>> edge_routes;
  for (const auto* e : out_edges) edge_routes.push_back(routed_metrics(type, *e));

  for (const auto* rule : rules) {
    if (rule->category != RuleCategory::Outgoing) continue;
    bool uses_routes = mentions(rule->schema.lhs, PlaceholderKind::Routed) ||
                       mentions(rule->schema.rhs, PlaceholderKind::Routed);
    for (std::size_t i = 0; i < out_edges.size(); ++i) {
      const auto& edge = *out_edges[i];
      Bindings b;
      bool shared = false;
      if (uses_routes) {
        if (edge_routes[i].empty()) continue;
        for (const auto& metric : edge_routes[i]) b.routed.push_back(*vars.node_var(id, metric));
        for (std::size_t j = 0; j < out_edges.size(); ++j) {
          if (j == i) continue;
          for (const auto& metric : edge_routes[j]) shared = shared || edge_routes[i].count(metric) != 0;
        }
      }
      for (auto ev : vars.EV_out(id)) {
        const auto& var = vars.at(ev);
        if (var.node != edge.target || !rule->binds_edge_metric(var.metric)) continue;
        b.out = ev;
        auto f = instantiate_rule(*rule, node, type, vars, b);
        if (!f) continue;
        // A route split across several integrations only bounds each one.
        if (shared && f->relation == Relation::Eq) {
          f->relation = mentions(rule->schema.lhs, PlaceholderKind::Out) ? Relation::Le : Relation::Ge;
        }
        out.push_back(Constraint::generated(ConstraintCategory::Outgoing, id, std::move(*f), vars));
      }
    }
  }
  return out;
}

ConstraintSet generate_constraints(const ResourceGraph& graph, const VariableSet& vars,
                                   const Catalog& catalog) {
  ConstraintSet set;
  for (const auto& v : vars.all()) {
    Formula f{LinearExpr::variable(v.id), Relation::Ge, LinearExpr::constant_of(0)};
    std::optional<std::string> anchor;
    if (v.kind == VariableKind::Node) anchor = v.node;
    set.add(Constraint::generated(ConstraintCategory::Basic, anchor, std::move(f), vars));
  }
  std::vector<Constraint> generated;
  for (const auto& node : graph.nodes()) {
    auto local = generate_node_constraints(node, graph, vars, catalog);
    generated.insert(generated.end(), std::make_move_iterator(local.begin()),
                     std::make_move_iterator(local.end()));
  }
  std::stable_sort(generated.begin(), generated.end(),
                   [](const Constraint& a, const Constraint& b) { return a.category() < b.category(); });
  for (auto& c : generated) set.add(std::move(c));
  return set;
}

std::vector<ScopingViolation> validate_scoping(const Constraint& constraint, const ResourceGraph& graph,
                                               const VariableSet& vars) {
  std::vector<ScopingViolation> out;
  auto violation = [&](std::string reason) {
    out.push_back({constraint.description(), std::move(reason)});
  };
  const auto& fv = constraint.free_vars();
  for (auto v : fv) {
    if (v >= vars.size()) {
      violation("mentions an undeclared variable");
      return out;
    }
  }

  auto category = constraint.category();
  if (category == ConstraintCategory::Basic) {
    if (fv.size() != 1) violation("basic constraint must mention exactly one variable");
    return out;
  }
  if (category == ConstraintCategory::User) return out;

  if (!constraint.anchor() || graph.find(*constraint.anchor()) == nullptr) {
    violation("constraint has no anchor node in the graph");
    return out;
  }
  const auto& n = *constraint.anchor();
  auto contains = [](const std::vector<VarId>& set, VarId v) {
    return std::find(set.begin(), set.end(), v) != set.end();
  };
  auto nv = vars.NV(n);
  auto nv_pub = vars.NV_pub(n);

  switch (category) {
    case ConstraintCategory::Intrinsic:
      for (auto v : fv) {
        if (!contains(nv, v)) violation(vars.name_of(v) + " is not a variable of " + n);
      }
      break;
    case ConstraintCategory::Incoming: {
      auto ev_in = vars.EV_in(n);
      std::size_t node_vars = 0;
      for (auto v : fv) {
        if (contains(nv_pub, v)) {
          ++node_vars;
        } else if (!contains(ev_in, v)) {
          violation(vars.name_of(v) + " is neither a public variable nor an incoming edge of " + n);
        }
      }
      if (node_vars > 1) violation("incoming constraint mentions more than one node variable");
      break;
    }
    case ConstraintCategory::Outgoing: {
      auto ev_out = vars.EV_out(n);
      std::size_t edge_vars = 0;
      for (auto v : fv) {
        if (contains(ev_out, v)) {
          ++edge_vars;
        } else if (!contains(nv, v)) {
          violation(vars.name_of(v) + " is neither a variable nor an outgoing edge of " + n);
        }
      }
      if (edge_vars > 1) violation("outgoing constraint mentions more than one edge variable");
      break;
    }
    case ConstraintCategory::Estimate:
      if (fv.size() != 1 || !contains(nv_pub, fv.front())) {
        violation("estimate must pin exactly one public variable of " + n);
      }
      break;
    default:
      break;
  }
  return out;
}

}  // namespace iac
