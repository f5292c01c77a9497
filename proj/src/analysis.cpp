#include "iac/analysis.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <future>

#include "iac/errors.hpp"

namespace iac {

void EstimateSet::set(std::string node, std::string metric, Rational value) {
  entries_[{std::move(node), std::move(metric)}] = std::move(value);
}

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

std::vector<std::string> public_metric_names(const VariableSet& vars, std::string_view node) {
  std::vector<std::string> out;
  for (auto id : vars.NV_pub(node)) out.push_back(vars.at(id).metric);
  return out;
}

std::vector<std::string> nodes_with_variables(const VariableSet& vars) {
  std::vector<std::string> out;
  for (const auto& v : vars.all()) {
    if (v.kind == VariableKind::Node && (out.empty() || out.back() != v.node)) out.push_back(v.node);
  }
  return out;
}

const Variable& estimate_variable(const VariableSet& vars, const std::string& node, const std::string& metric) {
  if (vars.NV(node).empty()) {
    throw UnknownEstimateKeyError("estimates name unknown resource '" + node +
                                  "'; resources with metrics: " + join(nodes_with_variables(vars)));
  }
  auto id = vars.node_var(node, metric);
  if (!id || vars.at(*id).visibility != Visibility::Public) {
    throw UnknownEstimateKeyError("estimates name unknown metric '" + node + "." + metric +
                                  "'; public metrics of " + node + ": " +
                                  join(public_metric_names(vars, node)));
  }
  return vars.at(*id);
}

}  // namespace

void validate_estimates(const EstimateSet& estimates, const VariableSet& vars) {
  for (const auto& [key, value] : estimates.entries()) {
    const auto& v = estimate_variable(vars, key.first, key.second);
    if (value < 0) {
      throw EstimateValueError("estimate " + v.name + " = " + to_string(value) + " is negative");
    }
    if (v.sort == Sort::Int && !is_integer(value)) {
      throw EstimateValueError("estimate " + v.name + " = " + to_string(value) +
                               " is not an integer, but the metric is Int-sorted");
    }
  }
}

EstimateSet load_estimates(std::string_view yaml_text, const VariableSet& vars) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ParseError("estimates: " + std::string(e.what()));
  }
  EstimateSet out;
  if (!root || root.IsNull()) return out;
  if (!root.IsMap()) throw ParseError("estimates: top level must map resource ids to metrics");
  for (const auto& resource : root) {
    auto node = resource.first.as<std::string>();
    const auto& metrics = resource.second;
    if (metrics.IsNull()) continue;
    if (!metrics.IsMap()) throw ParseError("estimates: '" + node + "' must map metric names to values");
    for (const auto& entry : metrics) {
      auto metric = entry.first.as<std::string>();
      const auto& v = estimate_variable(vars, node, metric);
      const auto& value = entry.second;
      if (value.IsNull()) continue;
      if (!value.IsScalar()) throw EstimateValueError("estimate " + v.name + " must be a number");
      auto parsed = parse_rational(value.Scalar());
      if (!parsed) {
        throw EstimateValueError("estimate " + v.name + " = '" + value.Scalar() + "' is not a finite number");
      }
      out.set(node, metric, *parsed);
    }
  }
  validate_estimates(out, vars);
  return out;
}

std::string estimates_template(const ResourceGraph& graph, const Catalog& catalog) {
  std::string out =
      "# Usage estimates for iac-analysis check --estimates.\n"
      "# Replace ~ with a number to assert it; entries left as ~ are unconstrained.\n";
  for (const auto& node : graph.nodes()) {
    if (node.classification != Classification::Supported) continue;
    out += node.logical_id + ":\n";
    for (const auto& m : catalog.descriptor(node.type_name).public_metrics) {
      out += "  " + m.name + ": ~\n";
    }
  }
  return out;
}

Analysis Analysis::from_graph(ResourceGraph graph, const Catalog& catalog) {
  Analysis a;
  a.graph = std::move(graph);
  a.vars = instantiate_variables(a.graph, catalog);
  a.generated = generate_constraints(a.graph, a.vars, catalog);
  return a;
}

Analysis Analysis::build(const TemplateModel& model, const Catalog& catalog) {
  return from_graph(build_graph(model, catalog), catalog);
}

ConstraintSet assemble_constraints(const Analysis& analysis, const EstimateSet& estimates,
                                   const std::vector<Constraint>& user) {
  validate_estimates(estimates, analysis.vars);
  ConstraintSet set = analysis.generated;
  for (const auto& c : user) set.add(c);
  for (const auto& [key, value] : estimates.entries()) {
    auto id = *analysis.vars.node_var(key.first, key.second);
    Formula f{LinearExpr::variable(id), Relation::Eq, LinearExpr::constant_of(value)};
    set.add(Constraint::generated(ConstraintCategory::Estimate, key.first, std::move(f), analysis.vars));
  }
  return set;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Valid: return "valid";
    case Verdict::Invalid: return "invalid";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

ConstraintReport describe(const ConstraintSet& set, std::size_t index) {
  const auto& c = set[index];
  return {set.name(index), c.category(), c.anchor(), c.description(), c.smtlib()};
}

CheckReport check_estimates(const Analysis& analysis, const EstimateSet& estimates,
                            const std::vector<Constraint>& user, const SmtBackend& backend) {
  auto constraints = assemble_constraints(analysis, estimates, user);
  auto script = emit_smtlib(constraints, analysis.vars);
  auto verdict = backend.check(script);

  CheckReport report;
  switch (verdict.status) {
    case SatStatus::Sat:
      report.verdict = Verdict::Valid;
      if (verdict.model) {
        for (const auto& v : analysis.vars.all()) {
          auto it = verdict.model->find(v.name);
          report.witness[v.name] = it == verdict.model->end() ? Rational(0) : it->second;
        }
      }
      return report;
    case SatStatus::Unknown:
      report.verdict = Verdict::Inconclusive;
      report.reason = verdict.reason.empty() ? "solver returned unknown" : verdict.reason;
      return report;
    case SatStatus::Unsat:
      report.verdict = Verdict::Invalid;
      break;
  }

  std::vector<std::size_t> indices;
  if (verdict.core) {
    for (const auto& name : *verdict.core) {
      if (auto i = constraints.index_of(name)) indices.push_back(*i);
    }
  }
  if (indices.empty()) {
    report.core_from_solver = false;
    for (std::size_t i = 0; i < constraints.size(); ++i) {
      auto cat = constraints[i].category();
      if (cat == ConstraintCategory::User || cat == ConstraintCategory::Estimate) indices.push_back(i);
    }
    if (indices.empty()) {
      for (std::size_t i = 0; i < constraints.size(); ++i) indices.push_back(i);
    }
  }
  // Estimates and user constraints first: those are what the user can edit.
  auto rank = [&](std::size_t i) {
    switch (constraints[i].category()) {
      case ConstraintCategory::Estimate: return 0;
      case ConstraintCategory::User: return 1;
      case ConstraintCategory::Basic: return 3;
      default: return 2;
    }
  };
  std::sort(indices.begin(), indices.end(),
            [&](std::size_t a, std::size_t b) { return std::pair(rank(a), a) < std::pair(rank(b), b); });
  report.conflict_count = indices.size();
  for (std::size_t k = 0; k < indices.size() && k < kMaxReportedConflicts; ++k) {
    report.conflicts.push_back(describe(constraints, indices[k]));
  }
  return report;
}

BoundsReport usage_bounds(const Analysis& analysis, std::string_view target, const EstimateSet& estimates,
                          const std::vector<Constraint>& user, const SmtBackend& backend) {
  auto dot = target.find('.');
  std::string node(target.substr(0, dot));
  std::string metric = dot == std::string_view::npos ? "" : std::string(target.substr(dot + 1));
  auto id = analysis.vars.node_var(node, metric);
  if (!id) {
    std::vector<std::string> metrics;
    for (auto v : analysis.vars.NV(node)) metrics.push_back(analysis.vars.at(v).metric);
    throw UnknownTargetKeyError("unknown target '" + std::string(target) + "'" +
                                (metrics.empty() ? "; expected LogicalId.metric of a supported resource"
                                                 : "; metrics of " + node + ": " + join(metrics)));
  }

  auto constraints = assemble_constraints(analysis, estimates, user);
  auto script = emit_smtlib(constraints, analysis.vars);
  const auto& var = analysis.vars.at(*id);

  BoundsReport report;
  report.node = node;
  report.metric = metric;
  report.symbol = var.symbol();
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    auto cat = constraints[i].category();
    if (cat == ConstraintCategory::User || cat == ConstraintCategory::Estimate) {
      report.assumptions.push_back(constraints[i].description());
    }
  }
  auto lower = std::async(std::launch::async,
                          [&] { return backend.bound(script, report.symbol, Direction::Minimize); });
  report.upper = backend.bound(script, report.symbol, Direction::Maximize);
  report.lower = lower.get();
  return report;
}

}  // namespace iac
