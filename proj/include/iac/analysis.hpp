#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "iac/constraints.hpp"
#include "iac/resource_catalog.hpp"
#include "iac/resource_graph.hpp"
#include "iac/smt_backend.hpp"
#include "iac/smt_script.hpp"
#include "iac/template_model.hpp"

namespace iac {

/// Point estimates keyed by (logical id, public metric).
class EstimateSet {
 public:
  using Key = std::pair<std::string, std::string>;

  void set(std::string node, std::string metric, Rational value);
  const std::map<Key, Rational>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<Key, Rational> entries_;
};

/// Reads an estimates file: top-level keys are logical ids, nested keys are
/// public metric names, values are numbers (null entries are skipped).
/// Throws UnknownEstimateKeyError, EstimateValueError or ParseError.
EstimateSet load_estimates(std::string_view yaml_text, const VariableSet& vars);

/// Throws UnknownEstimateKeyError or EstimateValueError for an entry that
/// does not pin a public node variable to a nonnegative value of its sort.
void validate_estimates(const EstimateSet& estimates, const VariableSet& vars);

/// YAML skeleton with every public metric of every supported node set to ~.
std::string estimates_template(const ResourceGraph& graph, const Catalog& catalog);

/// Graph, variables and generated constraints of one template.
struct Analysis {
  ResourceGraph graph;
  VariableSet vars;
  ConstraintSet generated;

  static Analysis build(const TemplateModel& model, const Catalog& catalog);
  static Analysis from_graph(ResourceGraph graph, const Catalog& catalog);
};

/// Generated constraints, then user constraints, then one equality per
/// estimate.
ConstraintSet assemble_constraints(const Analysis& analysis, const EstimateSet& estimates,
                                   const std::vector<Constraint>& user);

enum class Verdict { Valid, Invalid, Inconclusive };

std::string_view to_string(Verdict v);

struct ConstraintReport {
  std::string name;
  ConstraintCategory category = ConstraintCategory::Basic;
  std::optional<std::string> anchor;
  std::string infix;
  std::string smtlib;
};

ConstraintReport describe(const ConstraintSet& set, std::size_t index);

struct CheckReport {
  Verdict verdict = Verdict::Inconclusive;
  /// Invalid: up to 10 conflicting constraints, never empty.
  std::vector<ConstraintReport> conflicts;
  std::size_t conflict_count = 0;
  /// False when the solver gave no core and the estimates and user
  /// constraints are listed instead.
  bool core_from_solver = true;
  /// Valid: a full assignment, keyed by variable name.
  std::map<std::string, Rational> witness;
  std::string reason;  // Inconclusive
};

inline constexpr std::size_t kMaxReportedConflicts = 10;

CheckReport check_estimates(const Analysis& analysis, const EstimateSet& estimates,
                            const std::vector<Constraint>& user, const SmtBackend& backend);

struct BoundsReport {
  std::string node;
  std::string metric;
  std::string symbol;
  BoundValue lower;
  BoundValue upper;
  std::vector<std::string> assumptions;  // estimates and user constraints, rendered
};

/// `target` is "LogicalId.metric" naming a node variable. The minimum and
/// maximum queries run concurrently.
BoundsReport usage_bounds(const Analysis& analysis, std::string_view target, const EstimateSet& estimates,
                          const std::vector<Constraint>& user, const SmtBackend& backend);

}  // namespace iac
