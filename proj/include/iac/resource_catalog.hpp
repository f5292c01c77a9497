#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iac/rule_schema.hpp"
#include "iac/template_model.hpp"

namespace iac {

enum class Classification { Supported, NonDataflow, Unknown };
enum class Sort { Int, Real };
enum class Visibility { Public, Private };
enum class RuleCategory { Incoming, Intrinsic, Outgoing };

std::string_view to_string(Classification c);
std::string_view to_string(Sort s);
std::string_view to_string(RuleCategory c);

struct MetricDescriptor {
  std::string name;
  Sort sort = Sort::Int;
  Visibility visibility = Visibility::Public;
};

/// One `path: value` test against a node's configuration. The value "*"
/// matches any present, non-null property.
struct PropertyTest {
  std::string path;
  std::string value;

  bool matches(const PropertyValue& properties) const;
};

struct ConstraintRule {
  RuleCategory category = RuleCategory::Intrinsic;
  std::vector<PropertyTest> when;    // all must match
  std::vector<PropertyTest> unless;  // none may match
  /// Outgoing rules only: the destination public metrics whose edge variables
  /// the rule binds. Empty means every edge variable.
  std::vector<std::string> edge_metrics;
  SchemaFormula schema;

  bool applies_to(const PropertyValue& properties) const;
  bool binds_edge_metric(std::string_view metric) const;
};

/// How a node of this type discovers its dataflow edges. Every source reads
/// only the node's own properties or resources wired directly to it.
struct EdgeSource {
  enum class Kind {
    /// References under the node's own properties: node -> target.
    References,
    /// References under the node's own properties: target -> node.
    InboundReferences,
    /// Resources of `attached_type` whose `link_path` references the node;
    /// references under their `target_path` give node -> target.
    Attached,
  };
  Kind kind = Kind::References;
  std::vector<std::string> include_paths;  // path prefixes; empty = everything
  std::vector<std::string> exclude_paths;

  std::string attached_type;
  std::string link_path;
  std::string target_path;
  std::string route_path;  // scalar on the attached resource naming the route

  /// Routes declared on a second resource type that references the attached
  /// resource (API Gateway v2 routes pointing at integrations).
  std::string route_type;
  std::string route_link_path;
  std::string route_key_path;
};

struct ResourceTypeDescriptor {
  std::string type_name;
  Classification classification = Classification::Unknown;
  std::vector<MetricDescriptor> public_metrics;
  std::vector<MetricDescriptor> private_metrics;
  std::vector<ConstraintRule> template_rules;
  /// When true, each public metric with incoming edges gets
  /// `self.m = sum of incoming edge variables of m`.
  bool default_incoming = true;
  /// Route label (e.g. "GET") -> public metric; "ANY" selects all of them.
  std::map<std::string, std::string> routes;
  std::vector<EdgeSource> edge_sources;

  const MetricDescriptor* find_metric(std::string_view name) const;
  std::vector<MetricDescriptor> all_metrics() const;
};

struct MetricSets {
  std::vector<MetricDescriptor> public_metrics;
  std::vector<MetricDescriptor> private_metrics;
};

/// Registry of resource-type semantics loaded from a declarative YAML file.
/// Immutable after construction.
class Catalog {
 public:
  /// The catalog compiled into the tool from data/catalog.yaml.
  static const Catalog& bundled();
  static Catalog from_yaml(std::string_view text);
  static Catalog load_file(const std::filesystem::path& path);

  Classification classify(std::string_view type_name) const;

  /// Throws NotSupportedError unless the type is Supported.
  const ResourceTypeDescriptor& descriptor(std::string_view type_name) const;
  MetricSets metrics_of(std::string_view type_name) const;
  std::vector<const ConstraintRule*> rules_for(std::string_view type_name,
                                               const PropertyValue& properties) const;

  std::vector<std::string> supported_types() const;
  const std::vector<std::string>& non_dataflow_types() const { return non_dataflow_; }

 private:
  std::map<std::string, ResourceTypeDescriptor, std::less<>> supported_;
  std::vector<std::string> non_dataflow_;
};

std::string_view bundled_catalog_text();

}  // namespace iac
