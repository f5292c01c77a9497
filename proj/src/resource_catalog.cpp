#include "iac/resource_catalog.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "iac/errors.hpp"

namespace iac {

std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::Supported: return "Supported";
    case Classification::NonDataflow: return "NonDataflow";
    case Classification::Unknown: return "Unknown";
  }
  return "Unknown";
}

std::string_view to_string(Sort s) { return s == Sort::Int ? "Int" : "Real"; }

std::string_view to_string(RuleCategory c) {
  switch (c) {
    case RuleCategory::Incoming: return "incoming";
    case RuleCategory::Intrinsic: return "intrinsic";
    case RuleCategory::Outgoing: return "outgoing";
  }
  return "intrinsic";
}

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

bool PropertyTest::matches(const PropertyValue& properties) const {
  const PropertyValue* v = properties.at_path(path);
  if (v == nullptr) return false;
  const auto* s = v->scalar();
  if (value == "*") return s == nullptr || s->kind != ScalarKind::Null;
  if (s == nullptr) return false;
  auto expected = parse_rational(value);
  auto actual = parse_rational(s->text);
  if (expected && actual) return *expected == *actual;
  return iequals(s->text, value);
}

bool ConstraintRule::applies_to(const PropertyValue& properties) const {
  return std::all_of(when.begin(), when.end(), [&](const auto& t) { return t.matches(properties); }) &&
         std::none_of(unless.begin(), unless.end(), [&](const auto& t) { return t.matches(properties); });
}

bool ConstraintRule::binds_edge_metric(std::string_view metric) const {
  return edge_metrics.empty() ||
         std::find(edge_metrics.begin(), edge_metrics.end(), metric) != edge_metrics.end();
}

const MetricDescriptor* ResourceTypeDescriptor::find_metric(std::string_view name) const {
  for (const auto* set : {&public_metrics, &private_metrics}) {
    for (const auto& m : *set) {
      if (m.name == name) return &m;
    }
  }
  return nullptr;
}

std::vector<MetricDescriptor> ResourceTypeDescriptor::all_metrics() const {
  std::vector<MetricDescriptor> out = public_metrics;
  out.insert(out.end(), private_metrics.begin(), private_metrics.end());
  return out;
}

namespace {

bool valid_identifier(const std::string& name) {
  return !name.empty() && std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

std::vector<std::string> string_list(const YAML::Node& node, const std::string& context) {
  std::vector<std::string> out;
  if (!node) return out;
  if (node.IsScalar()) {
    out.push_back(node.as<std::string>());
    return out;
  }
  if (!node.IsSequence()) throw CatalogError(context + ": expected a list");
  for (const auto& item : node) out.push_back(item.as<std::string>());
  return out;
}

std::vector<PropertyTest> property_tests(const YAML::Node& node, const std::string& context) {
  std::vector<PropertyTest> out;
  if (!node) return out;
  if (!node.IsMap()) throw CatalogError(context + ": expected a mapping of property tests");
  for (const auto& kv : node) out.push_back({kv.first.as<std::string>(), kv.second.as<std::string>()});
  return out;
}

std::vector<MetricDescriptor> metric_list(const YAML::Node& node, Visibility visibility,
                                          const std::string& context) {
  std::vector<MetricDescriptor> out;
  if (!node) return out;
  if (!node.IsSequence()) throw CatalogError(context + ": metrics must be a list");
  for (const auto& item : node) {
    MetricDescriptor m;
    m.visibility = visibility;
    if (item.IsScalar()) {
      m.name = item.as<std::string>();
    } else if (item.IsMap() && item["name"]) {
      m.name = item["name"].as<std::string>();
      if (auto sort = item["sort"]) {
        auto text = sort.as<std::string>();
        if (text == "Int") {
          m.sort = Sort::Int;
        } else if (text == "Real") {
          m.sort = Sort::Real;
        } else {
          throw CatalogError(context + ": unknown sort '" + text + "'");
        }
      }
    } else {
      throw CatalogError(context + ": malformed metric entry");
    }
    if (!valid_identifier(m.name)) throw CatalogError(context + ": invalid metric name '" + m.name + "'");
    out.push_back(std::move(m));
  }
  return out;
}

void check_rule_shape(const ConstraintRule& rule, const std::string& context) {
  auto placeholders = rule.schema.placeholders();
  std::size_t selfs = 0;
  bool has_in = false, has_out = false, has_routed = false;
  for (const auto& p : placeholders) {
    switch (p.kind) {
      case PlaceholderKind::Self: ++selfs; break;
      case PlaceholderKind::In: has_in = true; break;
      case PlaceholderKind::Out: has_out = true; break;
      case PlaceholderKind::Routed: has_routed = true; break;
    }
  }
  switch (rule.category) {
    case RuleCategory::Intrinsic:
      if (has_in || has_out || has_routed) {
        throw CatalogError(context + ": intrinsic rules may only mention self metrics");
      }
      break;
    case RuleCategory::Incoming:
      if (selfs != 1 || has_out || has_routed) {
        throw CatalogError(context + ": incoming rules mention exactly one self metric plus 'in'");
      }
      break;
    case RuleCategory::Outgoing:
      if (!has_out || has_in) {
        throw CatalogError(context + ": outgoing rules must mention 'out' and not 'in'");
      }
      break;
  }
  if (!rule.edge_metrics.empty() && rule.category != RuleCategory::Outgoing) {
    throw CatalogError(context + ": edge_metrics only applies to outgoing rules");
  }
}

ConstraintRule parse_rule(const YAML::Node& node, const std::string& context) {
  if (!node.IsMap()) throw CatalogError(context + ": rule must be a mapping");
  ConstraintRule rule;
  auto category = node["category"] ? node["category"].as<std::string>() : std::string();
  if (category == "incoming") {
    rule.category = RuleCategory::Incoming;
  } else if (category == "intrinsic") {
    rule.category = RuleCategory::Intrinsic;
  } else if (category == "outgoing") {
    rule.category = RuleCategory::Outgoing;
  } else {
    throw CatalogError(context + ": unknown rule category '" + category + "'");
  }
  if (!node["formula"]) throw CatalogError(context + ": rule has no formula");
  rule.schema = parse_schema_formula(node["formula"].as<std::string>());
  rule.when = property_tests(node["when"], context);
  rule.unless = property_tests(node["unless"], context);
  rule.edge_metrics = string_list(node["edge_metrics"], context);
  check_rule_shape(rule, context);
  return rule;
}

EdgeSource parse_edge_source(const YAML::Node& node, const std::string& context) {
  EdgeSource source;
  auto paths = [&](const YAML::Node& spec) {
    if (!spec) return;
    if (!spec.IsMap()) throw CatalogError(context + ": reference edge source must be a mapping");
    source.include_paths = string_list(spec["include"], context);
    source.exclude_paths = string_list(spec["exclude"], context);
  };
  if (node["references"]) {
    source.kind = EdgeSource::Kind::References;
    paths(node["references"]);
  } else if (node["inbound_references"]) {
    source.kind = EdgeSource::Kind::InboundReferences;
    paths(node["inbound_references"]);
  } else if (auto a = node["attached"]) {
    source.kind = EdgeSource::Kind::Attached;
    if (!a["type"] || !a["link"] || !a["target"]) {
      throw CatalogError(context + ": attached edge source needs type, link and target");
    }
    source.attached_type = a["type"].as<std::string>();
    source.link_path = a["link"].as<std::string>();
    source.target_path = a["target"].as<std::string>();
    if (a["route"]) source.route_path = a["route"].as<std::string>();
    if (auto r = a["routes_from"]) {
      if (!r["type"] || !r["link"] || !r["key"]) {
        throw CatalogError(context + ": routes_from needs type, link and key");
      }
      source.route_type = r["type"].as<std::string>();
      source.route_link_path = r["link"].as<std::string>();
      source.route_key_path = r["key"].as<std::string>();
    }
  } else {
    throw CatalogError(context + ": unknown edge source");
  }
  return source;
}

ResourceTypeDescriptor parse_descriptor(const YAML::Node& node) {
  if (!node.IsMap() || !node["type"]) throw CatalogError("catalog type entry without 'type'");
  ResourceTypeDescriptor d;
  d.type_name = node["type"].as<std::string>();
  d.classification = Classification::Supported;
  const std::string context = "catalog type " + d.type_name;
  d.public_metrics = metric_list(node["public"], Visibility::Public, context);
  d.private_metrics = metric_list(node["private"], Visibility::Private, context);
  if (d.public_metrics.empty() && d.private_metrics.empty()) {
    throw CatalogError(context + ": supported types need at least one metric");
  }
  std::set<std::string> names;
  for (const auto& m : d.all_metrics()) {
    if (!names.insert(m.name).second) {
      throw CatalogError(context + ": metric '" + m.name + "' is declared twice");
    }
  }
  if (auto incoming = node["incoming"]) {
    auto mode = incoming.as<std::string>();
    if (mode != "default" && mode != "none") {
      throw CatalogError(context + ": incoming must be 'default' or 'none'");
    }
    d.default_incoming = mode == "default";
  }
  if (auto routes = node["routes"]) {
    for (const auto& kv : routes) {
      auto metric = kv.second.as<std::string>();
      const auto* m = d.find_metric(metric);
      if (m == nullptr || m->visibility != Visibility::Public) {
        throw CatalogError(context + ": route metric '" + metric + "' is not a public metric");
      }
      d.routes.emplace(kv.first.as<std::string>(), metric);
    }
  }
  if (auto rules = node["rules"]) {
    std::size_t index = 0;
    for (const auto& r : rules) {
      d.template_rules.push_back(parse_rule(r, context + " rule " + std::to_string(index++)));
    }
  }
  if (auto edges = node["edges"]) {
    for (const auto& e : edges) d.edge_sources.push_back(parse_edge_source(e, context));
  }
  return d;
}

}  // namespace

Catalog Catalog::from_yaml(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw CatalogError(std::string("malformed catalog: ") + e.what());
  }
  if (!root.IsMap()) throw CatalogError("catalog must be a mapping");

  Catalog catalog;
  try {
    catalog.non_dataflow_ = string_list(root["non_dataflow"], "non_dataflow");
    std::sort(catalog.non_dataflow_.begin(), catalog.non_dataflow_.end());
    if (std::adjacent_find(catalog.non_dataflow_.begin(), catalog.non_dataflow_.end()) !=
        catalog.non_dataflow_.end()) {
      throw CatalogError("non_dataflow lists a type twice");
    }
    if (auto types = root["types"]) {
      for (const auto& node : types) {
        auto d = parse_descriptor(node);
        if (std::binary_search(catalog.non_dataflow_.begin(), catalog.non_dataflow_.end(),
                               d.type_name)) {
          throw CatalogError("type " + d.type_name + " is both supported and non-dataflow");
        }
        auto name = d.type_name;
        if (!catalog.supported_.emplace(name, std::move(d)).second) {
          throw CatalogError("type " + name + " is declared twice");
        }
      }
    }
  } catch (const YAML::Exception& e) {
    throw CatalogError(std::string("malformed catalog: ") + e.what());
  }
  return catalog;
}

Catalog Catalog::load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CatalogError("cannot read catalog '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_yaml(buffer.str());
}

const Catalog& Catalog::bundled() {
  static const Catalog catalog = from_yaml(bundled_catalog_text());
  return catalog;
}

Classification Catalog::classify(std::string_view type_name) const {
  if (supported_.find(type_name) != supported_.end()) return Classification::Supported;
  if (std::binary_search(non_dataflow_.begin(), non_dataflow_.end(), type_name)) {
    return Classification::NonDataflow;
  }
  return Classification::Unknown;
}

const ResourceTypeDescriptor& Catalog::descriptor(std::string_view type_name) const {
  auto it = supported_.find(type_name);
  if (it == supported_.end()) {
    throw NotSupportedError("resource type '" + std::string(type_name) + "' is " +
                            std::string(to_string(classify(type_name))) + ", not Supported");
  }
  return it->second;
}

MetricSets Catalog::metrics_of(std::string_view type_name) const {
  const auto& d = descriptor(type_name);
  return {d.public_metrics, d.private_metrics};
}

std::vector<const ConstraintRule*> Catalog::rules_for(std::string_view type_name,
                                                      const PropertyValue& properties) const {
  std::vector<const ConstraintRule*> out;
  for (const auto& rule : descriptor(type_name).template_rules) {
    if (rule.applies_to(properties)) out.push_back(&rule);
  }
  return out;
}

std::vector<std::string> Catalog::supported_types() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : supported_) out.push_back(name);
  return out;
}

}  // namespace iac
