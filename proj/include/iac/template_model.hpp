#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace iac {

enum class ScalarKind { Null, Bool, Number, String };

struct Scalar {
  ScalarKind kind = ScalarKind::Null;
  std::string text;

  friend bool operator==(const Scalar&, const Scalar&) = default;
};

/// CloudFormation intrinsic functions, normalized to their long form.
enum class IntrinsicKind { Ref, GetAtt, Sub, Join, Other };

struct PropertyValue;
using PropertyList = std::vector<PropertyValue>;
using PropertyMap = std::vector<std::pair<std::string, PropertyValue>>;

/// An intrinsic-function leaf of a property tree.
///
/// `targets` holds the logical ids of resources in the same template that the
/// leaf itself names: at most one for Ref/GetAtt, any number for Sub. An empty
/// list means the leaf is Opaque (a parameter, a pseudo-parameter, or a
/// function we do not interpret). Intrinsics nested inside the argument carry
/// their own targets.
struct Intrinsic {
  IntrinsicKind kind = IntrinsicKind::Other;
  std::string function;  // "Ref", "Fn::GetAtt", "Fn::Sub", ...
  std::vector<std::string> targets;
  std::shared_ptr<const PropertyValue> argument;

  bool resolved() const { return !targets.empty(); }
};

struct PropertyValue {
  std::variant<Scalar, PropertyList, PropertyMap, Intrinsic> node;

  const Scalar* scalar() const { return std::get_if<Scalar>(&node); }
  const PropertyList* list() const { return std::get_if<PropertyList>(&node); }
  const PropertyMap* map() const { return std::get_if<PropertyMap>(&node); }
  const Intrinsic* intrinsic() const { return std::get_if<Intrinsic>(&node); }

  /// Map member lookup; nullptr when absent or when this is not a map.
  const PropertyValue* get(std::string_view key) const;

  /// Walks a dotted path of map keys and list indices ("A.B.0.C").
  const PropertyValue* at_path(std::string_view dotted_path) const;
};

std::string_view to_string(IntrinsicKind kind);

struct ResourceDecl {
  std::string logical_id;
  std::string type_name;
  PropertyValue properties;  // always a map (possibly empty)
};

struct Parameter {
  std::string name;
  std::string type;
  std::optional<std::string> default_value;
};

enum class SourceFormat { Yaml, Json };
enum class FormatHint { Auto, Yaml, Json };

/// A parsed CloudFormation template. Only the `Resources` and `Parameters`
/// sections are retained; parameters are recorded but never evaluated.
struct TemplateModel {
  std::map<std::string, ResourceDecl> resources;
  std::map<std::string, Parameter> parameters;
  SourceFormat raw_format = SourceFormat::Yaml;

  const ResourceDecl* find(std::string_view logical_id) const;
};

/// Throws ParseError for malformed YAML/JSON and SchemaError for a missing
/// `Resources` section, duplicate or empty logical ids, or bad type names.
TemplateModel parse_template(std::string_view source, FormatHint hint = FormatHint::Auto);

TemplateModel load_template_file(const std::filesystem::path& path);

/// Long-form JSON rendering of the retained sections. Parsing the output
/// yields the same resources, types and intrinsic targets.
std::string emit_template_json(const TemplateModel& model);

/// (logical-id, property path) of a reference site.
using ReferenceSite = std::pair<std::string, std::string>;
using ReferenceMap = std::map<ReferenceSite, std::string>;

/// Every resolvable cross-resource reference in the model. Sub strings yield
/// one entry per `${LogicalId}` occurrence, keyed "<path>.${LogicalId}".
ReferenceMap resolve_references(const TemplateModel& model);

/// Visits each resolved target under `value`; `path` is relative to `value`.
void for_each_reference(
    const PropertyValue& value,
    const std::function<void(const std::string& path, const std::string& target)>& visit);

}  // namespace iac
