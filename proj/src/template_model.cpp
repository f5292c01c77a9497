#include "iac/template_model.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cctype>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "iac/errors.hpp"
#include "json.hpp"

namespace iac {

using OrderedJson = nlohmann::ordered_json;

const PropertyValue* PropertyValue::get(std::string_view key) const {
  const auto* m = map();
  if (m == nullptr) return nullptr;
  for (const auto& [k, v] : *m) {
    if (k == key) return &v;
  }
  return nullptr;
}

const PropertyValue* PropertyValue::at_path(std::string_view dotted_path) const {
  const PropertyValue* current = this;
  while (current != nullptr && !dotted_path.empty()) {
    auto dot = dotted_path.find('.');
    auto segment = dotted_path.substr(0, dot);
    dotted_path = dot == std::string_view::npos ? std::string_view() : dotted_path.substr(dot + 1);
    if (const auto* l = current->list()) {
      std::size_t index = 0;
      auto [ptr, ec] = std::from_chars(segment.data(), segment.data() + segment.size(), index);
      if (ec != std::errc() || ptr != segment.data() + segment.size() || index >= l->size()) {
        return nullptr;
      }
      current = &(*l)[index];
    } else {
      current = current->get(segment);
    }
  }
  return current;
}

std::string_view to_string(IntrinsicKind kind) {
  switch (kind) {
    case IntrinsicKind::Ref: return "Ref";
    case IntrinsicKind::GetAtt: return "GetAtt";
    case IntrinsicKind::Sub: return "Sub";
    case IntrinsicKind::Join: return "Join";
    case IntrinsicKind::Other: return "Other";
  }
  return "Other";
}

const ResourceDecl* TemplateModel::find(std::string_view logical_id) const {
  auto it = resources.find(std::string(logical_id));
  return it == resources.end() ? nullptr : &it->second;
}

namespace {

PropertyValue make_scalar(ScalarKind kind, std::string text) {
  return PropertyValue{Scalar{kind, std::move(text)}};
}

PropertyValue single_key_map(std::string key, PropertyValue value) {
  PropertyMap m;
  m.emplace_back(std::move(key), std::move(value));
  return PropertyValue{std::move(m)};
}

bool is_intrinsic_key(std::string_view key) {
  return key == "Ref" || key.starts_with("Fn::");
}

// ---------------------------------------------------------------------------
// Raw conversion from YAML / JSON. Short-form tags become single-key maps so
// that both syntaxes share one normalization pass.

ScalarKind classify_plain_scalar(const std::string& text) {
  static const std::regex number(R"([-+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?)");
  if (text.empty() || text == "~" || text == "null" || text == "Null" || text == "NULL") {
    return ScalarKind::Null;
  }
  if (text == "true" || text == "True" || text == "TRUE" || text == "false" ||
      text == "False" || text == "FALSE") {
    return ScalarKind::Bool;
  }
  if (std::regex_match(text, number)) return ScalarKind::Number;
  return ScalarKind::String;
}

std::string long_form_name(const std::string& tag) {
  // "!Ref" -> "Ref", "!GetAtt" -> "Fn::GetAtt"
  std::string name = tag.substr(1);
  if (name == "Ref" || name == "Condition") return name;
  return "Fn::" + name;
}

PropertyValue from_yaml(const YAML::Node& node) {
  PropertyValue raw;
  switch (node.Type()) {
    case YAML::NodeType::Undefined:
    case YAML::NodeType::Null:
      raw = make_scalar(ScalarKind::Null, "");
      break;
    case YAML::NodeType::Scalar: {
      const std::string& text = node.Scalar();
      raw = make_scalar(node.Tag() == "?" ? classify_plain_scalar(text) : ScalarKind::String, text);
      break;
    }
    case YAML::NodeType::Sequence: {
      PropertyList items;
      for (const auto& item : node) items.push_back(from_yaml(item));
      raw = PropertyValue{std::move(items)};
      break;
    }
    case YAML::NodeType::Map: {
      PropertyMap members;
      for (const auto& kv : node) members.emplace_back(kv.first.as<std::string>(), from_yaml(kv.second));
      raw = PropertyValue{std::move(members)};
      break;
    }
  }
  const std::string& tag = node.Tag();
  if (tag.size() > 1 && tag[0] == '!' && tag[1] != '!') {
    return single_key_map(long_form_name(tag), std::move(raw));
  }
  return raw;
}

PropertyValue from_json(const OrderedJson& j) {
  switch (j.type()) {
    case OrderedJson::value_t::null:
      return make_scalar(ScalarKind::Null, "");
    case OrderedJson::value_t::boolean:
      return make_scalar(ScalarKind::Bool, j.get<bool>() ? "true" : "false");
    case OrderedJson::value_t::number_integer:
    case OrderedJson::value_t::number_unsigned:
    case OrderedJson::value_t::number_float:
      return make_scalar(ScalarKind::Number, j.dump());
    case OrderedJson::value_t::string:
      return make_scalar(ScalarKind::String, j.get<std::string>());
    case OrderedJson::value_t::array: {
      PropertyList items;
      for (const auto& item : j) items.push_back(from_json(item));
      return PropertyValue{std::move(items)};
    }
    case OrderedJson::value_t::object: {
      PropertyMap members;
      for (const auto& [k, v] : j.items()) members.emplace_back(k, from_json(v));
      return PropertyValue{std::move(members)};
    }
    default:
      return make_scalar(ScalarKind::String, j.dump());
  }
}

// ---------------------------------------------------------------------------
// Normalization: single-key `Ref` / `Fn::*` maps become Intrinsic leaves.

class Normalizer {
 public:
  explicit Normalizer(const std::set<std::string>& ids) : ids_(ids) {}

  PropertyValue operator()(const PropertyValue& raw) const {
    if (const auto* m = raw.map()) {
      if (m->size() == 1 && is_intrinsic_key(m->front().first)) {
        return make_intrinsic(m->front().first, (*this)(m->front().second));
      }
      PropertyMap out;
      for (const auto& [k, v] : *m) out.emplace_back(k, (*this)(v));
      return PropertyValue{std::move(out)};
    }
    if (const auto* l = raw.list()) {
      PropertyList out;
      for (const auto& v : *l) out.push_back((*this)(v));
      return PropertyValue{std::move(out)};
    }
    return raw;
  }

 private:
  PropertyValue make_intrinsic(const std::string& function, PropertyValue argument) const {
    Intrinsic leaf;
    leaf.function = function;
    if (function == "Ref") {
      leaf.kind = IntrinsicKind::Ref;
      if (const auto* s = argument.scalar(); s != nullptr && ids_.contains(s->text)) {
        leaf.targets.push_back(s->text);
      }
    } else if (function == "Fn::GetAtt") {
      leaf.kind = IntrinsicKind::GetAtt;
      if (const auto* s = argument.scalar()) {
        // "Resource.Attr.Sub" -> [Resource, "Attr.Sub"]
        auto dot = s->text.find('.');
        PropertyList parts;
        parts.push_back(make_scalar(ScalarKind::String, s->text.substr(0, dot)));
        if (dot != std::string::npos) {
          parts.push_back(make_scalar(ScalarKind::String, s->text.substr(dot + 1)));
        }
        argument = PropertyValue{std::move(parts)};
      }
      if (const auto* l = argument.list(); l != nullptr && !l->empty()) {
        if (const auto* s = l->front().scalar(); s != nullptr && ids_.contains(s->text)) {
          leaf.targets.push_back(s->text);
        }
      }
    } else if (function == "Fn::Sub") {
      leaf.kind = IntrinsicKind::Sub;
      const PropertyValue* text_arg = &argument;
      const PropertyValue* vars = nullptr;
      if (const auto* l = argument.list(); l != nullptr && !l->empty()) {
        text_arg = &l->front();
        if (l->size() > 1) vars = &(*l)[1];
      }
      if (const auto* s = text_arg->scalar()) scan_sub(s->text, vars, leaf.targets);
    } else if (function == "Fn::Join") {
      leaf.kind = IntrinsicKind::Join;
    } else {
      leaf.kind = IntrinsicKind::Other;
    }
    leaf.argument = std::make_shared<const PropertyValue>(std::move(argument));
    return PropertyValue{std::move(leaf)};
  }

  void scan_sub(const std::string& text, const PropertyValue* vars,
                std::vector<std::string>& targets) const {
    std::size_t pos = 0;
    while ((pos = text.find("${", pos)) != std::string::npos) {
      auto close = text.find('}', pos + 2);
      if (close == std::string::npos) break;
      std::string name = text.substr(pos + 2, close - pos - 2);
      pos = close + 1;
      if (name.empty() || name.front() == '!') continue;  // ${!Literal}
      std::string base = name.substr(0, name.find('.'));
      if (vars != nullptr && (vars->get(name) != nullptr || vars->get(base) != nullptr)) continue;
      if (ids_.contains(base) &&
          std::find(targets.begin(), targets.end(), base) == targets.end()) {
        targets.push_back(base);
      }
    }
  }

  const std::set<std::string>& ids_;
};

// ---------------------------------------------------------------------------

bool valid_logical_id(const std::string& id) {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

bool valid_type_name(const std::string& type) {
  std::vector<std::string> segments;
  std::size_t start = 0;
  while (true) {
    auto sep = type.find("::", start);
    segments.push_back(type.substr(start, sep == std::string::npos ? sep : sep - start));
    if (sep == std::string::npos) break;
    start = sep + 2;
  }
  if (std::any_of(segments.begin(), segments.end(), [](const auto& s) { return s.empty(); })) {
    return false;
  }
  return segments.size() == 3 || (segments.size() == 2 && segments[0] == "Custom");
}

std::string scalar_text(const PropertyValue* v) {
  if (v == nullptr) return {};
  if (const auto* s = v->scalar()) return s->text;
  return {};
}

TemplateModel build_model(const PropertyValue& root, SourceFormat format) {
  const auto* top = root.map();
  if (top == nullptr) throw SchemaError("template is not a mapping; missing 'Resources' section");
  const PropertyValue* resources = root.get("Resources");
  if (resources == nullptr) throw SchemaError("template has no 'Resources' section");
  const auto* resource_map = resources->map();
  if (resource_map == nullptr) throw SchemaError("'Resources' section is not a mapping");

  std::set<std::string> ids;
  for (const auto& [id, _] : *resource_map) {
    if (!valid_logical_id(id)) throw SchemaError("invalid logical id '" + id + "'");
    if (!ids.insert(id).second) throw SchemaError("duplicate logical id '" + id + "'");
  }

  Normalizer normalize(ids);
  TemplateModel model;
  model.raw_format = format;
  for (const auto& [id, decl] : *resource_map) {
    if (decl.map() == nullptr) throw SchemaError("resource '" + id + "' is not a mapping");
    const auto* type = decl.get("Type");
    if (type == nullptr || type->scalar() == nullptr) {
      throw SchemaError("resource '" + id + "' has no 'Type'");
    }
    std::string type_name = type->scalar()->text;
    if (!valid_type_name(type_name)) {
      throw SchemaError("resource '" + id + "' has malformed type name '" + type_name + "'");
    }
    PropertyValue properties{PropertyMap{}};
    if (const auto* props = decl.get("Properties")) {
      if (props->map() != nullptr) {
        properties = normalize(*props);
      } else if (const auto* s = props->scalar(); s == nullptr || s->kind != ScalarKind::Null) {
        throw SchemaError("resource '" + id + "' has non-mapping 'Properties'");
      }
    }
    model.resources.emplace(id, ResourceDecl{id, std::move(type_name), std::move(properties)});
  }

  if (const auto* params = root.get("Parameters"); params != nullptr && params->map() != nullptr) {
    for (const auto& [name, decl] : *params->map()) {
      Parameter p;
      p.name = name;
      p.type = scalar_text(decl.get("Type"));
      if (const auto* d = decl.get("Default"); d != nullptr && d->scalar() != nullptr) {
        p.default_value = d->scalar()->text;
      }
      model.parameters.emplace(name, std::move(p));
    }
  }
  return model;
}

PropertyValue parse_json_text(std::string_view source) {
  // nlohmann keeps the last of duplicate keys; catch duplicates among the
  // resource logical ids before that happens.
  std::string top_key;
  std::vector<std::set<std::string>> open_objects;
  std::string duplicate;
  auto callback = [&](int depth, nlohmann::json::parse_event_t event, OrderedJson& parsed) {
    using Event = nlohmann::json::parse_event_t;
    if (event == Event::object_start) {
      open_objects.emplace_back();
    } else if (event == Event::object_end) {
      if (!open_objects.empty()) open_objects.pop_back();
    } else if (event == Event::key) {
      auto key = parsed.get<std::string>();
      if (depth == 1) top_key = key;
      if (depth == 2 && top_key == "Resources" && !open_objects.empty() &&
          !open_objects.back().insert(key).second && duplicate.empty()) {
        duplicate = key;
      }
    }
    return true;
  };
  OrderedJson j;
  try {
    j = OrderedJson::parse(source.begin(), source.end(), callback);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!duplicate.empty()) throw SchemaError("duplicate logical id '" + duplicate + "'");
  return from_json(j);
}

PropertyValue parse_yaml_text(std::string_view source) {
  YAML::Node doc;
  try {
    doc = YAML::Load(std::string(source));
  } catch (const YAML::Exception& e) {
    throw ParseError(std::string("malformed YAML: ") + e.what());
  }
  if (doc.IsMap()) {
    if (auto resources = doc["Resources"]; resources && resources.IsMap()) {
      std::set<std::string> seen;
      for (const auto& kv : resources) {
        auto id = kv.first.as<std::string>();
        if (!seen.insert(id).second) throw SchemaError("duplicate logical id '" + id + "'");
      }
    }
  }
  return from_yaml(doc);
}

OrderedJson to_json(const PropertyValue& value) {
  if (const auto* s = value.scalar()) {
    switch (s->kind) {
      case ScalarKind::Null: return nullptr;
      case ScalarKind::Bool: return s->text == "true" || s->text == "True" || s->text == "TRUE";
      case ScalarKind::Number: {
        auto parsed = OrderedJson::parse(s->text, nullptr, false);
        return parsed.is_discarded() ? OrderedJson(s->text) : parsed;
      }
      case ScalarKind::String: return s->text;
    }
  }
  if (const auto* l = value.list()) {
    auto arr = OrderedJson::array();
    for (const auto& v : *l) arr.push_back(to_json(v));
    return arr;
  }
  if (const auto* m = value.map()) {
    auto obj = OrderedJson::object();
    for (const auto& [k, v] : *m) obj[k] = to_json(v);
    return obj;
  }
  const auto& leaf = *value.intrinsic();
  OrderedJson obj = OrderedJson::object();
  obj[leaf.function] = leaf.argument ? to_json(*leaf.argument) : OrderedJson(nullptr);
  return obj;
}

std::string join_path(const std::string& prefix, const std::string& segment) {
  return prefix.empty() ? segment : prefix + "." + segment;
}

void visit_references(
    const PropertyValue& value, const std::string& path,
    const std::function<void(const std::string&, const std::string&)>& visit) {
  if (const auto* m = value.map()) {
    for (const auto& [k, v] : *m) visit_references(v, join_path(path, k), visit);
  } else if (const auto* l = value.list()) {
    for (std::size_t i = 0; i < l->size(); ++i) {
      visit_references((*l)[i], join_path(path, std::to_string(i)), visit);
    }
  } else if (const auto* leaf = value.intrinsic()) {
    for (const auto& target : leaf->targets) {
      visit(leaf->kind == IntrinsicKind::Sub ? join_path(path, "${" + target + "}") : path, target);
    }
    if (leaf->argument) visit_references(*leaf->argument, join_path(path, leaf->function), visit);
  }
}

}  // namespace

TemplateModel parse_template(std::string_view source, FormatHint hint) {
  auto first = std::find_if(source.begin(), source.end(),
                            [](char c) { return !std::isspace(static_cast<unsigned char>(c)); });
  if (first == source.end()) throw ParseError("template source is empty");

  SourceFormat format = SourceFormat::Yaml;
  if (hint == FormatHint::Json || (hint == FormatHint::Auto && *first == '{')) {
    format = SourceFormat::Json;
  }
  PropertyValue root = format == SourceFormat::Json ? parse_json_text(source) : parse_yaml_text(source);
  return build_model(root, format);
}

TemplateModel load_template_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read template '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_template(buffer.str());
}

std::string emit_template_json(const TemplateModel& model) {
  OrderedJson root = OrderedJson::object();
  if (!model.parameters.empty()) {
    auto params = OrderedJson::object();
    for (const auto& [name, p] : model.parameters) {
      auto decl = OrderedJson::object();
      decl["Type"] = p.type;
      if (p.default_value) decl["Default"] = *p.default_value;
      params[name] = decl;
    }
    root["Parameters"] = params;
  }
  auto resources = OrderedJson::object();
  for (const auto& [id, r] : model.resources) {
    auto decl = OrderedJson::object();
    decl["Type"] = r.type_name;
    decl["Properties"] = to_json(r.properties);
    resources[id] = decl;
  }
  root["Resources"] = resources;
  return root.dump(2);
}

void for_each_reference(
    const PropertyValue& value,
    const std::function<void(const std::string& path, const std::string& target)>& visit) {
  visit_references(value, "", visit);
}

ReferenceMap resolve_references(const TemplateModel& model) {
  ReferenceMap refs;
  for (const auto& [id, r] : model.resources) {
    for_each_reference(r.properties, [&](const std::string& path, const std::string& target) {
      refs.emplace(ReferenceSite{id, path}, target);
    });
  }
  return refs;
}

}  // namespace iac
