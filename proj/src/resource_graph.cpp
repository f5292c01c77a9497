#include "iac/resource_graph.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <stdexcept>

namespace iac {

namespace {

bool under(std::string_view path, std::string_view prefix) {
  return path == prefix ||
         (path.size() > prefix.size() && path.starts_with(prefix) && path[prefix.size()] == '.');
}

bool path_selected(std::string_view path, const EdgeSource& source) {
  auto is_under = [&](const std::string& p) { return under(path, p); };
  if (std::any_of(source.exclude_paths.begin(), source.exclude_paths.end(), is_under)) return false;
  return source.include_paths.empty() ||
         std::any_of(source.include_paths.begin(), source.include_paths.end(), is_under);
}

/// References made by `logical_id`, in path order.
std::vector<std::pair<std::string, std::string>> references_of(const ReferenceMap& refs,
                                                               const std::string& logical_id) {
  std::vector<std::pair<std::string, std::string>> out;
  for (auto it = refs.lower_bound({logical_id, ""}); it != refs.end() && it->first.first == logical_id;
       ++it) {
    out.emplace_back(it->first.second, it->second);
  }
  return out;
}

bool references_under(const ReferenceMap& refs, const std::string& from, std::string_view path,
                      const std::string& to) {
  for (const auto& [p, target] : references_of(refs, from)) {
    if (target == to && under(p, path)) return true;
  }
  return false;
}

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

std::string scalar_at(const PropertyValue& properties, std::string_view path) {
  const auto* v = properties.at_path(path);
  if (v == nullptr || v->scalar() == nullptr) return {};
  return v->scalar()->text;
}

/// "GET /items/{id}" -> "GET"; "$default" -> "ANY".
std::string route_label_from_key(const std::string& key) {
  if (key.empty()) return {};
  if (key == "$default") return "ANY";
  return upper(key.substr(0, key.find(' ')));
}

void attached_edges(const NodeRecord& node, const EdgeSource& source, const TemplateModel& model,
                    const ReferenceMap& refs, std::vector<Edge>& out) {
  for (const auto& [id, resource] : model.resources) {
    if (resource.type_name != source.attached_type) continue;
    if (!references_under(refs, id, source.link_path, node.logical_id)) continue;

    std::set<std::string> routes;
    if (!source.route_path.empty()) {
      auto label = upper(scalar_at(resource.properties, source.route_path));
      if (!label.empty()) routes.insert(label);
    }
    if (!source.route_type.empty()) {
      for (const auto& [route_id, route] : model.resources) {
        if (route.type_name != source.route_type) continue;
        if (!references_under(refs, route_id, source.route_link_path, id)) continue;
        auto label = route_label_from_key(scalar_at(route.properties, source.route_key_path));
        if (!label.empty()) routes.insert(label);
      }
    }
    for (const auto& [path, target] : references_of(refs, id)) {
      if (under(path, source.target_path)) out.push_back({node.logical_id, target, routes});
    }
  }
}

}  // namespace

ResourceGraph ResourceGraph::from_parts(std::vector<NodeRecord> nodes, std::vector<Edge> edges) {
  ResourceGraph g;
  std::sort(nodes.begin(), nodes.end(),
            [](const auto& a, const auto& b) { return a.logical_id < b.logical_id; });
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].classification == Classification::NonDataflow) {
      throw std::invalid_argument("non-dataflow node '" + nodes[i].logical_id + "' in graph");
    }
    if (i > 0 && nodes[i].logical_id == nodes[i - 1].logical_id) {
      throw std::invalid_argument("duplicate node '" + nodes[i].logical_id + "'");
    }
  }
  g.nodes_ = std::move(nodes);

  std::map<std::pair<std::string, std::string>, std::set<std::string>> merged;
  for (auto& e : edges) {
    if (e.source == e.target) continue;
    if (g.find(e.source) == nullptr || g.find(e.target) == nullptr) {
      throw std::invalid_argument("edge " + e.source + "->" + e.target + " names an absent node");
    }
    merged[{e.source, e.target}].merge(e.routes);
  }
  for (auto& [key, routes] : merged) g.edges_.push_back({key.first, key.second, std::move(routes)});
  return g;
}

const NodeRecord* ResourceGraph::find(std::string_view logical_id) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), logical_id,
                             [](const NodeRecord& n, std::string_view id) { return n.logical_id < id; });
  return it != nodes_.end() && it->logical_id == logical_id ? &*it : nullptr;
}

std::vector<const Edge*> ResourceGraph::in_edges(std::string_view logical_id) const {
  std::vector<const Edge*> out;
  for (const auto& e : edges_) {
    if (e.target == logical_id) out.push_back(&e);
  }
  return out;
}

std::vector<const Edge*> ResourceGraph::out_edges(std::string_view logical_id) const {
  std::vector<const Edge*> out;
  for (const auto& e : edges_) {
    if (e.source == logical_id) out.push_back(&e);
  }
  return out;
}

std::vector<Edge> infer_edges(const NodeRecord& node, const TemplateModel& model,
                              const ReferenceMap& references, const Catalog& catalog) {
  std::vector<Edge> candidates;
  if (node.classification != Classification::Supported) return candidates;

  for (const auto& source : catalog.descriptor(node.type_name).edge_sources) {
    switch (source.kind) {
      case EdgeSource::Kind::References:
        for (const auto& [path, target] : references_of(references, node.logical_id)) {
          if (path_selected(path, source)) candidates.push_back({node.logical_id, target, {}});
        }
        break;
      case EdgeSource::Kind::InboundReferences:
        for (const auto& [path, target] : references_of(references, node.logical_id)) {
          if (path_selected(path, source)) candidates.push_back({target, node.logical_id, {}});
        }
        break;
      case EdgeSource::Kind::Attached:
        attached_edges(node, source, model, references, candidates);
        break;
    }
  }

  // Only dataflow resources can be edge endpoints: a Lambda naming its IAM
  // role is not a trigger.
  std::vector<Edge> edges;
  for (auto& e : candidates) {
    if (e.source == e.target) continue;
    const auto* from = model.find(e.source);
    const auto* to = model.find(e.target);
    if (from == nullptr || to == nullptr) continue;
    if (catalog.classify(from->type_name) == Classification::NonDataflow ||
        catalog.classify(to->type_name) == Classification::NonDataflow) {
      continue;
    }
    edges.push_back(std::move(e));
  }
  return edges;
}

ResourceGraph build_graph(const TemplateModel& model, const Catalog& catalog) {
  auto references = resolve_references(model);
  std::vector<NodeRecord> nodes;
  for (const auto& [id, resource] : model.resources) {
    auto c = catalog.classify(resource.type_name);
    if (c == Classification::NonDataflow) continue;
    nodes.push_back({id, resource.type_name, c, resource.properties});
  }
  std::vector<Edge> edges;
  for (const auto& node : nodes) {
    auto found = infer_edges(node, model, references, catalog);
    edges.insert(edges.end(), std::make_move_iterator(found.begin()),
                 std::make_move_iterator(found.end()));
  }
  return ResourceGraph::from_parts(std::move(nodes), std::move(edges));
}

GraphStats graph_stats(const ResourceGraph& graph) {
  GraphStats s;
  s.node_count = graph.nodes().size();
  s.edge_count = graph.edges().size();
  std::vector<double> degrees;
  for (const auto& n : graph.nodes()) {
    if (n.classification != Classification::Supported) continue;
    degrees.push_back(static_cast<double>(graph.in_edges(n.logical_id).size()));
  }
  s.supported_node_count = degrees.size();
  if (degrees.empty()) return s;
  double sum = 0;
  for (double d : degrees) sum += d;
  s.mean_in_degree = sum / static_cast<double>(degrees.size());
  double squares = 0;
  for (double d : degrees) squares += (d - s.mean_in_degree) * (d - s.mean_in_degree);
  s.stddev_in_degree = std::sqrt(squares / static_cast<double>(degrees.size()));
  return s;
}

namespace {

std::string dot_quote(std::string_view text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string to_dot(const ResourceGraph& graph) {
  std::string out = "digraph resources {\n  rankdir=LR;\n";
  for (const auto& n : graph.nodes()) {
    out += "  " + dot_quote(n.logical_id) + " [label=\"" + n.logical_id + "\\n" + n.type_name + "\"";
    if (n.classification == Classification::Unknown) out += ", style=dashed";
    out += "];\n";
  }
  for (const auto& e : graph.edges()) {
    out += "  " + dot_quote(e.source) + " -> " + dot_quote(e.target);
    if (!e.routes.empty()) {
      std::string label;
      for (const auto& r : e.routes) label += (label.empty() ? "" : ",") + r;
      out += " [label=" + dot_quote(label) + "]";
    }
    out += ";\n";
  }
  return out + "}\n";
}

}  // namespace iac
