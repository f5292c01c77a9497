#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "iac/resource_catalog.hpp"
#include "iac/template_model.hpp"

namespace iac {

struct NodeRecord {
  std::string logical_id;
  std::string type_name;
  Classification classification = Classification::Unknown;  // Supported or Unknown
  PropertyValue properties;
};

/// A directed dataflow edge: `source` induces requests on `target`.
/// `routes` carries API route labels (HTTP methods) when the source routes
/// requests by method.
struct Edge {
  std::string source;
  std::string target;
  std::set<std::string> routes;
};

/// Nodes sorted by logical id; edges sorted by (source, target), unique, no
/// self-loops, endpoints always present.
class ResourceGraph {
 public:
  ResourceGraph() = default;

  /// Sorts, merges duplicate edges (uniting their routes) and drops
  /// self-loops. Throws std::invalid_argument for duplicate node ids,
  /// NonDataflow nodes, or edges naming absent nodes.
  static ResourceGraph from_parts(std::vector<NodeRecord> nodes, std::vector<Edge> edges);

  const std::vector<NodeRecord>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }

  const NodeRecord* find(std::string_view logical_id) const;
  std::vector<const Edge*> in_edges(std::string_view logical_id) const;
  std::vector<const Edge*> out_edges(std::string_view logical_id) const;

 private:
  std::vector<NodeRecord> nodes_;
  std::vector<Edge> edges_;
};

/// Dataflow edges discovered from one node's edge sources. Only the node's
/// own properties and resources wired directly to it are inspected.
std::vector<Edge> infer_edges(const NodeRecord& node, const TemplateModel& model,
                              const ReferenceMap& references, const Catalog& catalog);

/// All non-NonDataflow resources become nodes; Unknown-typed resources are
/// kept as opaque nodes with no edge sources of their own.
ResourceGraph build_graph(const TemplateModel& model, const Catalog& catalog);

struct GraphStats {
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  std::size_t supported_node_count = 0;
  double mean_in_degree = 0;    // over supported nodes
  double stddev_in_degree = 0;  // population standard deviation
};

GraphStats graph_stats(const ResourceGraph& graph);

/// Graphviz rendering: one digraph, node labels "logical_id\ntype_name".
std::string to_dot(const ResourceGraph& graph);

}  // namespace iac
