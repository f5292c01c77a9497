#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "iac/analysis.hpp"
#include "iac/process.hpp"
#include "iac/user_constraints.hpp"
#include "iac/template_model.hpp"

namespace iac::support {

inline std::string fixture(const std::string& name) { return std::string(IAC_FIXTURE_DIR) + "/" + name; }

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline TemplateModel load_fixture(const std::string& name) { return parse_template(read_text(fixture(name))); }

/// Properties of a single resource given as a YAML mapping body.
inline PropertyValue properties(const std::string& yaml_map) {
  auto model = parse_template("Resources:\n  X:\n    Type: Test::Props::Holder\n    Properties: " + yaml_map + "\n");
  return model.resources.at("X").properties;
}

/// The builtin solver, plus z3 when it is installed.
inline std::vector<SmtBackend> solvers() {
  std::vector<SmtBackend> out{SmtBackend::builtin()};
  if (auto z3 = find_on_path("z3")) out.push_back(SmtBackend::external(*z3));
  return out;
}

/// Random property values that switch catalog rules on and off.
inline PropertyValue random_properties(const std::string& type, std::mt19937& rng) {
  auto coin = [&] { return std::uniform_int_distribution<int>(0, 1)(rng) == 1; };
  std::string body = "{}";
  if (type == "AWS::SQS::Queue" && coin()) body = "{FifoQueue: true, ContentBasedDeduplication: true}";
  if (type == "AWS::DynamoDB::Table") {
    body = coin() ? "{BillingMode: PAY_PER_REQUEST, StreamSpecification: {StreamViewType: NEW_IMAGE}}"
                  : "{ProvisionedThroughput: {ReadCapacityUnits: 5, WriteCapacityUnits: 3}}";
  }
  if (type == "AWS::Kinesis::Stream" && coin()) body = "{ShardCount: 2}";
  if (type == "AWS::Lambda::Function" && coin()) body = "{MemorySize: 512, Timeout: 30}";
  if (type == "AWS::Events::Rule") body = coin() ? "{Targets: [{Id: a}, {Id: b}]}" : "{Targets: [{Id: a}]}";
  return properties(body);
}

/// A graph of up to `max_nodes` nodes over the catalog's supported types, with
/// an occasional Unknown-typed node. Ids are N0, N1, ...
inline ResourceGraph random_graph(std::mt19937& rng, std::size_t max_nodes,
                                  const Catalog& catalog = Catalog::bundled()) {
  auto types = catalog.supported_types();
  std::uniform_int_distribution<std::size_t> count(1, max_nodes);
  std::uniform_int_distribution<std::size_t> pick_type(0, types.size());  // == size: Unknown
  std::size_t n = count(rng);
  std::vector<NodeRecord> nodes;
  for (std::size_t i = 0; i < n; ++i) {
    NodeRecord node;
    node.logical_id = "N" + std::to_string(i);
    auto t = pick_type(rng);
    if (t == types.size()) {
      node.type_name = "Custom::Opaque";
      node.classification = Classification::Unknown;
      node.properties = properties("{}");
    } else {
      node.type_name = types[t];
      node.classification = Classification::Supported;
      node.properties = random_properties(node.type_name, rng);
    }
    nodes.push_back(std::move(node));
  }
  static const std::vector<std::string> methods = {"GET", "POST", "PUT", "PATCH", "DELETE", "ANY"};
  std::vector<Edge> edges;
  std::uniform_int_distribution<std::size_t> endpoint(0, n - 1);
  std::uniform_int_distribution<std::size_t> edge_count(0, 2 * n);
  std::uniform_int_distribution<std::size_t> pick_method(0, methods.size() - 1);
  for (std::size_t k = edge_count(rng); k > 0; --k) {
    Edge e{nodes[endpoint(rng)].logical_id, nodes[endpoint(rng)].logical_id, {}};
    if (e.source == e.target) continue;
    for (auto r = std::uniform_int_distribution<int>(0, 2)(rng); r > 0; --r) e.routes.insert(methods[pick_method(rng)]);
    edges.push_back(std::move(e));
  }
  return ResourceGraph::from_parts(std::move(nodes), std::move(edges));
}

/// One Int metric `x` per node; nodes carry no rules and no edges.
inline const Catalog& box_catalog() {
  static const Catalog c = Catalog::from_yaml(R"(
types:
  - type: Test::Box::Var
    public: [x]
  - type: Test::Box::RealVar
    public: [{name: x, sort: Real}]
)");
  return c;
}

/// Variables V0.x ... V<k-1>.x with only their basic constraints.
inline Analysis box_analysis(std::size_t k, bool real = false) {
  std::vector<NodeRecord> nodes;
  for (std::size_t i = 0; i < k; ++i) {
    nodes.push_back({"V" + std::to_string(i), real ? "Test::Box::RealVar" : "Test::Box::Var",
                     Classification::Supported, properties("{}")});
  }
  return Analysis::from_graph(ResourceGraph::from_parts(std::move(nodes), {}), box_catalog());
}

/// sum(coefficients[i] * V_i) <relation> constant, as a user-category constraint.
inline Constraint linear_constraint(const Analysis& a, const std::vector<long>& coefficients, Relation relation,
                                    long constant) {
  LinearExpr lhs;
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    if (coefficients[i] != 0) lhs.add_term(i, Rational(coefficients[i]));
  }
  Formula f{lhs, relation, LinearExpr::constant_of(Rational(constant))};
  return Constraint::generated(ConstraintCategory::User, std::nullopt, f, a.vars);
}

}  // namespace iac::support
