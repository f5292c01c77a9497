#include "iac/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "iac/analysis.hpp"
#include "iac/errors.hpp"
#include "iac/user_constraints.hpp"

namespace iac {

namespace {

using json = nlohmann::ordered_json;

struct Options {
  bool json = false;
  std::string dump_smt;
  std::string solver;
  std::string solver_mode = "auto";
  std::string catalog;
  double timeout_seconds = 10;

  std::string template_path;
  std::vector<std::string> app_constraints;
  std::string estimates;
  std::string target;
  std::string format = "dot";
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw Error("cannot write '" + path + "'");
}

json rational_json(const Rational& r) {
  if (is_integer(r)) {
    auto n = boost::multiprecision::numerator(r);
    if (n >= std::numeric_limits<std::int64_t>::min() && n <= std::numeric_limits<std::int64_t>::max()) {
      return n.convert_to<std::int64_t>();
    }
  }
  return to_string(r);
}

// Multi-line user terms printed on one report line.
std::string one_line(std::string_view text) {
  std::string out;
  bool space = false;
  for (char c : text) {
    if (c == ' ' || c == '\n' || c == '\t' || c == '\r') {
      space = !out.empty();
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += c;
  }
  return out;
}

std::string rational_text(const Rational& r) {
  if (is_integer(r)) return to_string(r);
  std::ostringstream s;
  s << to_string(r) << " (~" << std::setprecision(10) << to_double(r) << ")";
  return s.str();
}

json constraint_json(const ConstraintReport& c) {
  json j;
  j["name"] = c.name;
  j["category"] = std::string(to_string(c.category));
  j["anchor"] = c.anchor ? json(*c.anchor) : json(nullptr);
  j["formula"] = c.infix;
  j["smtlib"] = c.smtlib;
  return j;
}

json bound_json(const BoundValue& b) {
  json j;
  j["kind"] = std::string(to_string(b.kind));
  if (b.kind == BoundValue::Kind::Finite) {
    j["value"] = rational_json(b.value);
    j["attained"] = b.attained;
  }
  if (b.capped) j["capped"] = true;
  if (!b.note.empty()) j["note"] = b.note;
  return j;
}

std::string bound_text(const BoundValue& b) {
  std::string text;
  switch (b.kind) {
    case BoundValue::Kind::Finite: text = rational_text(b.value); break;
    case BoundValue::Kind::Unbounded: text = "unbounded"; break;
    case BoundValue::Kind::Infeasible: text = "infeasible (the constraints have no solution)"; break;
    case BoundValue::Kind::Unknown: text = "unknown"; break;
  }
  if (!b.note.empty()) text += " [" + b.note + "]";
  return text;
}

const std::vector<ConstraintCategory>& all_categories() {
  static const std::vector<ConstraintCategory> cats = {
      ConstraintCategory::Basic, ConstraintCategory::Incoming, ConstraintCategory::Intrinsic,
      ConstraintCategory::Outgoing, ConstraintCategory::User, ConstraintCategory::Estimate};
  return cats;
}

json counts_json(const ConstraintSet& set) {
  json j;
  for (auto c : all_categories()) j[std::string(to_string(c))] = set.count(c);
  j["total"] = set.size();
  return j;
}

json graph_json(const ResourceGraph& g) {
  json nodes = json::array();
  for (const auto& n : g.nodes()) {
    nodes.push_back({{"id", n.logical_id},
                     {"type", n.type_name},
                     {"classification", std::string(to_string(n.classification))}});
  }
  json edges = json::array();
  for (const auto& e : g.edges()) {
    json routes = json::array();
    for (const auto& r : e.routes) routes.push_back(r);
    edges.push_back({{"source", e.source}, {"target", e.target}, {"routes", routes}});
  }
  return {{"nodes", nodes}, {"edges", edges}};
}

class Runner {
 public:
  Runner(const Options& o, std::ostream& out) : o_(o), out_(out) {}

  int estimates_template_cmd() {
    load();
    if (o_.json) {
      json j = json::object();
      for (const auto& n : analysis_.graph.nodes()) {
        if (n.classification != Classification::Supported) continue;
        json metrics = json::object();
        for (const auto& m : catalog().descriptor(n.type_name).public_metrics) metrics[m.name] = nullptr;
        j[n.logical_id] = metrics;
      }
      out_ << j.dump(2) << "\n";
    } else {
      out_ << estimates_template(analysis_.graph, catalog());
    }
    return exit_code::kValid;
  }

  int check_cmd() {
    load();
    auto user = user_constraints();
    auto estimates = load_estimates_file();
    dump(assemble_constraints(analysis_, estimates, user));
    auto backend = make_backend();
    auto report = check_estimates(analysis_, estimates, user, backend);

    if (o_.json) {
      json j;
      j["command"] = "check";
      j["verdict"] = std::string(to_string(report.verdict));
      j["solver"] = backend.describe();
      if (report.verdict == Verdict::Invalid) {
        json conflicts = json::array();
        for (const auto& c : report.conflicts) conflicts.push_back(constraint_json(c));
        j["conflicting_constraints"] = conflicts;
        j["conflict_count"] = report.conflict_count;
        j["core_from_solver"] = report.core_from_solver;
      }
      if (report.verdict == Verdict::Valid) {
        json witness = json::object();
        for (const auto& [name, value] : report.witness) witness[name] = rational_json(value);
        j["witness"] = witness;
      }
      if (report.verdict == Verdict::Inconclusive) j["reason"] = report.reason;
      out_ << j.dump(2) << "\n";
    } else {
      out_ << "verdict: " << to_string(report.verdict) << "\n";
      out_ << "solver: " << backend.describe() << "\n";
      if (report.verdict == Verdict::Invalid) {
        out_ << "the estimates contradict these constraints";
        if (!report.core_from_solver) out_ << " (no unsat core available; listing all assumptions)";
        out_ << " (" << report.conflicts.size() << " of " << report.conflict_count << "):\n";
        for (const auto& c : report.conflicts) {
          out_ << "  [" << to_string(c.category);
          if (c.anchor) out_ << " @ " << *c.anchor;
          out_ << "] " << c.name << ": " << one_line(c.infix) << "\n";
          out_ << "      " << one_line(c.smtlib) << "\n";
        }
      } else if (report.verdict == Verdict::Valid) {
        std::size_t zeros = 0;
        out_ << "witness:\n";
        for (const auto& [name, value] : report.witness) {
          if (value == 0) {
            ++zeros;
            continue;
          }
          out_ << "  " << name << " = " << rational_text(value) << "\n";
        }
        if (zeros > 0) out_ << "  (" << zeros << " other variables are 0)\n";
      } else {
        out_ << "reason: " << report.reason << "\n";
      }
    }
    switch (report.verdict) {
      case Verdict::Valid: return exit_code::kValid;
      case Verdict::Invalid: return exit_code::kInvalid;
      case Verdict::Inconclusive: return exit_code::kInconclusive;
    }
    return exit_code::kError;
  }

  int bounds_cmd() {
    load();
    auto user = user_constraints();
    auto estimates = load_estimates_file();
    dump(assemble_constraints(analysis_, estimates, user));
    auto backend = make_backend();
    auto report = usage_bounds(analysis_, o_.target, estimates, user, backend);

    if (o_.json) {
      json j;
      j["command"] = "bounds";
      j["target"] = {{"node", report.node}, {"metric", report.metric}, {"symbol", report.symbol}};
      j["solver"] = backend.describe();
      j["lower"] = bound_json(report.lower);
      j["upper"] = bound_json(report.upper);
      j["assumptions"] = report.assumptions;
      out_ << j.dump(2) << "\n";
    } else {
      out_ << "target: " << report.node << "." << report.metric << "\n";
      out_ << "solver: " << backend.describe() << "\n";
      out_ << "lower: " << bound_text(report.lower) << "\n";
      out_ << "upper: " << bound_text(report.upper) << "\n";
      out_ << "assumptions:" << (report.assumptions.empty() ? " none\n" : "\n");
      for (const auto& a : report.assumptions) out_ << "  " << a << "\n";
    }
    auto kinds = {report.lower.kind, report.upper.kind};
    for (auto k : kinds) {
      if (k == BoundValue::Kind::Infeasible) return exit_code::kInvalid;
    }
    for (auto k : kinds) {
      if (k == BoundValue::Kind::Unknown) return exit_code::kInconclusive;
    }
    return exit_code::kValid;
  }

  int constraints_cmd() {
    load();
    const auto& set = analysis_.generated;
    dump(set);
    if (o_.json) {
      json list = json::array();
      for (std::size_t i = 0; i < set.size(); ++i) list.push_back(constraint_json(describe(set, i)));
      json j;
      j["command"] = "constraints";
      j["counts"] = counts_json(set);
      j["constraints"] = list;
      out_ << j.dump(2) << "\n";
      return exit_code::kValid;
    }
    for (auto cat : all_categories()) {
      if (cat == ConstraintCategory::User || cat == ConstraintCategory::Estimate) continue;
      out_ << to_string(cat) << " (" << set.count(cat) << "):\n";
      for (std::size_t i = 0; i < set.size(); ++i) {
        if (set[i].category() != cat) continue;
        out_ << "  " << set.name(i);
        if (set[i].anchor()) out_ << " @ " << *set[i].anchor();
        out_ << ": " << set[i].description() << "\n";
      }
    }
    out_ << "total: " << set.size() << "\n";
    return exit_code::kValid;
  }

  int graph_cmd() {
    load();
    bool as_json = o_.json || o_.format == "json";
    if (as_json) {
      out_ << graph_json(analysis_.graph).dump(2) << "\n";
    } else {
      out_ << to_dot(analysis_.graph);
    }
    return exit_code::kValid;
  }

  int stats_cmd() {
    auto start = std::chrono::steady_clock::now();
    load();
    auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    dump(analysis_.generated);
    auto s = graph_stats(analysis_.graph);
    const auto& set = analysis_.generated;
    if (o_.json) {
      json j;
      j["command"] = "stats";
      j["node_count"] = s.node_count;
      j["edge_count"] = s.edge_count;
      j["supported_node_count"] = s.supported_node_count;
      j["mean_in_degree"] = s.mean_in_degree;
      j["stddev_in_degree"] = s.stddev_in_degree;
      j["node_variables"] = analysis_.vars.node_variable_count();
      j["edge_variables"] = analysis_.vars.edge_variable_count();
      j["constraints"] = counts_json(set);
      j["analysis_seconds"] = elapsed;
      out_ << j.dump(2) << "\n";
      return exit_code::kValid;
    }
    out_ << std::fixed << std::setprecision(3);
    out_ << "nodes: " << s.node_count << " (supported " << s.supported_node_count << ")\n";
    out_ << "edges: " << s.edge_count << "\n";
    out_ << "mean in-degree: " << s.mean_in_degree << " (stddev " << s.stddev_in_degree << ")\n";
    out_ << "variables: " << analysis_.vars.node_variable_count() << " node, "
         << analysis_.vars.edge_variable_count() << " edge\n";
    out_ << "constraints:";
    for (auto cat : {ConstraintCategory::Basic, ConstraintCategory::Incoming, ConstraintCategory::Intrinsic,
                     ConstraintCategory::Outgoing}) {
      out_ << " " << to_string(cat) << " " << set.count(cat) << ",";
    }
    out_ << " total " << set.size() << "\n";
    out_ << "analysis time: " << elapsed << " s\n";
    return exit_code::kValid;
  }

 private:
  const Catalog& catalog() {
    if (o_.catalog.empty()) return Catalog::bundled();
    if (!custom_catalog_) custom_catalog_ = Catalog::load_file(o_.catalog);
    return *custom_catalog_;
  }

  void load() {
    auto model = parse_template(read_file(o_.template_path));
    analysis_ = Analysis::build(model, catalog());
  }

  std::vector<Constraint> user_constraints() {
    std::vector<Constraint> all;
    for (const auto& path : o_.app_constraints) {
      std::vector<Constraint> parsed;
      try {
        parsed = parse_user_constraints(read_file(path), analysis_.vars);
      } catch (const SmtSyntaxError& e) {
        throw SmtSyntaxError(path + ":" + e.what());
      }
      all.insert(all.end(), parsed.begin(), parsed.end());
    }
    return all;
  }

  EstimateSet load_estimates_file() {
    if (o_.estimates.empty()) return {};
    return load_estimates(read_file(o_.estimates), analysis_.vars);
  }

  SmtBackend make_backend() {
    SolverOptions options;
    options.timeout = std::chrono::milliseconds(static_cast<long long>(o_.timeout_seconds * 1000));
    SolverMode mode = o_.solver_mode == "generic"      ? SolverMode::Generic
                      : o_.solver_mode == "optimizing" ? SolverMode::Optimizing
                                                       : SolverMode::Auto;
    std::optional<std::string> path;
    if (!o_.solver.empty()) path = o_.solver;
    return SmtBackend::discover(path, mode, options);
  }

  void dump(const ConstraintSet& set) {
    if (o_.dump_smt.empty()) return;
    write_file(o_.dump_smt, emit_smtlib(set, analysis_.vars).text());
  }

  const Options& o_;
  std::ostream& out_;
  Analysis analysis_;
  std::optional<Catalog> custom_catalog_;
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Static usage analysis for CloudFormation templates", "iac-analysis"};
  app.fallthrough();
  app.require_subcommand(1);
  app.add_flag("--json", o.json, "Machine-readable JSON output");
  app.add_option("--dump-smt", o.dump_smt, "Write the solver script to FILE")->type_name("FILE");
  app.add_option("--solver", o.solver,
                 "Solver executable, or 'builtin' (default: $IAC_ANALYSIS_SOLVER, then z3/cvc5 on PATH)")
      ->type_name("PATH");
  app.add_option("--solver-mode", o.solver_mode, "How to drive the solver")
      ->check(CLI::IsMember({"auto", "generic", "optimizing"}));
  app.add_option("--catalog", o.catalog, "Resource catalog replacing the bundled one")
      ->type_name("FILE");
  app.add_option("--timeout", o.timeout_seconds, "Per-query solver timeout in seconds")
      ->check(CLI::PositiveNumber);

  auto* tmpl = app.add_subcommand("estimates-template", "Print a YAML skeleton for usage estimates");
  auto* check = app.add_subcommand("check", "Validate usage estimates against the constraints");
  auto* bounds = app.add_subcommand("bounds", "Minimum and maximum of one metric");
  auto* constraints = app.add_subcommand("constraints", "List the generated constraints");
  auto* graph = app.add_subcommand("graph", "Export the resource graph");
  auto* stats = app.add_subcommand("stats", "Graph statistics and constraint counts");

  for (auto* sub : {tmpl, check, bounds, constraints, graph, stats}) {
    sub->add_option("template", o.template_path, "CloudFormation template (YAML or JSON)")->required();
  }
  for (auto* sub : {check, bounds}) {
    sub->add_option("app_constraints", o.app_constraints, "SMT-LIB files of application constraints");
    sub->add_option("--estimates", o.estimates, "Filled-in estimates YAML")->type_name("FILE");
  }
  bounds->add_option("--target", o.target, "LogicalId.metric to bound")->required();
  graph->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"dot", "json"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_code::kValid;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_code::kValid;
  } catch (const CLI::ParseError& e) {
    err << "iac-analysis: " << e.what() << "\n";
    if (!o.json) err << "run 'iac-analysis --help' for usage\n";
    return exit_code::kError;
  }

  Runner runner(o, out);
  try {
    if (tmpl->parsed()) return runner.estimates_template_cmd();
    if (check->parsed()) return runner.check_cmd();
    if (bounds->parsed()) return runner.bounds_cmd();
    if (constraints->parsed()) return runner.constraints_cmd();
    if (graph->parsed()) return runner.graph_cmd();
    return runner.stats_cmd();
  } catch (const std::exception& e) {
    err << "iac-analysis: error: " << e.what() << "\n";
    if (o.json) out << json{{"error", e.what()}, {"exit_code", exit_code::kError}}.dump(2) << "\n";
    return exit_code::kError;
  }
}

}  // namespace iac
