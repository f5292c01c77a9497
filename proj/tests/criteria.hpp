#pragma once

// Checks behind the acceptance binary; the property tests run the same code.

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "iac/analysis.hpp"
#include "iac/process.hpp"
#include "iac/user_constraints.hpp"
#include "support.hpp"
#include "synthetic.hpp"

namespace iac::support {

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail.clear();
    pass = false;
    detail += (detail.empty() ? "" : "; ") + why;
  }
};

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

inline std::vector<Constraint> user_file(const Analysis& a, const std::string& name) {
  return parse_user_constraints(read_text(fixture(name)), a.vars);
}

inline std::string bound_str(const BoundValue& b) {
  return b.kind == BoundValue::Kind::Finite ? to_string(b.value) : std::string(to_string(b.kind));
}

// ---------------------------------------------------------------------------
// 1. Motivating example.

inline Outcome motivating_example(const SmtBackend& backend) {
  Outcome o;
  auto start = Clock::now();
  auto a = Analysis::build(load_fixture("motivating.yaml"), Catalog::bundled());
  auto user = user_file(a, "motivating_app.smt2");
  auto workload = user_file(a, "motivating_workload.smt2");
  user.insert(user.end(), workload.begin(), workload.end());

  auto w = usage_bounds(a, "E.monthly_dynamodb_w", {}, user, backend);
  if (w.lower.kind != BoundValue::Kind::Finite || w.lower.value != 0 || w.upper.kind != BoundValue::Kind::Finite ||
      w.upper.value != 3000000) {
    o.fail("w bounds [" + bound_str(w.lower) + ", " + bound_str(w.upper) + "], expected [0, 3000000]");
  }
  auto r = usage_bounds(a, "E.monthly_dynamodb_r", {}, user, backend);
  if (r.upper.kind != BoundValue::Kind::Finite || r.upper.value != 2000000) {
    o.fail("r upper " + bound_str(r.upper) + ", expected 2000000");
  }
  auto verdict = [&](long writes) {
    EstimateSet e;
    e.set("A", "monthly_POSTs", Rational(1000000));
    e.set("E", "monthly_dynamodb_w", Rational(writes));
    return check_estimates(a, e, user, backend).verdict;
  };
  if (auto v = verdict(3000001); v != Verdict::Invalid) o.fail("w=3000001 gave " + std::string(to_string(v)));
  if (auto v = verdict(2999999); v != Verdict::Valid) o.fail("w=2999999 gave " + std::string(to_string(v)));
  auto elapsed = seconds_since(start);
  if (elapsed >= 2.0) o.fail("took " + std::to_string(elapsed) + " s");
  if (o.pass) {
    std::ostringstream s;
    s << backend.describe() << ": w in [0, 3000000], r <= 2000000, " << elapsed << " s";
    o.detail = s.str();
  }
  return o;
}

// ---------------------------------------------------------------------------
// 2. Case study, through the executable.

inline ProcessResult cli(const std::vector<std::string>& args) {
  std::vector<std::string> argv{IAC_CLI_PATH};
  argv.insert(argv.end(), args.begin(), args.end());
  return run_process(argv, "", std::chrono::seconds(60));
}

inline Outcome case_study(const std::vector<std::string>& solver_args) {
  Outcome o;
  auto tmpl = fixture("url_shortener.yaml");
  auto t = cli({"estimates-template", tmpl});
  if (t.exit_code != 0) o.fail("estimates-template exit " + std::to_string(t.exit_code));
  for (const char* key : {"apigateway:\n", "  monthly_GETs: ~\n", "  monthly_PATCHs: ~\n", "  monthly_DELETEs: ~\n",
                          "dynamodb_table:\n  monthly_dynamodb_r: ~\n"}) {
    if (t.out.find(key) == std::string::npos) o.fail(std::string("template lacks ") + key);
  }
  auto check = [&](const char* estimates) {
    auto args = solver_args;
    for (const auto& a : {std::string("check"), tmpl, fixture("app_constraints.smt2"), std::string("--estimates"),
                          fixture(estimates)}) {
      args.push_back(a);
    }
    return cli(args);
  };
  auto bad = check("estimates_underestimated.yaml");
  if (bad.exit_code != 1) o.fail("underestimate exit " + std::to_string(bad.exit_code) + " " + bad.err);
  if (bad.out.find("user0") == std::string::npos) o.fail("report does not name the user constraint");
  auto good = check("estimates_corrected.yaml");
  if (good.exit_code != 0) o.fail("corrected exit " + std::to_string(good.exit_code) + " " + good.err);
  auto counts = nlohmann::json::parse(cli({"--json", "constraints", tmpl}).out)["counts"];
  for (const char* cat : {"basic", "incoming", "intrinsic", "outgoing"}) {
    if (counts[cat].get<int>() == 0) o.fail(std::string("no ") + cat + " constraints");
  }
  if (o.pass) {
    o.detail = "exit 1 then 0; " + counts.dump();
  }
  return o;
}

// ---------------------------------------------------------------------------
// 3. Scoping, basics and bijections on random graphs.

inline Outcome scoping_suite(unsigned seed, int graphs = 200) {
  Outcome o;
  std::mt19937 rng(seed);
  const auto& cat = Catalog::bundled();
  std::size_t total = 0;
  for (int g = 0; g < graphs && o.pass; ++g) {
    auto graph = random_graph(rng, 20);
    auto vars = instantiate_variables(graph, cat);
    auto set = generate_constraints(graph, vars, cat);
    total += set.size();
    std::size_t expect_nv = 0, expect_ev = 0;
    for (const auto& n : graph.nodes()) {
      if (n.classification != Classification::Supported) continue;
      auto m = cat.metrics_of(n.type_name);
      expect_nv += m.public_metrics.size() + m.private_metrics.size();
    }
    for (const auto& e : graph.edges()) {
      const auto* t = graph.find(e.target);
      if (t->classification == Classification::Supported) expect_ev += cat.metrics_of(t->type_name).public_metrics.size();
    }
    if (vars.node_variable_count() != expect_nv || vars.edge_variable_count() != expect_ev) {
      o.fail("graph " + std::to_string(g) + ": |NV|=" + std::to_string(vars.node_variable_count()) + " expected " +
             std::to_string(expect_nv) + ", |EV|=" + std::to_string(vars.edge_variable_count()) + " expected " +
             std::to_string(expect_ev));
    }
    std::vector<int> basics(vars.size(), 0);
    for (const auto& c : set.items()) {
      if (c.category() == ConstraintCategory::Basic && c.free_vars().size() == 1) ++basics[c.free_vars()[0]];
      auto v = validate_scoping(c, graph, vars);
      if (!v.empty()) o.fail("graph " + std::to_string(g) + ": " + v[0].constraint + ": " + v[0].reason);
    }
    for (std::size_t i = 0; i < basics.size(); ++i) {
      if (basics[i] != 1) o.fail("graph " + std::to_string(g) + ": " + vars.name_of(i) + " has " +
                                 std::to_string(basics[i]) + " basic constraints");
    }
  }
  if (o.pass) o.detail = std::to_string(graphs) + " graphs, " + std::to_string(total) + " constraints";
  return o;
}

// ---------------------------------------------------------------------------
// 4. Node-locality under graph surgery.

inline std::vector<std::string> anchored_canonical(const ResourceGraph& graph, const std::string& node) {
  const auto& cat = Catalog::bundled();
  auto vars = instantiate_variables(graph, cat);
  auto set = generate_constraints(graph, vars, cat);
  std::vector<std::string> out;
  for (const auto* c : set.anchored_at(node)) out.push_back(c->canonical());
  std::sort(out.begin(), out.end());
  return out;
}

inline Outcome locality_suite(unsigned seed, int graphs = 50) {
  Outcome o;
  std::mt19937 rng(seed);
  auto types = Catalog::bundled().supported_types();
  std::size_t surgeries = 0;
  for (int g = 0; g < graphs; ++g) {
    auto graph = random_graph(rng, 20);
    const auto& nodes = graph.nodes();
    const auto& n = nodes[std::uniform_int_distribution<std::size_t>(0, nodes.size() - 1)(rng)].logical_id;
    auto before = anchored_canonical(graph, n);

    // Add an isolated node.
    auto with = nodes;
    auto type = types[std::uniform_int_distribution<std::size_t>(0, types.size() - 1)(rng)];
    with.push_back({"Isolated", type, Classification::Supported, random_properties(type, rng)});
    if (anchored_canonical(ResourceGraph::from_parts(with, graph.edges()), n) != before) {
      o.fail("graph " + std::to_string(g) + ": adding an isolated node changed " + n);
    }
    ++surgeries;

    // Delete a node that shares no edge with n.
    std::set<std::string> adjacent{n};
    for (const auto& e : graph.edges()) {
      if (e.source == n) adjacent.insert(e.target);
      if (e.target == n) adjacent.insert(e.source);
    }
    std::vector<std::string> candidates;
    for (const auto& m : nodes) {
      if (!adjacent.count(m.logical_id)) candidates.push_back(m.logical_id);
    }
    if (candidates.empty()) continue;
    auto victim = candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
    std::vector<NodeRecord> kept;
    for (const auto& m : nodes) {
      if (m.logical_id != victim) kept.push_back(m);
    }
    std::vector<Edge> kept_edges;
    for (const auto& e : graph.edges()) {
      if (e.source != victim && e.target != victim) kept_edges.push_back(e);
    }
    if (anchored_canonical(ResourceGraph::from_parts(kept, kept_edges), n) != before) {
      o.fail("graph " + std::to_string(g) + ": deleting " + victim + " changed " + n);
    }
    ++surgeries;
  }
  if (o.pass) o.detail = std::to_string(graphs) + " graphs, " + std::to_string(surgeries) + " surgeries";
  return o;
}

// ---------------------------------------------------------------------------
// 5. Oracle equivalence against exhaustive enumeration.

struct RandomSystem {
  std::size_t vars = 1;
  struct Row {
    std::vector<long> coefficients;
    Relation relation;
    long constant;
  };
  std::vector<Row> rows;

  static bool holds(long lhs, Relation r, long rhs) {
    switch (r) {
      case Relation::Eq: return lhs == rhs;
      case Relation::Le: return lhs <= rhs;
      case Relation::Lt: return lhs < rhs;
      case Relation::Ge: return lhs >= rhs;
      case Relation::Gt: return lhs > rhs;
    }
    return false;
  }

  /// Every assignment in [0, 10]^vars that satisfies all rows.
  template <class Visit>
  void enumerate(Visit visit) const {
    std::vector<long> x(vars, 0);
    while (true) {
      bool ok = true;
      for (const auto& row : rows) {
        long lhs = 0;
        for (std::size_t i = 0; i < vars; ++i) lhs += row.coefficients[i] * x[i];
        if (!holds(lhs, row.relation, row.constant)) {
          ok = false;
          break;
        }
      }
      if (ok) visit(x);
      std::size_t i = 0;
      while (i < vars && x[i] == 10) x[i++] = 0;
      if (i == vars) return;
      ++x[i];
    }
  }

  static RandomSystem random(std::mt19937& rng) {
    RandomSystem s;
    s.vars = std::uniform_int_distribution<std::size_t>(1, 6)(rng);
    auto rows = std::uniform_int_distribution<int>(1, 4)(rng);
    std::uniform_int_distribution<long> coef(-3, 3), constant(-5, 25);
    std::uniform_int_distribution<int> rel(0, 4);
    for (int r = 0; r < rows; ++r) {
      Row row{std::vector<long>(s.vars), static_cast<Relation>(rel(rng)), constant(rng)};
      for (auto& c : row.coefficients) c = coef(rng);
      s.rows.push_back(std::move(row));
    }
    return s;
  }

  /// Box analysis with the rows as user constraints plus x <= 10.
  std::pair<Analysis, ConstraintSet> assemble() const {
    auto a = box_analysis(vars);
    auto set = a.generated;
    for (std::size_t i = 0; i < vars; ++i) {
      std::vector<long> unit(vars, 0);
      unit[i] = 1;
      set.add(linear_constraint(a, unit, Relation::Le, 10));
    }
    for (const auto& row : rows) set.add(linear_constraint(a, row.coefficients, row.relation, row.constant));
    return {std::move(a), std::move(set)};
  }
};

inline Outcome oracle_suite(const SmtBackend& backend, unsigned seed, int systems = 100) {
  Outcome o;
  std::mt19937 rng(seed);
  int sat = 0, bounded = 0;
  for (int k = 0; k < systems; ++k) {
    auto sys = RandomSystem::random(rng);
    bool feasible = false;
    auto target = std::uniform_int_distribution<std::size_t>(0, sys.vars - 1)(rng);
    long oracle_max = -1;
    sys.enumerate([&](const std::vector<long>& x) {
      feasible = true;
      oracle_max = std::max(oracle_max, x[target]);
    });
    auto [analysis, set] = sys.assemble();
    auto script = emit_smtlib(set, analysis.vars);
    auto verdict = backend.check(script);
    bool got_sat = verdict.status == SatStatus::Sat;
    if (verdict.status == SatStatus::Unknown || got_sat != feasible) {
      o.fail("system " + std::to_string(k) + ": solver " + std::string(to_string(verdict.status)) + ", oracle " +
             (feasible ? "sat" : "unsat"));
      continue;
    }
    if (!feasible) continue;
    ++sat;
    auto symbol = analysis.vars.symbol_of(target);
    auto max = backend.bound(script, symbol, Direction::Maximize);
    if (max.kind != BoundValue::Kind::Finite || max.value != oracle_max) {
      o.fail("system " + std::to_string(k) + ": max " + bound_str(max) + ", oracle " + std::to_string(oracle_max));
      continue;
    }
    auto at = backend.check(script, {{"probe", "(= " + symbol + " " + smtlib_int(max.value) + ")"}});
    auto above = backend.check(script, {{"probe", "(= " + symbol + " " + smtlib_int(max.value + 1) + ")"}});
    if (at.status != SatStatus::Sat) o.fail("system " + std::to_string(k) + ": max not attainable");
    if (above.status != SatStatus::Unsat) o.fail("system " + std::to_string(k) + ": max+1 not unsat");
    ++bounded;
  }
  if (o.pass) {
    o.detail = backend.describe() + ": " + std::to_string(systems) + " systems, " + std::to_string(sat) + " sat, " +
               std::to_string(bounded) + " max checks";
  }
  return o;
}

// ---------------------------------------------------------------------------
// 6. Performance envelope.

inline Outcome performance(const SmtBackend& backend, unsigned seed, int templates = 5) {
  Outcome o;
  double worst_build = 0, worst_check = 0, degree_sum = 0;
  for (int k = 0; k < templates; ++k) {
    auto text = synthetic_template(seed + k);
    auto start = Clock::now();
    auto analysis = Analysis::build(parse_template(text), Catalog::bundled());
    auto build = seconds_since(start);
    auto stats = graph_stats(analysis.graph);
    degree_sum += stats.mean_in_degree;
    if (stats.supported_node_count != 60) o.fail("template has " + std::to_string(stats.supported_node_count) + " nodes");

    // Every API and rule is an entry point; pin its traffic.
    EstimateSet estimates;
    for (const auto& n : analysis.graph.nodes()) {
      if (n.type_name == "AWS::ApiGateway::RestApi") estimates.set(n.logical_id, "monthly_GETs", Rational(1000000));
      if (n.type_name == "AWS::Events::Rule") estimates.set(n.logical_id, "monthly_requests", Rational(8640));
    }
    start = Clock::now();
    auto report = check_estimates(analysis, estimates, {}, backend);
    auto check = seconds_since(start);
    if (report.verdict != Verdict::Valid) o.fail("check gave " + std::string(to_string(report.verdict)));
    worst_build = std::max(worst_build, build);
    worst_check = std::max(worst_check, check);
  }
  auto mean_degree = degree_sum / templates;
  if (worst_build >= 1.0) o.fail("parse+graph+constraints took " + std::to_string(worst_build) + " s");
  if (worst_check >= 3.0) o.fail("check took " + std::to_string(worst_check) + " s");
  if (mean_degree < 0.85 || mean_degree > 0.95) o.fail("mean in-degree " + std::to_string(mean_degree));
  if (o.pass) {
    std::ostringstream s;
    s << backend.describe() << ": " << templates << " templates, mean in-degree " << mean_degree << ", build <= "
      << worst_build << " s, check <= " << worst_check << " s";
    o.detail = s.str();
  }
  return o;
}

// ---------------------------------------------------------------------------
// 7. Determinism of JSON reports and dumped scripts.

inline Outcome determinism(const std::string& scratch_dir) {
  Outcome o;
  auto synthetic = scratch_dir + "/synthetic.yaml";
  {
    std::ofstream(synthetic) << synthetic_template(11);
  }
  for (const auto& tmpl : {fixture("motivating.yaml"), fixture("url_shortener.yaml"), synthetic}) {
    auto a = cli({"--json", "constraints", tmpl});
    auto b = cli({"--json", "constraints", tmpl});
    if (a.exit_code != 0 || a.out != b.out) o.fail("constraints --json differs on " + tmpl);
    std::string da = scratch_dir + "/a.smt2", db = scratch_dir + "/b.smt2";
    for (const auto& dump : {da, db}) {
      cli({"--solver", "builtin", "--dump-smt", dump, "check", tmpl});
    }
    auto ta = read_text(da);
    if (ta.empty() || ta != read_text(db)) o.fail("dumped scripts differ on " + tmpl);
  }
  auto ca = cli({"--dump-smt", scratch_dir + "/c.smt2", "check", fixture("url_shortener.yaml"),
                 fixture("app_constraints.smt2"), "--estimates", fixture("estimates_underestimated.yaml")});
  auto cb = cli({"--dump-smt", scratch_dir + "/d.smt2", "check", fixture("url_shortener.yaml"),
                 fixture("app_constraints.smt2"), "--estimates", fixture("estimates_underestimated.yaml")});
  if (read_text(scratch_dir + "/c.smt2") != read_text(scratch_dir + "/d.smt2")) o.fail("check scripts differ");
  if (ca.out != cb.out) o.fail("check reports differ");
  if (o.pass) o.detail = "3 templates, constraints --json and --dump-smt byte-identical";
  return o;
}

}  // namespace iac::support
