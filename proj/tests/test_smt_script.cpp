#include <gtest/gtest.h>

#include "iac/smt_script.hpp"
#include "support.hpp"

using namespace iac;

TEST(SmtScript, SmallestScript) {
  auto a = support::box_analysis(1);
  auto script = emit_smtlib(a.generated, a.vars);
  EXPECT_EQ(script.text(),
            "(set-option :produce-unsat-cores true)\n"
            "(set-option :produce-models true)\n"
            "(set-logic QF_LIRA)\n"
            "(declare-const |V0.x| Int)\n"
            "(assert (! (>= |V0.x| 0) :named basic0))\n"
            "(check-sat)\n"
            "(get-model)\n"
            "(get-unsat-core)\n");
}

TEST(SmtScript, ObjectiveComesBeforeCheckSat) {
  auto a = support::box_analysis(1);
  auto text = emit_smtlib(a.generated, a.vars, Objective{Direction::Maximize, "|V0.x|"}).text();
  auto max = text.find("(maximize |V0.x|)\n");
  ASSERT_NE(max, std::string::npos);
  EXPECT_LT(max, text.find("(check-sat)"));
  EXPECT_NE(text.find("(get-objectives)"), std::string::npos);
}

TEST(SmtScript, DeclarationSortsAndUserTermsAfterGenerated) {
  auto graph = build_graph(support::load_fixture("motivating.yaml"), Catalog::bundled());
  auto analysis = Analysis::from_graph(graph, Catalog::bundled());
  auto user = parse_user_constraints(support::read_text(support::fixture("motivating_app.smt2")), analysis.vars);
  auto set = assemble_constraints(analysis, {}, user);
  auto script = emit_smtlib(set, analysis.vars);
  EXPECT_EQ(script.find_declaration("|B.monthly_gb_seconds|")->sort, "Real");
  EXPECT_EQ(script.find_declaration("|B.monthly_requests|")->sort, "Int");
  EXPECT_EQ(script.find_declaration("|nope|"), nullptr);
  EXPECT_EQ(script.assertions.back().name, "user4");
  EXPECT_EQ(script.assertions.back().term, "(> |E.monthly_dynamodb_r| 0)");
  auto text = script.text();
  EXPECT_LT(text.find(":named outgoing2"), text.find(":named user0"));
}

TEST(SmtScript, EveryAssertedSymbolIsDeclaredOnce) {
  auto graph = build_graph(support::load_fixture("motivating.yaml"), Catalog::bundled());
  auto analysis = Analysis::from_graph(graph, Catalog::bundled());
  auto script = emit_smtlib(analysis.generated, analysis.vars);
  std::set<std::string> declared, names;
  for (const auto& d : script.declarations) EXPECT_TRUE(declared.insert(d.symbol).second);
  for (const auto& a : script.assertions) {
    EXPECT_TRUE(names.insert(a.name).second);
    for (const auto& e : parse_sexprs(a.term)) {
      std::function<void(const SExpr&)> walk = [&](const SExpr& x) {
        if (x.kind == SExpr::Kind::Symbol && x.quoted) EXPECT_TRUE(declared.count("|" + x.text + "|")) << x.text;
        for (const auto& c : x.items) walk(c);
      };
      walk(e);
    }
  }
}

TEST(SmtScript, TermsWithCommentsStillClose) {
  SolverScript s;
  s.declarations.push_back({"|x|", "Int"});
  s.assertions.push_back({"user0", "(>= |x| 0) ; at least zero"});
  s.request_model = false;
  s.request_core = false;
  EXPECT_EQ(s.text(),
            "(set-logic QF_LIRA)\n(declare-const |x| Int)\n"
            "(assert (! (>= |x| 0) ; at least zero\n :named user0))\n(check-sat)\n");
  EXPECT_NO_THROW(parse_sexprs(s.text()));
}

TEST(SmtScript, ByteIdenticalAcrossRuns) {
  auto text = support::read_text(support::fixture("motivating.yaml"));
  auto once = [&] {
    auto analysis = Analysis::build(parse_template(text), Catalog::bundled());
    return emit_smtlib(analysis.generated, analysis.vars).text();
  };
  EXPECT_EQ(once(), once());
}
