#include <gtest/gtest.h>

#include <yaml-cpp/yaml.h>

#include "iac/analysis.hpp"
#include "iac/errors.hpp"
#include "iac/user_constraints.hpp"
#include "support.hpp"

using namespace iac;

namespace {

struct Study {
  Analysis analysis;
  std::vector<Constraint> user;
};

Study load(const std::string& tmpl, const std::vector<std::string>& smt) {
  Study s{Analysis::build(support::load_fixture(tmpl), Catalog::bundled()), {}};
  for (const auto& f : smt) {
    auto cs = parse_user_constraints(support::read_text(support::fixture(f)), s.analysis.vars);
    s.user.insert(s.user.end(), cs.begin(), cs.end());
  }
  return s;
}

Study case_study() { return load("url_shortener.yaml", {"app_constraints.smt2"}); }
Study motivating() { return load("motivating.yaml", {"motivating_app.smt2", "motivating_workload.smt2"}); }

EstimateSet estimates(const Study& s, const std::string& file) {
  return load_estimates(support::read_text(support::fixture(file)), s.analysis.vars);
}

}  // namespace

TEST(EstimatesTemplate, CaseStudyKeys) {
  auto s = case_study();
  auto text = estimates_template(s.analysis.graph, Catalog::bundled());
  auto doc = YAML::Load(text);
  for (const char* m : {"monthly_GETs", "monthly_PATCHs", "monthly_DELETEs"}) {
    ASSERT_TRUE(doc["apigateway"][m]) << m;
    EXPECT_TRUE(doc["apigateway"][m].IsNull());
  }
  EXPECT_TRUE(doc["dynamodb_table"]["monthly_dynamodb_r"]);
  EXPECT_TRUE(doc["dynamodb_table"]["monthly_dynamodb_w"]);
  EXPECT_FALSE(doc["lambdaServiceRole"]);
  // The filled-in template is itself a valid (empty) estimates file.
  EXPECT_TRUE(load_estimates(text, s.analysis.vars).empty());
}

TEST(EstimatesTemplate, EmptyGraphHasOnlyHeader) {
  auto text = estimates_template(ResourceGraph{}, Catalog::bundled());
  EXPECT_EQ(text.rfind("# ", 0), 0u);
  EXPECT_TRUE(YAML::Load(text).IsNull());
}

TEST(EstimatesTemplate, UnknownNodesAreOmitted) {
  auto model = parse_template("Resources:\n  Box: {Type: AWS::EC2::Instance}\n  Q: {Type: AWS::SQS::Queue}\n");
  auto text = estimates_template(build_graph(model, Catalog::bundled()), Catalog::bundled());
  EXPECT_EQ(text.find("Box"), std::string::npos);
  EXPECT_NE(text.find("Q:\n  monthly_requests: ~\n"), std::string::npos);
  // Private metrics are not estimable.
  EXPECT_EQ(text.find("monthly_api_calls"), std::string::npos);
}

TEST(Check, UnderestimatedReadsAreInvalid) {
  auto s = case_study();
  auto r = check_estimates(s.analysis, estimates(s, "estimates_underestimated.yaml"), s.user, SmtBackend::builtin());
  ASSERT_EQ(r.verdict, Verdict::Invalid);
  ASSERT_FALSE(r.conflicts.empty());
  EXPECT_LE(r.conflicts.size(), kMaxReportedConflicts);
  std::set<std::string> names;
  for (const auto& c : r.conflicts) names.insert(c.name);
  EXPECT_TRUE(names.count("user0"));
  EXPECT_EQ(r.conflicts.front().category, ConstraintCategory::Estimate);
}

TEST(Check, CorrectedReadsAreValid) {
  for (const auto& backend : support::solvers()) {
    auto s = case_study();
    auto r = check_estimates(s.analysis, estimates(s, "estimates_corrected.yaml"), s.user, backend);
    ASSERT_EQ(r.verdict, Verdict::Valid) << backend.describe();
    EXPECT_EQ(r.witness.size(), s.analysis.vars.size());
    EXPECT_EQ(r.witness.at("dynamodb_table.monthly_dynamodb_r"), Rational(300000000));
    EXPECT_EQ(r.witness.at("dynamodb_table.monthly_dynamodb_w"), Rational(200000000));
  }
}

TEST(Check, NoEstimatesNoUserConstraintsIsValid) {
  for (const char* tmpl : {"motivating.yaml", "url_shortener.yaml"}) {
    auto s = load(tmpl, {});
    auto r = check_estimates(s.analysis, {}, {}, SmtBackend::builtin());
    EXPECT_EQ(r.verdict, Verdict::Valid) << tmpl;
  }
}

TEST(Check, MotivatingWritesAroundTheBound) {
  auto s = motivating();
  auto pinned = [&](long w) {
    EstimateSet e;
    e.set("A", "monthly_POSTs", Rational(1000000));
    e.set("E", "monthly_dynamodb_w", Rational(w));
    return check_estimates(s.analysis, e, s.user, SmtBackend::builtin()).verdict;
  };
  EXPECT_EQ(pinned(3000001), Verdict::Invalid);
  EXPECT_EQ(pinned(3000000), Verdict::Valid);
  EXPECT_EQ(pinned(2999999), Verdict::Valid);
}

TEST(Check, ReadsMustBePositive) {
  auto s = motivating();
  EstimateSet e;
  e.set("E", "monthly_dynamodb_r", Rational(0));
  auto r = check_estimates(s.analysis, e, s.user, SmtBackend::builtin());
  ASSERT_EQ(r.verdict, Verdict::Invalid);
  std::set<std::string> infix;
  for (const auto& c : r.conflicts) infix.insert(c.infix);
  EXPECT_TRUE(infix.count("E.monthly_dynamodb_r > 0"));
  EXPECT_TRUE(infix.count("E.monthly_dynamodb_r = 0"));
}

TEST(Estimates, RejectsBadKeysAndValues) {
  auto s = case_study();
  const auto& vars = s.analysis.vars;
  try {
    load_estimates("apigateway:\n  monthly_GET: 5\n", vars);
    FAIL();
  } catch (const UnknownEstimateKeyError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("monthly_GETs"), std::string::npos) << msg;
  }
  EXPECT_THROW(load_estimates("nosuch:\n  monthly_requests: 5\n", vars), UnknownEstimateKeyError);
  EXPECT_THROW(load_estimates("lambda:\n  monthly_gb_seconds: 5\n", vars), UnknownEstimateKeyError);
  EXPECT_THROW(load_estimates("lambda:\n  monthly_requests: -1\n", vars), EstimateValueError);
  EXPECT_THROW(load_estimates("lambda:\n  monthly_requests: 2.5\n", vars), EstimateValueError);
  EXPECT_THROW(load_estimates("lambda:\n  monthly_requests: lots\n", vars), EstimateValueError);
  EXPECT_THROW(load_estimates("lambda:\n  monthly_requests: .inf\n", vars), EstimateValueError);
  EXPECT_THROW(load_estimates("- 1\n", vars), ParseError);
  auto e = load_estimates("lambda:\n  monthly_requests: 1.5e8\napigateway:\n  monthly_GETs: ~\n", vars);
  ASSERT_EQ(e.size(), 1u);
  EXPECT_EQ(e.entries().begin()->second, Rational(150000000));
}

TEST(Bounds, MotivatingWrites) {
  for (const auto& backend : support::solvers()) {
    auto s = motivating();
    auto r = usage_bounds(s.analysis, "E.monthly_dynamodb_w", {}, s.user, backend);
    ASSERT_EQ(r.lower.kind, BoundValue::Kind::Finite) << backend.describe();
    ASSERT_EQ(r.upper.kind, BoundValue::Kind::Finite) << backend.describe();
    EXPECT_EQ(r.lower.value, Rational(0));
    EXPECT_EQ(r.upper.value, Rational(3000000));
    EXPECT_EQ(r.symbol, "|E.monthly_dynamodb_w|");
    EXPECT_EQ(r.assumptions.size(), 6u);
  }
}

TEST(Bounds, MotivatingReads) {
  for (const auto& backend : support::solvers()) {
    auto s = motivating();
    auto r = usage_bounds(s.analysis, "E.monthly_dynamodb_r", {}, s.user, backend);
    ASSERT_EQ(r.upper.kind, BoundValue::Kind::Finite) << backend.describe();
    EXPECT_EQ(r.upper.value, Rational(2000000));
    EXPECT_EQ(r.lower.value, Rational(1));
  }
}

TEST(Bounds, FreeEntryPointIsUnbounded) {
  auto s = load("motivating.yaml", {});
  auto r = usage_bounds(s.analysis, "A.monthly_GETs", {}, {}, SmtBackend::builtin());
  EXPECT_EQ(r.upper.kind, BoundValue::Kind::Unbounded);
  EXPECT_EQ(r.lower.kind, BoundValue::Kind::Finite);
  EXPECT_TRUE(r.assumptions.empty());
}

TEST(Bounds, UnknownTarget) {
  auto s = motivating();
  try {
    usage_bounds(s.analysis, "E.monthly_dynamodb", {}, s.user, SmtBackend::builtin());
    FAIL();
  } catch (const UnknownTargetKeyError& e) {
    EXPECT_NE(std::string(e.what()).find("monthly_dynamodb_r"), std::string::npos);
  }
  EXPECT_THROW(usage_bounds(s.analysis, "Nope", {}, s.user, SmtBackend::builtin()), UnknownTargetKeyError);
}

TEST(Bounds, EstimatesNarrowTheInterval) {
  auto s = motivating();
  EstimateSet e;
  e.set("A", "monthly_GETs", Rational(250000));
  auto r = usage_bounds(s.analysis, "E.monthly_dynamodb_w", e, s.user, SmtBackend::builtin());
  EXPECT_EQ(r.upper.value, Rational(2250000));
  EXPECT_EQ(r.assumptions.back(), "A.monthly_GETs = 250000");
}
