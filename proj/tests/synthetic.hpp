#pragma once

#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace iac::support {

/// A CDK-style serverless template with `nodes` dataflow resources and
/// `edges` distinct dataflow edges, wired through the same constructs real
/// templates use (integrations, event source mappings, subscriptions,
/// environment references, rule targets). IAM roles, permissions and
/// wiring resources come on top.
inline std::string synthetic_template(unsigned seed, std::size_t nodes = 60, std::size_t edges = 54) {
  std::mt19937 rng(seed);
  struct Res {
    std::string id;
    std::string kind;
  };
  // Mix of types loosely matching CDK sample apps.
  static const std::vector<std::pair<std::string, double>> mix = {
      {"fn", 0.34}, {"queue", 0.16}, {"table", 0.16}, {"topic", 0.08}, {"bucket", 0.08},
      {"api", 0.06}, {"rule", 0.06}, {"stream", 0.06}};
  std::vector<Res> res;
  std::discrete_distribution<std::size_t> pick_kind({0.34, 0.16, 0.16, 0.08, 0.08, 0.06, 0.06, 0.06});
  for (std::size_t i = 0; i < nodes; ++i) {
    auto kind = i < 4 ? std::string("fn") : mix[pick_kind(rng)].first;
    if (i == 4) kind = "api";
    res.push_back({kind + std::to_string(i), kind});
  }
  auto of_kind = [&](std::initializer_list<const char*> kinds) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < res.size(); ++i) {
      for (const char* k : kinds) {
        if (res[i].kind == k) out.push_back(i);
      }
    }
    return out;
  };
  auto fns = of_kind({"fn"});
  std::map<std::size_t, std::vector<std::string>> env;          // fn -> referenced ids
  std::map<std::size_t, std::vector<std::string>> rule_targets;  // rule -> target ids
  std::vector<std::string> wiring;
  std::set<std::pair<std::size_t, std::size_t>> made;
  static const char* methods[] = {"GET", "POST", "PUT", "PATCH", "DELETE"};
  auto rand_of = [&](const std::vector<std::size_t>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  };
  std::size_t wiring_count = 0;
  while (made.size() < edges) {
    auto s = std::uniform_int_distribution<std::size_t>(0, res.size() - 1)(rng);
    const auto& kind = res[s].kind;
    std::size_t t;
    if (kind == "fn") {
      t = rand_of(of_kind({"fn", "queue", "table", "topic", "bucket", "stream"}));
    } else if (kind == "queue" || kind == "stream" || kind == "topic" || kind == "api") {
      t = rand_of(fns);
    } else if (kind == "rule") {
      t = rand_of(of_kind({"fn", "queue"}));
    } else {
      continue;  // tables and buckets only receive traffic here
    }
    if (s == t || !made.insert({s, t}).second) continue;
    const auto& src = res[s].id;
    const auto& dst = res[t].id;
    auto w = "W" + std::to_string(wiring_count++);
    if (kind == "fn") {
      env[s].push_back(dst);
    } else if (kind == "rule") {
      rule_targets[s].push_back(dst);
    } else if (kind == "queue" || kind == "stream") {
      wiring.push_back("  " + w + ":\n    Type: AWS::Lambda::EventSourceMapping\n    Properties:\n" +
                       "      EventSourceArn: !GetAtt " + src + ".Arn\n      FunctionName: !Ref " + dst + "\n");
    } else if (kind == "topic") {
      wiring.push_back("  " + w + ":\n    Type: AWS::SNS::Subscription\n    Properties:\n      TopicArn: !Ref " + src +
                       "\n      Protocol: lambda\n      Endpoint: !GetAtt " + dst + ".Arn\n");
    } else {
      const char* m = methods[std::uniform_int_distribution<int>(0, 4)(rng)];
      wiring.push_back("  " + w + ":\n    Type: AWS::ApiGateway::Method\n    Properties:\n      RestApiId: !Ref " + src +
                       "\n      ResourceId: !GetAtt " + src + ".RootResourceId\n      HttpMethod: " + m +
                       "\n      AuthorizationType: NONE\n      Integration:\n        Type: AWS_PROXY\n" +
                       "        Uri: !Sub \"arn:${AWS::Partition}:apigateway:${AWS::Region}:lambda:path/functions/${" +
                       dst + ".Arn}/invocations\"\n");
      wiring.push_back("  " + w + "Perm:\n    Type: AWS::Lambda::Permission\n    Properties:\n" +
                       "      Action: lambda:InvokeFunction\n      FunctionName: !GetAtt " + dst +
                       ".Arn\n      Principal: apigateway.amazonaws.com\n");
    }
  }

  std::string out = "AWSTemplateFormatVersion: \"2010-09-09\"\nResources:\n";
  out += "  Role:\n    Type: AWS::IAM::Role\n    Properties:\n      AssumeRolePolicyDocument: {}\n";
  for (std::size_t i = 0; i < res.size(); ++i) {
    const auto& r = res[i];
    out += "  " + r.id + ":\n";
    if (r.kind == "fn") {
      out += "    Type: AWS::Lambda::Function\n    Properties:\n      Runtime: nodejs20.x\n"
             "      Handler: index.handler\n      MemorySize: 256\n      Timeout: 15\n"
             "      Role: !GetAtt Role.Arn\n      Code: {ZipFile: \"exports.handler = async () => 0\"}\n";
      if (!env[i].empty()) {
        out += "      Environment:\n        Variables:\n";
        for (std::size_t k = 0; k < env[i].size(); ++k) {
          out += "          TARGET_" + std::to_string(k) + ": !Ref " + env[i][k] + "\n";
        }
      }
    } else if (r.kind == "queue") {
      out += "    Type: AWS::SQS::Queue\n    Properties:\n      VisibilityTimeout: 90\n";
    } else if (r.kind == "table") {
      out += "    Type: AWS::DynamoDB::Table\n    Properties:\n      BillingMode: PAY_PER_REQUEST\n"
             "      KeySchema: [{AttributeName: pk, KeyType: HASH}]\n"
             "      AttributeDefinitions: [{AttributeName: pk, AttributeType: S}]\n";
    } else if (r.kind == "topic") {
      out += "    Type: AWS::SNS::Topic\n";
    } else if (r.kind == "bucket") {
      out += "    Type: AWS::S3::Bucket\n";
    } else if (r.kind == "api") {
      out += "    Type: AWS::ApiGateway::RestApi\n    Properties:\n      Name: " + r.id + "\n";
    } else if (r.kind == "rule") {
      out += "    Type: AWS::Events::Rule\n    Properties:\n      ScheduleExpression: rate(5 minutes)\n";
      if (!rule_targets[i].empty()) {
        out += "      Targets:\n";
        for (std::size_t k = 0; k < rule_targets[i].size(); ++k) {
          out += "        - Id: t" + std::to_string(k) + "\n          Arn: !GetAtt " + rule_targets[i][k] + ".Arn\n";
        }
      }
    } else if (r.kind == "stream") {
      out += "    Type: AWS::Kinesis::Stream\n    Properties:\n      ShardCount: 2\n";
    }
  }
  for (const auto& w : wiring) out += w;
  return out;
}

}  // namespace iac::support
