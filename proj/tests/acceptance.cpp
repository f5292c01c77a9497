// Prints one PASS/FAIL line per acceptance criterion and exits nonzero if any
// criterion fails. Solver-dependent criteria run on every available solver.

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>

#include "criteria.hpp"

using namespace iac;
using namespace iac::support;

namespace {

Outcome all_solvers(const std::function<Outcome(const SmtBackend&)>& run) {
  Outcome total;
  std::vector<std::string> details;
  for (const auto& backend : solvers()) {
    Outcome o;
    try {
      o = run(backend);
    } catch (const std::exception& e) {
      o.fail(backend.describe() + ": " + e.what());
    }
    if (!o.pass) total.fail(o.detail);
    details.push_back(o.detail);
  }
  if (total.pass) {
    for (const auto& d : details) total.detail += (total.detail.empty() ? "" : " | ") + d;
  }
  return total;
}

Outcome guarded(const std::function<Outcome()>& run) {
  try {
    return run();
  } catch (const std::exception& e) {
    Outcome o;
    o.fail(e.what());
    return o;
  }
}

}  // namespace

int main() {
  auto scratch = std::filesystem::temp_directory_path() / ("iac_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(scratch);

  std::vector<std::pair<std::string, Outcome>> results;
  results.emplace_back("1 motivating example", all_solvers(motivating_example));
  results.emplace_back("2 case study", guarded([] {
                         auto builtin = case_study({"--solver", "builtin"});
                         auto found = case_study({});
                         if (!builtin.pass) return builtin;
                         if (!found.pass) return found;
                         return builtin;
                       }));
  results.emplace_back("3 scoping suite", guarded([] { return scoping_suite(20240301); }));
  results.emplace_back("4 node locality", guarded([] { return locality_suite(20240302); }));
  results.emplace_back("5 oracle equivalence",
                       all_solvers([](const SmtBackend& b) { return oracle_suite(b, 20240303); }));
  results.emplace_back("6 performance envelope",
                       all_solvers([](const SmtBackend& b) { return performance(b, 20240304); }));
  results.emplace_back("7 determinism", guarded([&] { return determinism(scratch.string()); }));

  std::filesystem::remove_all(scratch);
  bool all = true;
  for (const auto& [name, o] : results) {
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << name << ": " << o.detail << "\n";
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
