#include "iac/smt_script.hpp"

namespace iac {

const Declaration* SolverScript::find_declaration(std::string_view symbol) const {
  for (const auto& d : declarations) {
    if (d.symbol == symbol) return &d;
  }
  return nullptr;
}

std::string SolverScript::text() const {
  std::string out;
  if (request_core) out += "(set-option :produce-unsat-cores true)\n";
  if (request_model) out += "(set-option :produce-models true)\n";
  out += "(set-logic QF_LIRA)\n";
  for (const auto& d : declarations) out += "(declare-const " + d.symbol + " " + d.sort + ")\n";
  for (const auto& a : assertions) {
    // A verbatim user term may end in a comment.
    const char* sep = a.term.find(';') == std::string::npos ? " " : "\n ";
    out += "(assert (! " + a.term + sep + ":named " + a.name + "))\n";
  }
  if (objective) {
    out += objective->direction == Direction::Maximize ? "(maximize " : "(minimize ";
    out += objective->symbol + ")\n";
  }
  out += "(check-sat)\n";
  if (request_model) out += "(get-model)\n";
  if (request_core) out += "(get-unsat-core)\n";
  if (objective) out += "(get-objectives)\n";
  return out;
}

SolverScript emit_smtlib(const ConstraintSet& constraints, const VariableSet& vars,
                         std::optional<Objective> objective) {
  SolverScript script;
  for (const auto& v : vars.all()) {
    script.declarations.push_back({v.symbol(), v.sort == Sort::Real ? "Real" : "Int"});
  }
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    script.assertions.push_back({constraints.name(i), constraints[i].smtlib()});
  }
  script.objective = std::move(objective);
  return script;
}

}  // namespace iac
