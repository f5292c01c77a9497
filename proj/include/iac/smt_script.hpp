#pragma once

#include <optional>
#include <string>
#include <vector>

#include "iac/constraints.hpp"

namespace iac {

enum class Direction { Minimize, Maximize };

struct Objective {
  Direction direction = Direction::Maximize;
  std::string symbol;  // pipe-quoted
};

struct Declaration {
  std::string symbol;  // pipe-quoted
  std::string sort;    // "Int" or "Real"
};

struct NamedAssertion {
  std::string name;
  std::string term;
};

/// An SMT-LIB 2 script in QF_LIRA with named assertions. `text()` is
/// deterministic for equal contents.
struct SolverScript {
  std::vector<Declaration> declarations;
  std::vector<NamedAssertion> assertions;
  std::optional<Objective> objective;
  bool request_model = true;
  bool request_core = true;

  const Declaration* find_declaration(std::string_view symbol) const;
  std::string text() const;
};

/// Declares every variable and asserts every constraint under its set name.
SolverScript emit_smtlib(const ConstraintSet& constraints, const VariableSet& vars,
                         std::optional<Objective> objective = std::nullopt);

}  // namespace iac
