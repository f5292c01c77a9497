#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iac/rational.hpp"
#include "iac/sexpr.hpp"
#include "iac/smt_script.hpp"

namespace iac {

enum class SatStatus { Sat, Unsat, Unknown };

std::string_view to_string(SatStatus s);

struct SolverVerdict {
  SatStatus status = SatStatus::Unknown;
  std::optional<std::map<std::string, Rational>> model;  // unquoted symbol -> value
  std::optional<std::vector<std::string>> core;          // assertion names
  std::string reason;                                    // why Unknown
};

struct BoundValue {
  enum class Kind { Finite, Unbounded, Infeasible, Unknown };

  Kind kind = Kind::Unknown;
  Rational value = 0;
  /// False when the value is a supremum/infimum no model reaches.
  bool attained = true;
  /// Unbounded only because the probe cap was passed.
  bool capped = false;
  std::string note;
};

std::string_view to_string(BoundValue::Kind k);

/// Solver response text -> verdict. Throws SmtSyntaxError when the text is
/// not a sequence of S-expressions.
SolverVerdict parse_response(std::string_view text);

/// Exact value of an SMT-LIB numeric literal: numerals, decimals, (- x),
/// (/ p q).
std::optional<Rational> parse_value(const SExpr& e);

enum class SolverMode { Auto, Generic, Optimizing };

struct SolverOptions {
  std::chrono::milliseconds timeout{10000};
  /// Largest magnitude probed before a bound is reported Unbounded.
  Rational probe_cap = Rational(BigInt(1) << 63);
  /// Absolute tolerance of the Real-sorted binary search.
  Rational real_tolerance = Rational(1, 1000000);
};

/// Name accepted by `--solver` for the in-process solver.
inline constexpr std::string_view kBuiltinSolver = "builtin";

/// Environment variable naming the solver executable.
inline constexpr const char* kSolverEnv = "IAC_ANALYSIS_SOLVER";

/// Drives one SMT solver. Safe for concurrent queries: every query is an
/// independent child process (or an independent in-process session).
class SmtBackend {
 public:
  /// `path` (or "builtin"), else $IAC_ANALYSIS_SOLVER, else z3 or cvc5 on
  /// PATH, else the builtin solver.
  static SmtBackend discover(const std::optional<std::string>& path, SolverMode mode = SolverMode::Auto,
                             SolverOptions options = {});
  static SmtBackend builtin(SolverOptions options = {});
  /// With SolverMode::Auto the `--version` banner decides: Z3 is driven as
  /// an optimizing solver, anything else as a generic one.
  static SmtBackend external(const std::string& path, SolverMode mode = SolverMode::Auto,
                             SolverOptions options = {});

  SolverVerdict check(const SolverScript& script, const std::vector<NamedAssertion>& extra = {}) const;

  /// Minimum or maximum of `symbol` (pipe-quoted, declared in `script`).
  BoundValue bound(const SolverScript& script, const std::string& symbol, Direction direction) const;

  bool optimizing() const { return optimizing_; }
  bool is_builtin() const { return builtin_; }
  const SolverOptions& options() const { return options_; }
  /// e.g. "z3 (optimizing) /usr/local/bin/z3".
  std::string describe() const;

  /// Raw solver output for a script.
  std::string run(const std::string& script_text) const;

 private:
  SolverVerdict query(const SolverScript& script) const;
  BoundValue bound_by_search(const SolverScript& script, const std::string& symbol, Direction direction,
                             bool is_int) const;

  bool builtin_ = true;
  bool optimizing_ = false;
  std::string name_ = "builtin";
  std::vector<std::string> argv_;
  SolverOptions options_;
};

}  // namespace iac
