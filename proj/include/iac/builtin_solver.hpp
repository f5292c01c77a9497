#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace iac {

/// Decides an SMT-LIB 2 script over linear integer/real arithmetic without
/// an external process and returns the text a solver would print for it.
///
/// Supported: declare-const (Int/Real), named assertions built from and,
/// not, and chained comparisons of linear terms, check-sat, get-model and
/// get-unsat-core. Disjunctions answer `unknown`; optimization commands are
/// rejected with an error line. Unsat cores are deletion-minimal when the
/// deadline allows.
std::string builtin_solve(std::string_view script, std::chrono::milliseconds timeout);

}  // namespace iac
