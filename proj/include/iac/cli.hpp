#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace iac {

/// Exit-code contract of the iac-analysis executable.
namespace exit_code {
inline constexpr int kValid = 0;
inline constexpr int kInvalid = 1;
inline constexpr int kInconclusive = 2;
inline constexpr int kError = 3;
}  // namespace exit_code

/// Runs one iac-analysis invocation. `args` excludes the program name.
/// Reports go to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace iac
