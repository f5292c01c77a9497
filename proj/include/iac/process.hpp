#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

namespace iac {

struct ProcessResult {
  int exit_code = -1;  // -1 when killed by a signal
  bool timed_out = false;
  std::string out;
  std::string err;
};

/// Runs argv[0] (searched on PATH when it has no '/') with `input` on stdin
/// and collects both output streams. The child is killed once `timeout`
/// elapses. Throws SolverNotFoundError when the program cannot be started.
ProcessResult run_process(const std::vector<std::string>& argv, const std::string& input,
                          std::chrono::milliseconds timeout);

/// Absolute path of an executable found on PATH.
std::optional<std::string> find_on_path(const std::string& program);

}  // namespace iac
