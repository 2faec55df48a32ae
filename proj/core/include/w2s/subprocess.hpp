#pragma once

#include <string>
#include <vector>

namespace w2s {

struct ProcessResult {
  int exit_code = -1;
  std::string stderr_text;
};

/// Runs `argv` (argv[0] looked up via PATH), waits for completion and
/// captures stderr. Throws EnvironmentError when the executable cannot be
/// spawned at all.
ProcessResult run_process(const std::vector<std::string>& argv);

}  // namespace w2s
