#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rdgauge {

struct ProcessResult {
  int exit_code = -1;     // -1 when terminated by a signal
  int signal = 0;
  std::string stdout_text;  // only when requested
  std::string stderr_tail;  // last stderr_tail_bytes of stderr
  double wall_seconds = 0.0;

  bool ok() const { return exit_code == 0; }
};

struct ProcessOptions {
  bool capture_stdout = false;
  std::size_t stderr_tail_bytes = 4096;
};

// Absolute path of an executable. Names without a slash are searched on PATH.
std::optional<std::filesystem::path> resolve_executable(const std::filesystem::path& program);

// Runs argv (argv[0] resolved as above) and waits. Throws EnvironmentError if the
// program cannot be found or started; a nonzero exit is reported, not thrown.
ProcessResult run_process(const std::vector<std::string>& argv, const ProcessOptions& options = {});

}  // namespace rdgauge
