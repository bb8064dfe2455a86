#include "rdgauge/process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <string_view>

#include <fmt/format.h>

#include "rdgauge/error.hpp"

extern char** environ;

namespace rdgauge {
namespace {

bool is_executable(const std::filesystem::path& p) {
  std::error_code ec;
  return std::filesystem::is_regular_file(p, ec) && ::access(p.c_str(), X_OK) == 0;
}

struct Pipe {
  int fd[2] = {-1, -1};
  Pipe() {
    if (::pipe2(fd, O_CLOEXEC) != 0) throw EnvironmentError(fmt::format("pipe: {}", std::strerror(errno)));
  }
  ~Pipe() {
    for (int f : fd)
      if (f >= 0) ::close(f);
  }
  void close_end(int i) {
    if (fd[i] >= 0) ::close(fd[i]);
    fd[i] = -1;
  }
  Pipe(const Pipe&) = delete;
  Pipe& operator=(const Pipe&) = delete;
};

}  // namespace

std::optional<std::filesystem::path> resolve_executable(const std::filesystem::path& program) {
  if (program.empty()) return std::nullopt;
  if (program.native().find('/') != std::string::npos) {
    if (is_executable(program)) return std::filesystem::absolute(program);
    return std::nullopt;
  }
  const char* path_env = std::getenv("PATH");
  std::string_view dirs = path_env ? path_env : "/usr/local/bin:/usr/bin:/bin";
  while (!dirs.empty()) {
    auto colon = dirs.find(':');
    std::string_view dir = dirs.substr(0, colon);
    dirs = colon == std::string_view::npos ? std::string_view{} : dirs.substr(colon + 1);
    if (dir.empty()) dir = ".";
    auto candidate = std::filesystem::path(dir) / program;
    if (is_executable(candidate)) return candidate;
  }
  return std::nullopt;
}

ProcessResult run_process(const std::vector<std::string>& argv, const ProcessOptions& options) {
  if (argv.empty()) throw EnvironmentError("run_process: empty argument vector");
  auto exe = resolve_executable(argv.front());
  if (!exe) throw EnvironmentError(fmt::format("executable not found: {}", argv.front()));

  Pipe err, out;
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, "/dev/null", O_RDONLY, 0);
  if (options.capture_stdout)
    posix_spawn_file_actions_adddup2(&actions, out.fd[1], STDOUT_FILENO);
  else
    posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, "/dev/null", O_WRONLY, 0);
  posix_spawn_file_actions_adddup2(&actions, err.fd[1], STDERR_FILENO);

  std::vector<char*> cargv;
  cargv.reserve(argv.size() + 1);
  for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);

  const auto start = std::chrono::steady_clock::now();
  pid_t pid = 0;
  const int rc = posix_spawn(&pid, exe->c_str(), &actions, nullptr, cargv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) throw EnvironmentError(fmt::format("cannot start {}: {}", exe->string(), std::strerror(rc)));
  err.close_end(1);
  out.close_end(1);

  ProcessResult result;
  std::string err_buf;
  std::array<char, 8192> buf{};
  std::vector<pollfd> fds{{err.fd[0], POLLIN, 0}};
  if (options.capture_stdout) fds.push_back({out.fd[0], POLLIN, 0});
  std::size_t open = fds.size();
  while (open > 0) {
    if (::poll(fds.data(), fds.size(), -1) < 0) {
      if (errno == EINTR) continue;
      break;
    }
    for (auto& p : fds) {
      if (p.fd < 0 || !(p.revents & (POLLIN | POLLHUP | POLLERR))) continue;
      const ssize_t n = ::read(p.fd, buf.data(), buf.size());
      if (n <= 0) {
        p.fd = -1;
        --open;
        continue;
      }
      if (p.fd == err.fd[0]) {
        err_buf.append(buf.data(), static_cast<std::size_t>(n));
        if (err_buf.size() > 2 * options.stderr_tail_bytes)
          err_buf.erase(0, err_buf.size() - options.stderr_tail_bytes);
      } else {
        result.stdout_text.append(buf.data(), static_cast<std::size_t>(n));
      }
    }
  }

  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.signal = WTERMSIG(status);
  }
  if (err_buf.size() > options.stderr_tail_bytes) err_buf.erase(0, err_buf.size() - options.stderr_tail_bytes);
  result.stderr_tail = std::move(err_buf);
  return result;
}

}  // namespace rdgauge
