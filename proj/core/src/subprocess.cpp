#include "w2s/subprocess.hpp"

#include <cerrno>
#include <cstring>

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include "w2s/error.hpp"

extern char** environ;

namespace w2s {

ProcessResult run_process(const std::vector<std::string>& argv) {
  if (argv.empty()) throw DomainError("run_process: empty argv");

  std::vector<char*> raw;
  raw.reserve(argv.size() + 1);
  for (const auto& arg : argv) raw.push_back(const_cast<char*>(arg.c_str()));
  raw.push_back(nullptr);

  int pipe_fds[2];
  if (pipe(pipe_fds) != 0) {
    throw IoError(std::string("pipe() failed: ") + std::strerror(errno));
  }

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, pipe_fds[1], STDERR_FILENO);
  posix_spawn_file_actions_addclose(&actions, pipe_fds[0]);
  posix_spawn_file_actions_addclose(&actions, pipe_fds[1]);

  pid_t pid = -1;
  const int spawn_rc = posix_spawnp(&pid, raw[0], &actions, nullptr, raw.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  close(pipe_fds[1]);

  if (spawn_rc != 0) {
    close(pipe_fds[0]);
    throw EnvironmentError("cannot spawn '" + argv[0] + "': " + std::strerror(spawn_rc));
  }

  std::string stderr_text;
  char buf[4096];
  ssize_t n;
  while ((n = read(pipe_fds[0], buf, sizeof(buf))) > 0) {
    stderr_text.append(buf, static_cast<std::size_t>(n));
  }
  close(pipe_fds[0]);

  int status = 0;
  if (waitpid(pid, &status, 0) < 0) {
    throw IoError(std::string("waitpid() failed: ") + std::strerror(errno));
  }

  ProcessResult result;
  result.stderr_text = std::move(stderr_text);
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.exit_code = 128 + WTERMSIG(status);
  }
  return result;
}

}  // namespace w2s
