#pragma once

// Launching external engines (upscalers, detectors).
//
// A command spec is a shell fragment such as "python3 sr.py --scale 4". The
// exchange directory is appended as one extra argument, never interpolated
// into the string.

#include <spawn.h>
#include <sys/wait.h>

#include <cerrno>
#include <cstring>
#include <string>

#include "error.hpp"

extern char** environ;

namespace sattile {

/// Runs `command "<dir>"` through /bin/sh and returns its exit status
/// (128 + signal number if it was killed).
inline int run_command(const std::string& command, const std::string& dir) {
  const std::string script = command + " \"$1\"";
  const char* argv[] = {"sh", "-c", script.c_str(), "sh", dir.c_str(), nullptr};
  pid_t pid;
  int rc = posix_spawn(&pid, "/bin/sh", nullptr, nullptr, const_cast<char* const*>(argv), environ);
  if (rc != 0) throw Error("cannot spawn /bin/sh: " + std::string(std::strerror(rc)));
  int status = 0;
  while (waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) throw Error("waitpid failed: " + std::string(std::strerror(errno)));
  }
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
  return -1;
}

}  // namespace sattile
