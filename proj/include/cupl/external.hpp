// Copyright 2026 The cupl Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cctype>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "cupl/emit.hpp"
#include "cupl/ilp.hpp"
#include "cupl/solver.hpp"

// Drives external MILP / pseudo-Boolean solvers: writes the interchange
// file, runs the command under the time limit, parses the answer back and
// re-evaluates it against the model. External objective claims are never
// trusted; feasibility and value are always recomputed here.

namespace cupl {

enum class AnswerDialect : std::uint8_t { LpSolution, OpbSolution };

// Command template with a `{file}` placeholder for the interchange file and
// an optional `{timeout}` placeholder (integer seconds).
struct ExternalSolverSpec {
  std::string command;
  AnswerDialect dialect = AnswerDialect::OpbSolution;
};

// The external process produced output we cannot interpret as an answer.
class SolverProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The external process failed outright (nonzero exit, no answer).
class FailedRunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProcessResult {
  int exit_code = 0;
  bool timed_out = false;
  std::string output;  // captured stdout
};

// Runs `sh -c command`, capturing stdout, killing the whole process group
// once the deadline passes.
inline ProcessResult run_process(const std::string& command, double timeout_seconds) {
  int fds[2];
  if (pipe(fds) != 0) throw FailedRunError("pipe failed: " + std::string(strerror(errno)));
  pid_t pid = fork();
  if (pid < 0) {
    close(fds[0]);
    close(fds[1]);
    throw FailedRunError("fork failed: " + std::string(strerror(errno)));
  }
  if (pid == 0) {
    setpgid(0, 0);
    dup2(fds[1], STDOUT_FILENO);
    close(fds[0]);
    close(fds[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid, pid);  // best effort; the child does the same
  close(fds[1]);

  ProcessResult result;
  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                      std::chrono::duration<double>(timeout_seconds));
  char buf[4096];
  bool open = true;
  while (open) {
    int remaining_ms = static_cast<int>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                            deadline - std::chrono::steady_clock::now())
                                            .count());
    if (remaining_ms <= 0 && !result.timed_out) {
      result.timed_out = true;
      kill(-pid, SIGKILL);
    }
    struct pollfd p{fds[0], POLLIN, 0};
    int rc = poll(&p, 1, result.timed_out ? 1000 : std::min(remaining_ms, 200));
    if (rc > 0) {
      ssize_t n = read(fds[0], buf, sizeof(buf));
      if (n > 0) result.output.append(buf, static_cast<std::size_t>(n));
      else open = false;  // EOF or error
    } else if (rc < 0 && errno != EINTR) {
      open = false;
    }
  }
  close(fds[0]);
  int status = 0;
  waitpid(pid, &status, 0);
  if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  else if (WIFSIGNALED(status)) result.exit_code = 128 + WTERMSIG(status);
  return result;
}

namespace detail {

struct ParsedAnswer {
  enum class Claim { Optimal, Satisfiable, Unsatisfiable, Unknown, None } claim = Claim::None;
  std::vector<std::pair<std::string, std::uint8_t>> assignments;  // token -> value
};

inline std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

// `s <STATUS>` + `v <literals>` lines as produced by pseudo-Boolean
// competition solvers; a bare UNSAT marker is accepted too.
inline ParsedAnswer parse_opb_answer(const std::string& text) {
  ParsedAnswer ans;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.starts_with("s ")) {
      std::string status = upper(line.substr(2));
      if (status.find("OPTIMUM") != std::string::npos) ans.claim = ParsedAnswer::Claim::Optimal;
      else if (status.find("UNSATISFIABLE") != std::string::npos)
        ans.claim = ParsedAnswer::Claim::Unsatisfiable;
      else if (status.find("SATISFIABLE") != std::string::npos)
        ans.claim = ParsedAnswer::Claim::Satisfiable;
      else ans.claim = ParsedAnswer::Claim::Unknown;
    } else if (line.starts_with("v ")) {
      std::istringstream lits(line.substr(2));
      std::string lit;
      while (lits >> lit) {
        bool value = true;
        std::string_view tok = lit;
        if (tok.starts_with("-")) {
          value = false;
          tok.remove_prefix(1);
        }
        ans.assignments.emplace_back(std::string(tok), value ? 1 : 0);
      }
    } else {
      std::string u = upper(line);
      if (u == "UNSAT" || u == "UNSATISFIABLE" || u == "INFEASIBLE")
        ans.claim = ParsedAnswer::Claim::Unsatisfiable;
    }
  }
  return ans;
}

// Plain adapter dialect: a status word (OPTIMAL | FEASIBLE | INFEASIBLE |
// UNKNOWN) followed by `<token> <value>` lines; unlisted variables are 0.
inline ParsedAnswer parse_lp_answer(const std::string& text) {
  ParsedAnswer ans;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::string_view sv = line;
    while (!sv.empty() && std::isspace(static_cast<unsigned char>(sv.front()))) sv.remove_prefix(1);
    if (sv.empty() || sv.front() == '#') continue;
    std::istringstream fields{std::string(sv)};
    std::string first;
    fields >> first;
    std::string u = upper(first);
    if (u == "OPTIMAL" || u == "OPTIMUM") ans.claim = ParsedAnswer::Claim::Optimal;
    else if (u == "FEASIBLE" || u == "SATISFIABLE") ans.claim = ParsedAnswer::Claim::Satisfiable;
    else if (u == "INFEASIBLE" || u == "UNSAT" || u == "UNSATISFIABLE")
      ans.claim = ParsedAnswer::Claim::Unsatisfiable;
    else if (u == "UNKNOWN") ans.claim = ParsedAnswer::Claim::Unknown;
    else {
      double value = 0;
      if (!(fields >> value))
        throw SolverProtocolError("unparseable solution line: '" + line + "'");
      if (std::fabs(value - 0.0) < 1e-4) ans.assignments.emplace_back(first, 0);
      else if (std::fabs(value - 1.0) < 1e-4) ans.assignments.emplace_back(first, 1);
      else throw SolverProtocolError("non-binary value in solution line: '" + line + "'");
    }
  }
  return ans;
}

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "cupl-XXXXXX").string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    if (!mkdtemp(buf.data())) throw FailedRunError("mkdtemp failed");
    path_ = buf.data();
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void replace_all(std::string& s, std::string_view what, const std::string& with) {
  std::size_t pos = 0;
  while ((pos = s.find(what, pos)) != std::string::npos) {
    s.replace(pos, what.size(), with);
    pos += with.size();
  }
}

inline std::size_t count_occurrences(std::string_view s, std::string_view what) {
  std::size_t n = 0, pos = 0;
  while ((pos = s.find(what, pos)) != std::string_view::npos) {
    ++n;
    pos += what.size();
  }
  return n;
}

}  // namespace detail

// Writes the interchange file, runs the solver command under the deadline,
// parses its answer and evaluates it against the model. Statuses:
// optimality claims map to optimal, satisfiability claims to timed-out with
// an incumbent (not proven optimal), infeasibility to infeasible.
inline SolveOutcome run_external(const ExternalSolverSpec& spec, const IlpModel& model,
                                 double timeout_seconds) {
  if (detail::count_occurrences(spec.command, "{file}") != 1)
    throw std::invalid_argument("solver command needs exactly one {file} placeholder");

  detail::TempDir dir;
  bool opb = spec.dialect == AnswerDialect::OpbSolution;
  std::filesystem::path file = dir.path() / (opb ? "model.opb" : "model.lp");
  {
    std::ofstream out(file);
    out << (opb ? emit_opb(model) : emit_lp(model));
  }

  std::string command = spec.command;
  detail::replace_all(command, "{file}", file.string());
  detail::replace_all(command, "{timeout}",
                      std::to_string(static_cast<long long>(std::ceil(timeout_seconds))));

  auto started = std::chrono::steady_clock::now();
  ProcessResult proc = run_process(command, timeout_seconds);
  double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  SolveOutcome out;
  out.stats.elapsed_seconds = elapsed;
  if (proc.timed_out) {
    out.status = SolveStatus::TimedOut;
    return out;
  }

  detail::ParsedAnswer ans = opb ? detail::parse_opb_answer(proc.output)
                                 : detail::parse_lp_answer(proc.output);
  if (ans.claim == detail::ParsedAnswer::Claim::None) {
    if (proc.exit_code != 0)
      throw FailedRunError("solver exited with status " + std::to_string(proc.exit_code) +
                           " and no answer");
    throw SolverProtocolError("solver produced no recognizable answer");
  }

  using Claim = detail::ParsedAnswer::Claim;
  if (ans.claim == Claim::Unsatisfiable) {
    out.status = SolveStatus::Infeasible;
    return out;
  }
  if (ans.claim == Claim::Unknown) {
    out.status = SolveStatus::TimedOut;
    return out;
  }

  // token -> variable, for both dialects (`x<i>` positional or LP tokens)
  std::unordered_map<std::string, Var> by_token;
  for (std::size_t v = 0; v < model.num_vars(); ++v) {
    by_token.emplace(var_token(model, static_cast<Var>(v)), static_cast<Var>(v));
    by_token.emplace("x" + std::to_string(v + 1), static_cast<Var>(v));
  }
  std::vector<std::uint8_t> values(model.num_vars(), 0);
  for (const auto& [token, value] : ans.assignments) {
    auto it = by_token.find(token);
    if (it == by_token.end())
      throw SolverProtocolError("answer references unknown variable '" + token + "'");
    values[static_cast<std::size_t>(it->second)] = value;
  }
  if (!satisfies_all(model, values))
    throw SolverProtocolError("claimed solution violates the model constraints");

  Solution sol{std::move(values), 0};
  sol.objective = objective_value(model, sol.values);
  out.best = std::move(sol);
  out.status = ans.claim == Claim::Optimal ? SolveStatus::Optimal : SolveStatus::TimedOut;
  return out;
}

}  // namespace cupl
