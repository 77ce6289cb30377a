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

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "cupl/cudf.hpp"
#include "cupl/ilp.hpp"
#include "cupl/solver.hpp"

// Random request generation over a fixed initial configuration and a
// benchmark harness aggregating per-solver statistics: timeout and failure
// counts, min/max, geometric mean, population standard deviation and total
// of the solve times.

namespace cupl {

namespace detail {

// mt19937_64 with a rejection-sampled bound, so the draw sequence does not
// depend on the standard library's distribution implementations.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("empty range");
    std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() / n * n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
};

// first k elements of a seeded partial Fisher-Yates shuffle
inline std::vector<std::string> sample_without_replacement(std::vector<std::string> pool,
                                                           std::size_t k, SeededRng& rng) {
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace detail

// Deterministically samples n_install uninstalled names as unversioned
// install atoms and n_upgrade installed names as upgrade atoms, uniformly
// without replacement.
inline Request gen_random(const Universe& u, const Configuration& init, std::size_t n_install,
                          std::size_t n_upgrade, std::uint64_t seed) {
  std::vector<std::string> uninstalled, installed;
  for (const auto& [name, versions] : u.by_name())
    (init.any_version_of(name) ? installed : uninstalled).push_back(name);
  if (n_install > uninstalled.size())
    throw std::invalid_argument("requested " + std::to_string(n_install) +
                                " install candidates, only " +
                                std::to_string(uninstalled.size()) + " uninstalled names");
  if (n_upgrade > installed.size())
    throw std::invalid_argument("requested " + std::to_string(n_upgrade) +
                                " upgrade candidates, only " + std::to_string(installed.size()) +
                                " installed names");
  detail::SeededRng rng(seed);
  Request r;
  for (std::string& name : detail::sample_without_replacement(std::move(uninstalled), n_install, rng))
    r.install.push_back({std::move(name), VersionConstraint::any()});
  for (std::string& name : detail::sample_without_replacement(std::move(installed), n_upgrade, rng))
    r.upgrade.push_back({std::move(name), VersionConstraint::any()});
  return r;
}

struct RunRecord {
  std::string instance;
  std::string solver;
  SolveStatus status = SolveStatus::Infeasible;
  bool has_best = false;
  double elapsed_seconds = 0.0;
  std::optional<std::int64_t> objective;
  std::optional<std::pair<std::int64_t, std::int64_t>> criteria;
};

struct SolverStats {
  int runs = 0;
  int timeouts = 0;
  int failed = 0;  // proved infeasible
  double min_time = 0.0;
  double max_time = 0.0;
  double geometric_mean = 0.0;
  double stddev = 0.0;  // population standard deviation
  double total = 0.0;
};

// Statistics over one solver's records. Timed-out runs count with the
// timeout value as their time.
inline SolverStats aggregate_stats(const std::vector<RunRecord>& records, double timeout_seconds) {
  SolverStats s;
  if (records.empty()) return s;
  double log_sum = 0.0, sum = 0.0;
  std::vector<double> times;
  times.reserve(records.size());
  for (const RunRecord& r : records) {
    double t = r.status == SolveStatus::TimedOut ? timeout_seconds : r.elapsed_seconds;
    times.push_back(t);
    if (r.status == SolveStatus::TimedOut) ++s.timeouts;
    if (r.status == SolveStatus::Infeasible) ++s.failed;
  }
  s.runs = static_cast<int>(times.size());
  s.min_time = times.front();
  s.max_time = times.front();
  for (double t : times) {
    s.min_time = std::min(s.min_time, t);
    s.max_time = std::max(s.max_time, t);
    sum += t;
    log_sum += std::log(std::max(t, 1e-12));
  }
  s.total = sum;
  double mean = sum / s.runs;
  double var = 0.0;
  for (double t : times) var += (t - mean) * (t - mean);
  s.stddev = std::sqrt(var / s.runs);
  s.geometric_mean = std::exp(log_sum / s.runs);
  return s;
}

// A solver under benchmark: callable on a model with a time limit.
struct BenchSolver {
  std::string name;
  std::function<SolveOutcome(const IlpModel&, double timeout_seconds)> run;
};

// A pre-encoded problem. Encoding time is deliberately excluded from the
// measurements; all solvers receive the same constraints.
struct BenchInstance {
  std::string id;
  IlpModel model;
  // evaluates (criterion-1, criterion-2) on an assignment, when the caller
  // can provide it
  std::function<std::pair<std::int64_t, std::int64_t>(std::span<const std::uint8_t>)> criteria;
};

struct BenchResult {
  std::vector<RunRecord> records;  // instance-major, solver-minor order
  std::vector<std::pair<std::string, SolverStats>> stats;  // per solver
};

// Runs every solver on every instance under the timeout; `jobs` bounds the
// number of concurrent solves.
inline BenchResult run_bench(const std::vector<BenchInstance>& instances,
                             const std::vector<BenchSolver>& solvers, double timeout_seconds,
                             int jobs = 1) {
  if (timeout_seconds <= 0) throw std::invalid_argument("timeout must be positive");
  BenchResult result;
  result.records.resize(instances.size() * solvers.size());

  std::atomic<std::size_t> next{0};
  auto run_task = [&](std::size_t task) {
    std::size_t ii = task / solvers.size();
    std::size_t si = task % solvers.size();
    const BenchInstance& inst = instances[ii];
    const BenchSolver& solver = solvers[si];
    RunRecord rec;
    rec.instance = inst.id;
    rec.solver = solver.name;
    auto t0 = std::chrono::steady_clock::now();
    SolveOutcome outcome = solver.run(inst.model, timeout_seconds);
    rec.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (outcome.status == SolveStatus::TimedOut && rec.elapsed_seconds < timeout_seconds)
      rec.elapsed_seconds = timeout_seconds;
    rec.status = outcome.status;
    rec.has_best = outcome.best.has_value();
    if (outcome.best) {
      rec.objective = outcome.best->objective;
      if (inst.criteria) rec.criteria = inst.criteria(outcome.best->values);
    }
    result.records[task] = std::move(rec);
  };

  if (jobs <= 1) {
    for (std::size_t task = 0; task < result.records.size(); ++task) run_task(task);
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j)
      pool.emplace_back([&]() {
        for (;;) {
          std::size_t task = next.fetch_add(1);
          if (task >= result.records.size()) return;
          run_task(task);
        }
      });
    for (std::thread& t : pool) t.join();
  }

  for (std::size_t si = 0; si < solvers.size(); ++si) {
    std::vector<RunRecord> mine;
    for (std::size_t ii = 0; ii < instances.size(); ++ii)
      mine.push_back(result.records[ii * solvers.size() + si]);
    result.stats.emplace_back(solvers[si].name, aggregate_stats(mine, timeout_seconds));
  }
  return result;
}

namespace detail {

inline std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace detail

// Plain-text statistics table, one column per solver.
inline std::string format_stats_table(const std::string& label,
                                      const std::vector<std::pair<std::string, SolverStats>>& stats) {
  std::vector<std::string> row_names = {"nb time out",        "nb failed",
                                        "min time (s)",       "max time (s)",
                                        "geometric mean time", "standard deviation",
                                        "total time (s)"};
  std::size_t left = label.size();
  for (const std::string& r : row_names) left = std::max(left, r.size());

  std::vector<std::vector<std::string>> columns;
  for (const auto& [name, s] : stats) {
    std::vector<std::string> col = {name,
                                    std::to_string(s.timeouts),
                                    std::to_string(s.failed),
                                    detail::fixed2(s.min_time),
                                    detail::fixed2(s.max_time),
                                    detail::fixed2(s.geometric_mean),
                                    detail::fixed2(s.stddev),
                                    detail::fixed2(s.total)};
    columns.push_back(std::move(col));
  }
  std::vector<std::size_t> widths;
  for (const auto& col : columns) {
    std::size_t w = 0;
    for (const std::string& cell : col) w = std::max(w, cell.size());
    widths.push_back(w);
  }

  std::string out;
  auto emit_row = [&](std::size_t row, const std::string& head) {
    out += head;
    out.append(left - head.size(), ' ');
    for (std::size_t c = 0; c < columns.size(); ++c) {
      out += "  ";
      const std::string& cell = columns[c][row];
      out.append(widths[c] - cell.size(), ' ');
      out += cell;
    }
    out += "\n";
  };
  emit_row(0, label);
  for (std::size_t r = 0; r < row_names.size(); ++r) emit_row(r + 1, row_names[r]);
  return out;
}

// Machine-readable record stream: instance, solver, status, elapsed(ms),
// objective — tab separated, one line per run.
inline std::string format_records(const std::vector<RunRecord>& records) {
  std::string out;
  for (const RunRecord& r : records) {
    out += r.instance + "\t" + r.solver + "\t";
    if (r.status == SolveStatus::TimedOut) out += r.has_best ? "timeout-incumbent" : "timeout";
    else out += r.status == SolveStatus::Optimal ? "optimal" : "infeasible";
    char ms[64];
    std::snprintf(ms, sizeof(ms), "%.3f", r.elapsed_seconds * 1000.0);
    out += "\t";
    out += ms;
    out += "\t";
    out += r.objective ? std::to_string(*r.objective) : "-";
    out += "\n";
  }
  return out;
}

}  // namespace cupl
