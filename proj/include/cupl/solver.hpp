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

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cupl/encoder.hpp"
#include "cupl/ilp.hpp"

// Exact minimization over binary variables: depth-first branch-and-bound
// with incremental pseudo-Boolean unit propagation, plus an exhaustive
// oracle for small models and a two-stage lexicographic driver.

namespace cupl {

enum class SolveStatus : std::uint8_t { Optimal, Infeasible, TimedOut };

inline std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::TimedOut: return "timed-out";
  }
  return "";
}

struct SolveStats {
  std::uint64_t nodes = 0;
  std::uint64_t propagations = 0;
  double elapsed_seconds = 0.0;
};

struct Solution {
  std::vector<std::uint8_t> values;  // total over the model's variables
  std::int64_t objective = 0;
};

struct SolveOutcome {
  SolveStatus status = SolveStatus::Infeasible;
  std::optional<Solution> best;  // present when optimal, or timed out with an incumbent
  SolveStats stats;
};

namespace detail {

// --------------------------------------------------------------------------
// normalized form: every constraint as sum(coef * var) >= rhs

struct NormConstraint {
  std::vector<Term> terms;
  std::int64_t rhs = 0;
  std::int64_t max_abs_coef = 0;
};

struct NormalizedModel {
  std::size_t nvars = 0;
  std::vector<NormConstraint> cons;
  // per variable: (constraint index, coefficient there)
  std::vector<std::vector<std::pair<std::int32_t, std::int64_t>>> occurrences;
  std::vector<std::int64_t> objective;  // dense coefficient per variable

  explicit NormalizedModel(const IlpModel& m) : nvars(m.num_vars()) {
    auto add = [this](const std::vector<Term>& terms, std::int64_t rhs, bool negate) {
      NormConstraint c;
      c.terms.reserve(terms.size());
      for (const Term& t : terms) {
        std::int64_t coef = negate ? -t.coef : t.coef;
        c.terms.push_back({coef, t.var});
        c.max_abs_coef = std::max(c.max_abs_coef, coef < 0 ? -coef : coef);
      }
      c.rhs = negate ? -rhs : rhs;
      cons.push_back(std::move(c));
    };
    for (const LinearConstraint& c : m.constraints) {
      switch (c.sense) {
        case Sense::Geq: add(c.terms, c.rhs, false); break;
        case Sense::Leq: add(c.terms, c.rhs, true); break;
        case Sense::Eq:
          add(c.terms, c.rhs, false);
          add(c.terms, c.rhs, true);
          break;
      }
    }
    occurrences.resize(nvars);
    for (std::size_t ci = 0; ci < cons.size(); ++ci)
      for (const Term& t : cons[ci].terms)
        occurrences[static_cast<std::size_t>(t.var)].emplace_back(static_cast<std::int32_t>(ci),
                                                                  t.coef);
    objective.assign(nvars, 0);
    for (const Term& t : m.objective.terms) objective[static_cast<std::size_t>(t.var)] += t.coef;
  }
};

// --------------------------------------------------------------------------
// propagation engine with trail-based undo
//
// For each normalized constraint we track the maximum achievable left side
// under the current partial assignment. A constraint conflicts as soon as
// that bound drops below its rhs; a variable is forced when one of its
// values would make the bound drop below rhs.

class Propagator {
 public:
  explicit Propagator(const NormalizedModel& nm)
      : nm_(nm), value_(nm.nvars, -1), maxpot_(nm.cons.size(), 0), in_queue_(nm.cons.size(), 0) {
    for (std::size_t ci = 0; ci < nm_.cons.size(); ++ci) {
      for (const Term& t : nm_.cons[ci].terms)
        if (t.coef > 0) maxpot_[ci] += t.coef;
    }
    for (std::size_t v = 0; v < nm_.nvars; ++v) lower_bound_ += std::min<std::int64_t>(0, nm_.objective[v]);
  }

  std::int8_t value(Var v) const { return value_[static_cast<std::size_t>(v)]; }
  std::size_t trail_size() const { return trail_.size(); }
  std::uint64_t propagations() const { return propagations_; }

  // Objective lower bound of any completion of the current partial
  // assignment: exact part over assigned variables plus the sum of
  // negative coefficients over unassigned ones.
  std::int64_t lower_bound() const { return lower_bound_; }

  // Initial full propagation pass; false on conflict.
  bool propagate_root() {
    for (std::size_t ci = 0; ci < nm_.cons.size(); ++ci) {
      if (maxpot_[ci] < nm_.cons[ci].rhs) return false;
      enqueue(static_cast<std::int32_t>(ci));
    }
    return drain();
  }

  // Assigns v := val (conflict if already fixed otherwise) and propagates
  // to fixpoint. On conflict the trail keeps the partial work; the caller
  // unwinds with undo_to.
  bool assign(Var v, std::uint8_t val) {
    std::int8_t cur = value_[static_cast<std::size_t>(v)];
    if (cur >= 0) return cur == static_cast<std::int8_t>(val);
    if (!apply(v, val)) return false;
    return drain();
  }

  void undo_to(std::size_t mark) {
    while (trail_.size() > mark) {
      Var v = trail_.back();
      trail_.pop_back();
      std::uint8_t val = static_cast<std::uint8_t>(value_[static_cast<std::size_t>(v)]);
      value_[static_cast<std::size_t>(v)] = -1;
      for (const auto& [ci, coef] : nm_.occurrences[static_cast<std::size_t>(v)]) {
        std::int64_t delta = contribution_delta(coef, val);
        if (delta) maxpot_[static_cast<std::size_t>(ci)] -= delta;
      }
      lower_bound_ -= nm_.objective[static_cast<std::size_t>(v)] * val -
                      std::min<std::int64_t>(0, nm_.objective[static_cast<std::size_t>(v)]);
    }
    // pending propagation work belongs to the abandoned branch
    for (std::int32_t ci : queue_) in_queue_[static_cast<std::size_t>(ci)] = 0;
    queue_.clear();
  }

  // Snapshot of the current (total) assignment.
  std::vector<std::uint8_t> values() const {
    std::vector<std::uint8_t> out(nm_.nvars);
    for (std::size_t i = 0; i < nm_.nvars; ++i) out[i] = value_[i] == 1 ? 1 : 0;
    return out;
  }

 private:
  // change of a constraint's maximum achievable LHS when a variable with
  // coefficient `coef` gets fixed to `val`
  static std::int64_t contribution_delta(std::int64_t coef, std::uint8_t val) {
    return coef > 0 ? (val ? 0 : -coef) : (val ? coef : 0);
  }

  bool apply(Var v, std::uint8_t val) {
    value_[static_cast<std::size_t>(v)] = static_cast<std::int8_t>(val);
    trail_.push_back(v);
    lower_bound_ += nm_.objective[static_cast<std::size_t>(v)] * val -
                    std::min<std::int64_t>(0, nm_.objective[static_cast<std::size_t>(v)]);
    bool ok = true;
    for (const auto& [ci, coef] : nm_.occurrences[static_cast<std::size_t>(v)]) {
      std::int64_t delta = contribution_delta(coef, val);
      if (delta == 0) continue;
      auto c = static_cast<std::size_t>(ci);
      maxpot_[c] += delta;
      if (maxpot_[c] < nm_.cons[c].rhs) ok = false;  // keep maxpot consistent, fail after loop
      else if (maxpot_[c] - nm_.cons[c].max_abs_coef < nm_.cons[c].rhs)
        enqueue(ci);
    }
    return ok;
  }

  void enqueue(std::int32_t ci) {
    if (!in_queue_[static_cast<std::size_t>(ci)]) {
      in_queue_[static_cast<std::size_t>(ci)] = 1;
      queue_.push_back(ci);
    }
  }

  bool drain() {
    while (!queue_.empty()) {
      std::int32_t ci = queue_.back();
      queue_.pop_back();
      in_queue_[static_cast<std::size_t>(ci)] = 0;
      if (!scan(static_cast<std::size_t>(ci))) {
        for (std::int32_t q : queue_) in_queue_[static_cast<std::size_t>(q)] = 0;
        queue_.clear();
        return false;
      }
    }
    return true;
  }

  // Fixes every variable of constraint ci whose opposite value would make
  // the constraint unreachable. Forced values never lower this
  // constraint's own bound, so maxpot_[ci] stays valid during the scan.
  bool scan(std::size_t ci) {
    const NormConstraint& c = nm_.cons[ci];
    if (maxpot_[ci] < c.rhs) return false;
    if (maxpot_[ci] - c.max_abs_coef >= c.rhs) return true;
    for (const Term& t : c.terms) {
      if (value_[static_cast<std::size_t>(t.var)] >= 0) continue;
      if (t.coef > 0 && maxpot_[ci] - t.coef < c.rhs) {
        ++propagations_;
        if (!apply(t.var, 1)) return false;
      } else if (t.coef < 0 && maxpot_[ci] + t.coef < c.rhs) {
        ++propagations_;
        if (!apply(t.var, 0)) return false;
      }
    }
    return true;
  }

  const NormalizedModel& nm_;
  std::vector<std::int8_t> value_;
  std::vector<std::int64_t> maxpot_;
  std::vector<std::uint8_t> in_queue_;
  std::vector<std::int32_t> queue_;
  std::vector<Var> trail_;
  std::int64_t lower_bound_ = 0;
  std::uint64_t propagations_ = 0;
};

}  // namespace detail

// --------------------------------------------------------------------------
// standalone propagation entry point

struct PropagateResult {
  bool conflict = false;
  // -1 unassigned, else the (possibly forced) value
  std::vector<std::int8_t> values;
};

// Fixed point of unit propagation from a partial assignment.
inline PropagateResult propagate(const IlpModel& m,
                                 const std::vector<std::pair<Var, std::uint8_t>>& partial) {
  detail::NormalizedModel nm(m);
  detail::Propagator prop(nm);
  PropagateResult out;
  bool ok = prop.propagate_root();
  for (const auto& [var, val] : partial)
    if (!(ok = ok && prop.assign(var, val))) break;
  out.conflict = !ok;
  out.values.resize(m.num_vars());
  for (std::size_t v = 0; v < m.num_vars(); ++v) out.values[v] = prop.value(static_cast<Var>(v));
  return out;
}

// --------------------------------------------------------------------------
// branch and bound

class BranchBoundSolver {
 public:
  explicit BranchBoundSolver(const IlpModel& model) : model_(model), nm_(model) {
    // branch on heavy objective variables first, then on the busiest ones;
    // ties fall back to variable order
    order_.resize(nm_.nvars);
    for (std::size_t i = 0; i < nm_.nvars; ++i) order_[i] = static_cast<Var>(i);
    std::sort(order_.begin(), order_.end(), [this](Var a, Var b) {
      std::int64_t wa = obj_weight(a), wb = obj_weight(b);
      if (wa != wb) return wa > wb;
      std::size_t oa = nm_.occurrences[static_cast<std::size_t>(a)].size();
      std::size_t ob = nm_.occurrences[static_cast<std::size_t>(b)].size();
      if (oa != ob) return oa > ob;
      return a < b;
    });
    preferred_.resize(nm_.nvars);
    for (std::size_t v = 0; v < nm_.nvars; ++v)
      preferred_[v] = nm_.objective[v] < 0 ? 1 : 0;  // objective-improving value first
  }

  SolveOutcome solve(double timeout_seconds) {
    if (timeout_seconds <= 0) throw std::invalid_argument("timeout must be positive");
    auto start = std::chrono::steady_clock::now();
    auto deadline = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                std::chrono::duration<double>(timeout_seconds));
    SolveOutcome out;
    auto finish = [&](SolveStatus status) {
      out.status = status;
      out.stats.propagations = prop_ ? prop_->propagations() : 0;
      out.stats.elapsed_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (status == SolveStatus::TimedOut && out.stats.elapsed_seconds < timeout_seconds)
        out.stats.elapsed_seconds = timeout_seconds;
      return out;
    };

    if (model_.infeasible_request) return finish(SolveStatus::Infeasible);

    prop_.emplace(nm_);
    if (!prop_->propagate_root()) return finish(SolveStatus::Infeasible);

    std::int64_t best_value = std::numeric_limits<std::int64_t>::max();
    std::optional<std::vector<std::uint8_t>> best;

    struct Frame {
      Var var;
      std::uint8_t first;
      bool tried_second;
      std::size_t trail_mark;
      std::size_t order_pos;
    };
    std::vector<Frame> stack;
    bool descending = true;

    for (;;) {
      if ((out.stats.nodes & 0xFF) == 0 && std::chrono::steady_clock::now() >= deadline) {
        if (best) out.best = Solution{std::move(*best), best_value};
        return finish(SolveStatus::TimedOut);
      }
      if (descending) {
        if (prop_->lower_bound() >= best_value) {
          descending = false;
          continue;
        }
        std::size_t pos = stack.empty() ? 0 : stack.back().order_pos + 1;
        while (pos < order_.size() && prop_->value(order_[pos]) >= 0) ++pos;
        if (pos == order_.size()) {
          // total assignment; propagation keeps every bound >= rhs, so it
          // is feasible, and the lower bound is now the exact objective
          best_value = prop_->lower_bound();
          best = prop_->values();
          descending = false;
          continue;
        }
        Var v = order_[pos];
        ++out.stats.nodes;
        stack.push_back({v, preferred_[static_cast<std::size_t>(v)], false, prop_->trail_size(), pos});
        descending = prop_->assign(v, stack.back().first);
      } else {
        if (stack.empty()) break;
        Frame& f = stack.back();
        prop_->undo_to(f.trail_mark);
        if (!f.tried_second) {
          f.tried_second = true;
          ++out.stats.nodes;
          descending = prop_->assign(f.var, static_cast<std::uint8_t>(1 - f.first));
        } else {
          stack.pop_back();
        }
      }
    }

    if (!best) return finish(SolveStatus::Infeasible);
    // never trust the search bookkeeping for the final answer
    if (!satisfies_all(model_, *best) || objective_value(model_, *best) != best_value)
      throw std::logic_error("branch-and-bound returned an inconsistent optimum");
    out.best = Solution{std::move(*best), best_value};
    return finish(SolveStatus::Optimal);
  }

 private:
  std::int64_t obj_weight(Var v) const {
    std::int64_t c = nm_.objective[static_cast<std::size_t>(v)];
    return c < 0 ? -c : c;
  }

  const IlpModel& model_;
  detail::NormalizedModel nm_;
  std::vector<Var> order_;
  std::vector<std::uint8_t> preferred_;
  std::optional<detail::Propagator> prop_;
};

// Exact minimization by depth-first branch-and-bound under a deadline.
inline SolveOutcome solve(const IlpModel& m, double timeout_seconds = 300.0) {
  return BranchBoundSolver(m).solve(timeout_seconds);
}

// Exhaustive reference: enumerates every assignment in lexicographic order
// over the model's variables and keeps the first minimum found.
inline SolveOutcome solve_bruteforce(const IlpModel& m) {
  constexpr std::size_t kMaxVars = 24;
  if (m.num_vars() > kMaxVars)
    throw std::invalid_argument("solve_bruteforce supports at most 24 variables");
  auto start = std::chrono::steady_clock::now();
  SolveOutcome out;
  std::size_t n = m.num_vars();
  if (!m.infeasible_request) {
    std::vector<std::uint8_t> x(n, 0);
    std::int64_t best_value = std::numeric_limits<std::int64_t>::max();
    std::optional<std::vector<std::uint8_t>> best;
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << n); ++code) {
      for (std::size_t i = 0; i < n; ++i) x[i] = (code >> (n - 1 - i)) & 1;
      ++out.stats.nodes;
      if (!satisfies_all(m, x)) continue;
      std::int64_t value = objective_value(m, x);
      if (value < best_value) {
        best_value = value;
        best = x;
      }
    }
    if (best) out.best = Solution{std::move(*best), best_value};
  }
  out.status = out.best ? SolveStatus::Optimal : SolveStatus::Infeasible;
  out.stats.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

// --------------------------------------------------------------------------
// lexicographic two-stage driver

struct LexicographicOutcome {
  SolveOutcome outcome;  // final stage reached
  // (criterion-1, criterion-2) optimum values, present when both stages
  // finished to optimality
  std::optional<std::pair<std::int64_t, std::int64_t>> criteria;
};

// Classical lexicographic order via mono-criterion solves: minimize
// criterion 1, pin its optimum with an equality, then minimize criterion 2
// under the pin. Produces the same value pair as the aggregate objective
// with its default weight.
inline LexicographicOutcome lexicographic_solve(const Universe& u, const Configuration& init,
                                                const Request& r, double stage_timeout_seconds = 300.0) {
  IlpModel stage1 = build_model(u, init, r, {ObjectiveMode::Criterion1});
  SolveOutcome s1 = solve(stage1, stage_timeout_seconds);
  if (s1.status != SolveStatus::Optimal) return {std::move(s1), std::nullopt};
  std::int64_t z1 = s1.best->objective;

  IlpModel stage2 = std::move(stage1);
  if (auto pin = make_constraint(stage2.objective.terms, Sense::Eq, z1))
    stage2.constraints.push_back(std::move(*pin));
  stage2.objective = build_objective(stage2, u, init, ObjectiveMode::Criterion2);
  SolveOutcome s2 = solve(stage2, stage_timeout_seconds);
  std::optional<std::pair<std::int64_t, std::int64_t>> criteria;
  if (s2.status == SolveStatus::Optimal) criteria = {z1, s2.best->objective};
  return {std::move(s2), criteria};
}

}  // namespace cupl
