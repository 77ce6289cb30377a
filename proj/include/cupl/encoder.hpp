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
#include <cstdint>
#include <vector>

#include "cupl/cudf.hpp"
#include "cupl/ilp.hpp"

// Translation of a (universe, initial configuration, request) triple into a
// 0-1 ILP. Unit variables state whether a (package, version) couple ends up
// installed; auxiliary per-name variables track whether any version of a
// package is installed and carry the stability objective.

namespace cupl {

enum class ObjectiveMode : std::uint8_t {
  Aggregate,   // criterion 1 scaled to dominate criterion 2, single solve
  Criterion1,  // minimize removed functionalities only
  Criterion2,  // minimize changed units only
};

inline bool needs_feature_vars(ObjectiveMode mode) { return mode != ObjectiveMode::Criterion2; }

struct EncodeOptions {
  ObjectiveMode mode = ObjectiveMode::Aggregate;
  // Aggregation weight W applied to criterion-1 terms. The default
  // W = Card(P) + 1 makes criterion-1 dominance strict: criterion-2 values
  // span a range of width Card(P), so any weight > Card(P) forbids ties
  // across distinct criterion-1 values. W = Card(P) keeps the historical
  // weighting, which can tie.
  bool paper_exact_weight = false;
};

inline std::int64_t aggregate_weight(const Universe& u, bool paper_exact) {
  return static_cast<std::int64_t>(u.size()) + (paper_exact ? 0 : 1);
}

// Unit variables in document order, then (when requested) one feature
// auxiliary per package name in name order.
inline void register_variables(IlpModel& m, const Universe& u, bool with_feature_vars) {
  for (const PackageUnit& p : u.units()) m.add_unit_var(p.name, p.version);
  if (with_feature_vars)
    for (const auto& [name, versions] : u.by_name()) m.add_feature_var(name);
}

namespace detail {

// Union of the expansions of a group of atoms, as sorted unique variables.
inline std::vector<Var> expansion_vars(const IlpModel& m, const Universe& u,
                                       const std::vector<Atom>& atoms) {
  std::vector<Var> vars;
  for (const Atom& a : atoms)
    for (const UnitId& id : expand_atom(u, a)) vars.push_back(m.unit_var(id.name, id.version));
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  return vars;
}

}  // namespace detail

// Dependency CNF of one unit. Clauses whose expansion is a single unit are
// batched into one `-n p_v + sum(p_i) >= 0`; every multi-unit clause gets
// its own `-p_v + sum(p_jk) >= 0`; a clause with an empty expansion forces
// the unit out via `-p_v >= 0`.
inline std::vector<LinearConstraint> encode_depends(const IlpModel& m, const Universe& u,
                                                    const PackageUnit& p) {
  std::vector<LinearConstraint> out;
  Var pv = m.unit_var(p.name, p.version);
  std::vector<Var> forced;
  std::vector<std::vector<Var>> rest;  // multi-unit and empty clauses, in clause order
  for (const DependsClause& clause : p.depends.clauses) {
    std::vector<Var> vars = detail::expansion_vars(m, u, clause);
    if (vars.size() == 1) forced.push_back(vars.front());
    else rest.push_back(std::move(vars));
  }
  std::sort(forced.begin(), forced.end());
  forced.erase(std::unique(forced.begin(), forced.end()), forced.end());
  if (!forced.empty()) {
    std::vector<Term> terms{{-static_cast<std::int64_t>(forced.size()), pv}};
    for (Var v : forced) terms.push_back({1, v});
    if (auto c = make_constraint(std::move(terms), Sense::Geq, 0)) out.push_back(std::move(*c));
  }
  for (const std::vector<Var>& vars : rest) {
    std::vector<Term> terms{{-1, pv}};
    for (Var v : vars) terms.push_back({1, v});
    if (auto c = make_constraint(std::move(terms), Sense::Geq, 0)) out.push_back(std::move(*c));
  }
  return out;
}

// Conflict field of one unit: with C the expansion of the conflict atoms
// minus the unit itself and n' = |C|, emit `n' p_v + sum(C) <= n'`. A
// package conflicting with its own name thereby excludes the other
// versions only.
inline std::vector<LinearConstraint> encode_conflicts(const IlpModel& m, const Universe& u,
                                                      const PackageUnit& p) {
  std::vector<LinearConstraint> out;
  Var pv = m.unit_var(p.name, p.version);
  std::vector<Var> conflicted = detail::expansion_vars(m, u, p.conflicts);
  std::erase(conflicted, pv);
  if (conflicted.empty()) return out;
  auto n = static_cast<std::int64_t>(conflicted.size());
  std::vector<Term> terms{{n, pv}};
  for (Var v : conflicted) terms.push_back({1, v});
  if (auto c = make_constraint(std::move(terms), Sense::Leq, n)) out.push_back(std::move(*c));
  return out;
}

struct RequestConstraints {
  std::vector<LinearConstraint> constraints;
  bool infeasible = false;
};

// Install and remove demands pin their expansions; an upgrade on name q
// forbids versions below the highest installed one and requires exactly
// one version at or above it. Unsatisfiable demands leave an explicit
// `0 >= 1` marker so the solver reports failure uniformly.
inline RequestConstraints encode_request(const IlpModel& m, const Universe& u,
                                         const Configuration& init, const Request& r) {
  RequestConstraints out;
  auto push = [&out](std::vector<Term> terms, Sense sense, std::int64_t rhs) {
    if (auto c = make_constraint(std::move(terms), sense, rhs))
      out.constraints.push_back(std::move(*c));
  };

  for (const Atom& a : r.install) {
    std::vector<Var> vars = detail::expansion_vars(m, u, {a});
    if (vars.empty()) {
      out.constraints.push_back({{}, Sense::Geq, 1});
      out.infeasible = true;
    } else if (vars.size() == 1) {
      push({{1, vars.front()}}, Sense::Eq, 1);
    } else {
      std::vector<Term> terms;
      for (Var v : vars) terms.push_back({1, v});
      push(std::move(terms), Sense::Geq, 1);
    }
  }

  for (const Atom& a : r.remove) {
    std::vector<Var> vars = detail::expansion_vars(m, u, {a});
    if (vars.empty()) continue;  // already absent
    std::vector<Term> terms;
    for (Var v : vars) terms.push_back({1, v});
    push(std::move(terms), Sense::Eq, 0);
  }

  for (const Atom& a : r.upgrade) {
    const std::vector<Version>& versions = u.versions_of(a.name);
    if (versions.empty()) {
      out.constraints.push_back({{}, Sense::Geq, 1});
      out.infeasible = true;
      continue;
    }
    Version highest_installed = 0;
    for (Version v : versions)
      if (init.contains(a.name, v)) highest_installed = std::max(highest_installed, v);
    std::vector<Term> lower, upper;
    for (Version v : versions) {
      Var var = m.unit_var(a.name, v);
      if (v < highest_installed) lower.push_back({1, var});
      else upper.push_back({1, var});
    }
    if (!lower.empty()) push(std::move(lower), Sense::Eq, 0);
    push(std::move(upper), Sense::Eq, 1);
  }
  return out;
}

// Ties each per-name auxiliary p to its unit variables: p is installed iff
// some version is. With n'' = |Version(p)|:
//   -p + sum(p_v) >= 0   and   n'' p - sum(p_v) >= 0
inline std::vector<LinearConstraint> encode_feature_links(const IlpModel& m, const Universe& u) {
  std::vector<LinearConstraint> out;
  for (const auto& [name, versions] : u.by_name()) {
    Var p = m.feature_var(name);
    auto n = static_cast<std::int64_t>(versions.size());
    std::vector<Term> low{{-1, p}}, high{{n, p}};
    for (Version v : versions) {
      Var pv = m.unit_var(name, v);
      low.push_back({1, pv});
      high.push_back({-1, pv});
    }
    if (auto c = make_constraint(std::move(low), Sense::Geq, 0)) out.push_back(std::move(*c));
    if (auto c = make_constraint(std::move(high), Sense::Geq, 0)) out.push_back(std::move(*c));
  }
  return out;
}

// Criterion 1: keep installed functionalities (auxiliaries of names with an
// installed version get negative weight). Criterion 2: keep the installed
// units and leave the uninstalled alone. Aggregate scales criterion 1 by W
// so it dominates.
inline Objective build_objective(const IlpModel& m, const Universe& u, const Configuration& init,
                                 ObjectiveMode mode, bool paper_exact_weight = false) {
  Objective obj;
  if (mode != ObjectiveMode::Criterion2) {
    std::int64_t w = mode == ObjectiveMode::Aggregate ? aggregate_weight(u, paper_exact_weight) : 1;
    for (const auto& [name, versions] : u.by_name())
      if (init.any_version_of(name)) obj.terms.push_back({-w, m.feature_var(name)});
  }
  if (mode != ObjectiveMode::Criterion1) {
    for (const PackageUnit& p : u.units()) {
      Var pv = m.unit_var(p.name, p.version);
      obj.terms.push_back({init.contains(p.name, p.version) ? std::int64_t{-1} : std::int64_t{1}, pv});
    }
  }
  return obj;
}

// Full pipeline: per-unit dependency and conflict constraints in document
// order, request constraints, feature links when the mode needs
// auxiliaries, and the objective.
inline IlpModel build_model(const Universe& u, const Configuration& init, const Request& r,
                            EncodeOptions options = {}) {
  IlpModel m;
  register_variables(m, u, needs_feature_vars(options.mode));
  for (const PackageUnit& p : u.units()) {
    for (auto& c : encode_depends(m, u, p)) m.constraints.push_back(std::move(c));
    for (auto& c : encode_conflicts(m, u, p)) m.constraints.push_back(std::move(c));
  }
  RequestConstraints req = encode_request(m, u, init, r);
  for (auto& c : req.constraints) m.constraints.push_back(std::move(c));
  m.infeasible_request = req.infeasible;
  if (needs_feature_vars(options.mode))
    for (auto& c : encode_feature_links(m, u)) m.constraints.push_back(std::move(c));
  m.objective = build_objective(m, u, init, options.mode, options.paper_exact_weight);
  return m;
}

}  // namespace cupl
