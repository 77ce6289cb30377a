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

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "cupl/cudf.hpp"

// Judges configurations against the package semantics directly, with no
// reference to any ILP encoding. This is the ground truth the encoder and
// external answers are certified against.

namespace cupl {

enum class ViolationKind : std::uint8_t {
  UnknownUnit,       // configuration names a unit absent from the universe
  Dependency,        // an installed unit has an unsatisfied depends clause
  Conflict,          // two installed units conflict
  Install,           // an install demand has no satisfying installed unit
  Remove,            // a remove demand still matches an installed unit
  UpgradeCount,      // an upgraded name does not have exactly one version
  UpgradeDowngrade,  // the upgraded version is below an initially installed one
};

struct Violation {
  ViolationKind kind;
  std::string subject;
  std::string detail;

  std::string to_string() const { return subject + ": " + detail; }
};

struct CheckResult {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

namespace detail {

inline bool atom_satisfied_by(const Universe& u, const Atom& a, const Configuration& c) {
  for (const UnitId& id : expand_atom(u, a))
    if (c.contains(id)) return true;
  return false;
}

inline std::string clause_text(const DependsClause& clause) {
  std::string out;
  for (std::size_t i = 0; i < clause.size(); ++i) {
    if (i) out += " | ";
    out += to_string(clause[i]);
  }
  return out;
}

}  // namespace detail

// ok iff every installed unit has each depends clause satisfied by some
// installed unit and no other installed unit in its conflict expansion.
inline CheckResult check_consistency(const Universe& u, const Configuration& c) {
  CheckResult result;
  for (const UnitId& id : c.installed) {
    const PackageUnit* unit = u.find(id.name, id.version);
    if (!unit) {
      result.violations.push_back({ViolationKind::UnknownUnit, label(id), "not in the universe"});
      continue;
    }
    for (const DependsClause& clause : unit->depends.clauses) {
      bool satisfied = false;
      for (const Atom& a : clause)
        if (detail::atom_satisfied_by(u, a, c)) {
          satisfied = true;
          break;
        }
      if (!satisfied)
        result.violations.push_back({ViolationKind::Dependency, label(id),
                                     "unsatisfied depends clause: " + detail::clause_text(clause)});
    }
    for (const Atom& a : unit->conflicts) {
      for (const UnitId& other : expand_atom(u, a)) {
        if (other == id) continue;  // self-conflict excludes other versions only
        if (c.contains(other))
          result.violations.push_back(
              {ViolationKind::Conflict, label(id), "conflicts with installed " + label(other)});
      }
    }
  }
  return result;
}

// ok iff every install atom is satisfied in `final`, every remove atom
// matches nothing installed, and every upgraded name has exactly one
// installed version, at least as high as anything initially installed.
inline CheckResult check_request(const Universe& u, const Configuration& init, const Request& r,
                                 const Configuration& final_config) {
  CheckResult result;
  for (const Atom& a : r.install)
    if (!detail::atom_satisfied_by(u, a, final_config))
      result.violations.push_back(
          {ViolationKind::Install, to_string(a), "install demand not satisfied"});
  for (const Atom& a : r.remove) {
    for (const UnitId& id : expand_atom(u, a))
      if (final_config.contains(id))
        result.violations.push_back(
            {ViolationKind::Remove, to_string(a), "still installed: " + label(id)});
  }
  for (const Atom& a : r.upgrade) {
    std::vector<Version> now = final_config.versions_of(a.name);
    if (now.size() != 1) {
      result.violations.push_back({ViolationKind::UpgradeCount, to_string(a),
                                   "expected exactly one installed version, found " +
                                       std::to_string(now.size())});
      continue;
    }
    for (Version v : init.versions_of(a.name))
      if (now.front() < v)
        result.violations.push_back(
            {ViolationKind::UpgradeDowngrade, to_string(a),
             "version " + std::to_string(now.front()) + " is below initially installed " +
                 std::to_string(v)});
  }
  return result;
}

struct ConfigDiff {
  // package names that had an installed version initially and none anymore
  std::int64_t removed_functionalities = 0;
  // units whose installed status flipped, in either direction
  std::int64_t changed_units = 0;
};

inline ConfigDiff diff_configurations(const Configuration& init, const Configuration& final_config,
                                      const Universe&) {
  ConfigDiff d;
  std::set<std::string> init_names;
  for (const UnitId& id : init.installed) init_names.insert(id.name);
  for (const std::string& name : init_names)
    if (!final_config.any_version_of(name)) ++d.removed_functionalities;
  for (const UnitId& id : init.installed)
    if (!final_config.contains(id)) ++d.changed_units;
  for (const UnitId& id : final_config.installed)
    if (!init.contains(id)) ++d.changed_units;
  return d;
}

}  // namespace cupl
