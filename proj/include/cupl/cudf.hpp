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
#include <compare>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Package-universe data model: packages, version constraints, dependency
// formulas, provider maps and installation states.

namespace cupl {

// Versions are arbitrary positive integers ordered numerically. They need
// not be contiguous.
using Version = std::int64_t;

enum class Relation : std::uint8_t { Any, Eq, Neq, Geq, Leq, Gt, Lt };

inline std::string_view relation_token(Relation r) {
  switch (r) {
    case Relation::Any: return "";
    case Relation::Eq: return "=";
    case Relation::Neq: return "!=";
    case Relation::Geq: return ">=";
    case Relation::Leq: return "<=";
    case Relation::Gt: return ">";
    case Relation::Lt: return "<";
  }
  return "";
}

// A version filter on a package or feature name. `version` is meaningful
// only when `rel != Any`.
struct VersionConstraint {
  Relation rel = Relation::Any;
  Version version = 0;

  static VersionConstraint any() { return {}; }
  static VersionConstraint exactly(Version v) { return {Relation::Eq, v}; }
  static VersionConstraint at_least(Version v) { return {Relation::Geq, v}; }

  friend bool operator==(const VersionConstraint&, const VersionConstraint&) = default;
};

// true iff v satisfies the constraint; Any matches every version.
inline bool match(const VersionConstraint& c, Version v) {
  switch (c.rel) {
    case Relation::Any: return true;
    case Relation::Eq: return v == c.version;
    case Relation::Neq: return v != c.version;
    case Relation::Geq: return v >= c.version;
    case Relation::Leq: return v <= c.version;
    case Relation::Gt: return v > c.version;
    case Relation::Lt: return v < c.version;
  }
  return false;
}

// A version-constrained package or feature name, e.g. "engine >= 2".
struct Atom {
  std::string name;
  VersionConstraint constraint;

  friend bool operator==(const Atom&, const Atom&) = default;
};

inline std::string to_string(const Atom& a) {
  if (a.constraint.rel == Relation::Any) return a.name;
  return a.name + " " + std::string(relation_token(a.constraint.rel)) + " " +
         std::to_string(a.constraint.version);
}

// CNF over atoms: every clause must have at least one satisfied atom.
// An empty clause list means "no dependencies".
using DependsClause = std::vector<Atom>;

struct DependsFormula {
  std::vector<DependsClause> clauses;

  bool empty() const { return clauses.empty(); }
  friend bool operator==(const DependsFormula&, const DependsFormula&) = default;
};

// A feature made available by a package; without a version the feature is
// only reachable through unconstrained atoms.
struct ProvidedFeature {
  std::string name;
  std::optional<Version> version;

  friend bool operator==(const ProvidedFeature&, const ProvidedFeature&) = default;
};

// One package stanza. (name, version) is unique within a Universe.
struct PackageUnit {
  std::string name;
  Version version = 0;
  DependsFormula depends;
  std::vector<Atom> conflicts;
  std::vector<ProvidedFeature> provides;
  bool installed = false;

  friend bool operator==(const PackageUnit&, const PackageUnit&) = default;
};

struct UnitId {
  std::string name;
  Version version = 0;

  auto operator<=>(const UnitId&) const = default;
};

inline std::string label(const UnitId& id) {
  return id.name + "_" + std::to_string(id.version);
}

// The install/remove/upgrade demands applied to the initial configuration.
struct Request {
  std::vector<Atom> install;
  std::vector<Atom> remove;
  std::vector<Atom> upgrade;

  bool empty() const { return install.empty() && remove.empty() && upgrade.empty(); }
  friend bool operator==(const Request&, const Request&) = default;
};

// One entry of the provider map: `provider` version `provider_version`
// makes the keyed feature available, either at `feature_version` or
// unversioned.
struct ProviderEntry {
  std::string provider;
  Version provider_version = 0;
  std::optional<Version> feature_version;

  auto operator<=>(const ProviderEntry&) const = default;
};

// Indexed collection of package units. Every unit appears in the provider
// map under its own name (a package provides itself at its real version)
// and under every feature it declares.
class Universe {
 public:
  Universe() = default;

  // Throws std::invalid_argument on a duplicate (name, version).
  void add_unit(PackageUnit unit) {
    UnitId id{unit.name, unit.version};
    if (index_.count(id)) throw std::invalid_argument("duplicate package " + label(id));
    index_.emplace(std::move(id), units_.size());
    units_.push_back(std::move(unit));
    indexed_ = false;
  }

  // Rebuilds by_name and the provider map. Idempotent; called by the
  // parser, must be re-invoked after manual add_unit calls.
  void rebuild_indexes() {
    by_name_.clear();
    providers_.clear();
    for (const PackageUnit& u : units_) {
      by_name_[u.name].push_back(u.version);
      providers_[u.name].push_back({u.name, u.version, u.version});
      for (const ProvidedFeature& f : u.provides)
        providers_[f.name].push_back({u.name, u.version, f.version});
    }
    for (auto& [name, versions] : by_name_) std::sort(versions.begin(), versions.end());
    for (auto& [name, entries] : providers_) {
      std::sort(entries.begin(), entries.end());
      entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
    }
    indexed_ = true;
  }

  const std::vector<PackageUnit>& units() const { return units_; }
  std::size_t size() const { return units_.size(); }

  const std::map<std::string, std::vector<Version>>& by_name() const { return by_name_; }
  const std::map<std::string, std::vector<ProviderEntry>>& providers() const { return providers_; }

  // Real versions of a package name, strictly increasing; empty when the
  // name has no stanza of its own (virtual package).
  const std::vector<Version>& versions_of(const std::string& name) const {
    static const std::vector<Version> kEmpty;
    auto it = by_name_.find(name);
    return it == by_name_.end() ? kEmpty : it->second;
  }

  const PackageUnit* find(const std::string& name, Version v) const {
    auto it = index_.find(UnitId{name, v});
    return it == index_.end() ? nullptr : &units_[it->second];
  }

  bool contains(const UnitId& id) const { return index_.count(id) != 0; }
  bool indexed() const { return indexed_; }

 private:
  std::vector<PackageUnit> units_;
  std::map<UnitId, std::size_t> index_;
  std::map<std::string, std::vector<Version>> by_name_;
  std::map<std::string, std::vector<ProviderEntry>> providers_;
  bool indexed_ = false;
};

// A set of installed (name, version) pairs; both the input state and a
// solver answer.
struct Configuration {
  std::set<UnitId> installed;

  bool contains(const UnitId& id) const { return installed.count(id) != 0; }
  bool contains(const std::string& name, Version v) const { return contains(UnitId{name, v}); }

  // true iff some version of `name` is installed.
  bool any_version_of(const std::string& name) const {
    auto it = installed.lower_bound(UnitId{name, std::numeric_limits<Version>::min()});
    return it != installed.end() && it->name == name;
  }

  // Installed versions of `name`, increasing.
  std::vector<Version> versions_of(const std::string& name) const {
    std::vector<Version> out;
    for (auto it = installed.lower_bound(UnitId{name, std::numeric_limits<Version>::min()});
         it != installed.end() && it->name == name; ++it)
      out.push_back(it->version);
    return out;
  }

  friend bool operator==(const Configuration&, const Configuration&) = default;
};

// All units that carry `a.name` at a matching real version or provide the
// feature `a.name` so that the constraint matches. An unversioned provide
// satisfies only unconstrained atoms; a versioned provide is checked
// against its feature version. May be empty (unsatisfiable atom).
inline std::vector<UnitId> expand_atom(const Universe& u, const Atom& a) {
  std::vector<UnitId> out;
  auto it = u.providers().find(a.name);
  if (it == u.providers().end()) return out;
  for (const ProviderEntry& e : it->second) {
    bool ok = e.feature_version ? match(a.constraint, *e.feature_version)
                                : a.constraint.rel == Relation::Any;
    if (ok) out.push_back({e.provider, e.provider_version});
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// The configuration described by the universe's `installed` flags.
inline Configuration initial_configuration(const Universe& u) {
  Configuration c;
  for (const PackageUnit& p : u.units())
    if (p.installed) c.installed.insert({p.name, p.version});
  return c;
}

}  // namespace cupl
