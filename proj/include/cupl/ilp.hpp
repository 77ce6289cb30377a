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
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "cupl/cudf.hpp"

// 0-1 integer linear program over package variables: one binary variable
// per (package, version) unit plus one auxiliary binary per package name
// when an objective needs per-functionality terms.

namespace cupl {

using Var = std::int32_t;
inline constexpr Var kNoVar = -1;

enum class VarKind : std::uint8_t { Unit, FeatureAux };

struct VarInfo {
  VarKind kind;
  std::string name;
  Version version = 0;  // Unit only
};

enum class Sense : std::uint8_t { Geq, Leq, Eq };

inline std::string_view sense_token(Sense s) {
  switch (s) {
    case Sense::Geq: return ">=";
    case Sense::Leq: return "<=";
    case Sense::Eq: return "=";
  }
  return "";
}

struct Term {
  std::int64_t coef;
  Var var;

  friend bool operator==(const Term&, const Term&) = default;
};

// terms hold unique variables with nonzero coefficients. A constraint with
// no terms is the explicit infeasibility marker `0 >= 1`.
struct LinearConstraint {
  std::vector<Term> terms;
  Sense sense = Sense::Geq;
  std::int64_t rhs = 0;

  friend bool operator==(const LinearConstraint&, const LinearConstraint&) = default;
};

// Linear expression to minimize. Coefficients are 64-bit: the aggregate
// weight times the name count stays far below the signed range even at the
// largest realistic universe sizes.
struct Objective {
  std::vector<Term> terms;

  friend bool operator==(const Objective&, const Objective&) = default;
};

struct IlpModel {
  std::vector<VarInfo> vars;
  std::vector<LinearConstraint> constraints;
  Objective objective;
  // set when a request demand was unsatisfiable at encoding time
  bool infeasible_request = false;

  std::size_t num_vars() const { return vars.size(); }

  Var add_unit_var(const std::string& name, Version version) {
    Var v = static_cast<Var>(vars.size());
    vars.push_back({VarKind::Unit, name, version});
    unit_lookup_[name].emplace(version, v);
    return v;
  }

  Var add_feature_var(const std::string& name) {
    Var v = static_cast<Var>(vars.size());
    vars.push_back({VarKind::FeatureAux, name, 0});
    feature_lookup_.emplace(name, v);
    return v;
  }

  Var unit_var(const std::string& name, Version version) const {
    auto it = unit_lookup_.find(name);
    if (it == unit_lookup_.end()) return kNoVar;
    auto vt = it->second.find(version);
    return vt == it->second.end() ? kNoVar : vt->second;
  }

  Var feature_var(const std::string& name) const {
    auto it = feature_lookup_.find(name);
    return it == feature_lookup_.end() ? kNoVar : it->second;
  }

  const VarInfo& info(Var v) const { return vars.at(static_cast<std::size_t>(v)); }

  // Raw display label: `name_version` for units, the bare name for the
  // per-package auxiliaries.
  std::string var_label(Var v) const {
    const VarInfo& i = info(v);
    return i.kind == VarKind::Unit ? i.name + "_" + std::to_string(i.version) : i.name;
  }

  // Installed units under an assignment; auxiliaries are ignored.
  Configuration decode(std::span<const std::uint8_t> values) const {
    Configuration c;
    for (std::size_t i = 0; i < vars.size(); ++i)
      if (values[i] && vars[i].kind == VarKind::Unit)
        c.installed.insert({vars[i].name, vars[i].version});
    return c;
  }

 private:
  std::unordered_map<std::string, std::map<Version, Var>> unit_lookup_;
  std::unordered_map<std::string, Var> feature_lookup_;
};

inline std::int64_t eval_terms(const std::vector<Term>& terms,
                               std::span<const std::uint8_t> values) {
  std::int64_t sum = 0;
  for (const Term& t : terms)
    if (values[static_cast<std::size_t>(t.var)]) sum += t.coef;
  return sum;
}

inline bool satisfied(const LinearConstraint& c, std::span<const std::uint8_t> values) {
  std::int64_t lhs = eval_terms(c.terms, values);
  switch (c.sense) {
    case Sense::Geq: return lhs >= c.rhs;
    case Sense::Leq: return lhs <= c.rhs;
    case Sense::Eq: return lhs == c.rhs;
  }
  return false;
}

inline bool satisfies_all(const IlpModel& m, std::span<const std::uint8_t> values) {
  for (const LinearConstraint& c : m.constraints)
    if (!satisfied(c, values)) return false;
  return true;
}

inline std::int64_t objective_value(const IlpModel& m, std::span<const std::uint8_t> values) {
  return eval_terms(m.objective.terms, values);
}

namespace detail {

// `- a_1 + 2 b_1` style rendering shared by the debug formatter and the
// LP writer: sign separators, unit coefficients omitted.
template <typename TokenFn>
void append_terms(std::string& out, const std::vector<Term>& terms, TokenFn&& token) {
  bool first = true;
  for (const Term& t : terms) {
    std::int64_t mag = t.coef < 0 ? -t.coef : t.coef;
    if (first) {
      if (t.coef < 0) out += "- ";
    } else {
      out += t.coef < 0 ? " - " : " + ";
    }
    if (mag != 1) out += std::to_string(mag) + " ";
    out += token(t.var);
    first = false;
  }
  if (first) out += "0";
}

}  // namespace detail

// Human-readable form with raw names, e.g. `- gasoline-engine_1 + turbo_1 >= 0`.
inline std::string format_constraint(const IlpModel& m, const LinearConstraint& c) {
  std::string out;
  detail::append_terms(out, c.terms, [&m](Var v) { return m.var_label(v); });
  out += " ";
  out += sense_token(c.sense);
  out += " " + std::to_string(c.rhs);
  return out;
}

// Merges duplicate variables, drops zero coefficients, and suppresses
// constraints that became trivially true; an unsatisfiable residue (e.g.
// `0 >= 1`) is kept as the infeasibility marker.
inline std::optional<LinearConstraint> make_constraint(std::vector<Term> terms, Sense sense,
                                                       std::int64_t rhs) {
  std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
  std::vector<Term> merged;
  for (const Term& t : terms) {
    if (!merged.empty() && merged.back().var == t.var) merged.back().coef += t.coef;
    else merged.push_back(t);
  }
  std::erase_if(merged, [](const Term& t) { return t.coef == 0; });
  if (merged.empty()) {
    bool holds = (sense == Sense::Geq && 0 >= rhs) || (sense == Sense::Leq && 0 <= rhs) ||
                 (sense == Sense::Eq && rhs == 0);
    if (holds) return std::nullopt;
  }
  return LinearConstraint{std::move(merged), sense, rhs};
}

}  // namespace cupl
