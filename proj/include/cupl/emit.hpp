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
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cupl/ilp.hpp"

// Writers for the solver interchange formats: a CPLEX-style LP dialect with
// readable names and the OPB pseudo-Boolean dialect with positional names
// plus a sidecar map.

namespace cupl {

// Percent-escapes everything outside [A-Za-z0-9]; a leading digit is
// escaped as well so the escaped form never reads as a bare number. Keeps
// unit tokens (`<name>_<version>`) and auxiliary tokens (`F_<name>`)
// injective over distinct variables.
inline std::string escape_name(std::string_view name) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  out.reserve(name.size());
  for (std::size_t i = 0; i < name.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(name[i]);
    bool plain = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                 (c >= '0' && c <= '9' && i > 0);
    if (plain) {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 0xF];
    }
  }
  return out;
}

inline std::string unescape_name(std::string_view token) {
  auto hexval = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
  };
  std::string out;
  for (std::size_t i = 0; i < token.size(); ++i) {
    if (token[i] == '%') {
      if (i + 2 >= token.size())
        throw std::invalid_argument("truncated escape in '" + std::string(token) + "'");
      int hi = hexval(token[i + 1]), lo = hexval(token[i + 2]);
      if (hi < 0 || lo < 0)
        throw std::invalid_argument("bad escape in '" + std::string(token) + "'");
      out += static_cast<char>(hi * 16 + lo);
      i += 2;
    } else {
      out += token[i];
    }
  }
  return out;
}

// LP/solution-file token of a variable: `<escaped-name>_<version>` for
// units, `F_<escaped-name>` for per-name auxiliaries.
inline std::string var_token(const IlpModel& m, Var v) {
  const VarInfo& i = m.info(v);
  if (i.kind == VarKind::Unit) return escape_name(i.name) + "_" + std::to_string(i.version);
  return "F_" + escape_name(i.name);
}

// CPLEX-LP-dialect text: Minimize / Subject To / Binary sections, one
// constraint per line in model order.
inline std::string emit_lp(const IlpModel& m) {
  std::string out;
  out += "Minimize\n obj:";
  if (!m.objective.terms.empty()) {
    out += " ";
    detail::append_terms(out, m.objective.terms, [&m](Var v) { return var_token(m, v); });
  }
  out += "\nSubject To\n";
  for (std::size_t ci = 0; ci < m.constraints.size(); ++ci) {
    const LinearConstraint& c = m.constraints[ci];
    out += " c" + std::to_string(ci) + ": ";
    detail::append_terms(out, c.terms, [&m](Var v) { return var_token(m, v); });
    out += " ";
    out += sense_token(c.sense);
    out += " " + std::to_string(c.rhs) + "\n";
  }
  out += "Binary\n";
  for (std::size_t v = 0; v < m.num_vars(); ++v)
    out += " " + var_token(m, static_cast<Var>(v)) + "\n";
  out += "End\n";
  return out;
}

// OPB text with positional variables x1..xN in model order; <= constraints
// are negated into >=, equalities stay equalities.
inline std::string emit_opb(const IlpModel& m) {
  std::string out;
  out += "* #variable= " + std::to_string(m.num_vars()) +
         " #constraint= " + std::to_string(m.constraints.size()) + "\n";
  auto term_text = [](std::int64_t coef, Var v) {
    std::string t = coef < 0 ? "-" : "+";
    t += std::to_string(coef < 0 ? -coef : coef);
    t += " x" + std::to_string(v + 1);
    return t;
  };
  out += "min:";
  for (const Term& t : m.objective.terms) out += " " + term_text(t.coef, t.var);
  out += " ;\n";
  for (const LinearConstraint& c : m.constraints) {
    bool negate = c.sense == Sense::Leq;
    std::string line;
    for (const Term& t : c.terms) {
      if (!line.empty()) line += " ";
      line += term_text(negate ? -t.coef : t.coef, t.var);
    }
    if (c.terms.empty()) line = "0";
    line += c.sense == Sense::Eq ? " = " : " >= ";
    line += std::to_string(negate ? -c.rhs : c.rhs);
    out += line + " ;\n";
  }
  return out;
}

// Sidecar map for OPB answers: one `x<i> <token>` line per variable.
inline std::string emit_opb_name_map(const IlpModel& m) {
  std::string out;
  for (std::size_t v = 0; v < m.num_vars(); ++v)
    out += "x" + std::to_string(v + 1) + " " + var_token(m, static_cast<Var>(v)) + "\n";
  return out;
}

}  // namespace cupl
