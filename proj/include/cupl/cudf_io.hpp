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

#include <cctype>
#include <charconv>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cupl/cudf.hpp"

// Line-oriented reader and writer for CUDF documents. A document is a
// sequence of stanzas separated by blank lines; each stanza is `key: value`
// lines. A stanza opening with `package` defines a unit, one opening with
// `request` defines the request, `preamble` stanzas are skipped, anything
// else is ignored. Unknown keys inside known stanzas are ignored too, so
// richer real-world files still parse.

namespace cupl {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

struct Document {
  Universe universe;
  Request request;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline Version parse_version(std::string_view text, int line) {
  text = trim(text);
  Version v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw ParseError(line, "expected an integer version, got '" + std::string(text) + "'");
  if (v < 1) throw ParseError(line, "versions must be positive, got " + std::to_string(v));
  return v;
}

inline void check_name(std::string_view name, int line) {
  if (name.empty()) throw ParseError(line, "empty package name");
  for (char c : name)
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == '|')
      throw ParseError(line, "malformed name '" + std::string(name) + "'");
}

// `name` or `name REL version` with REL one of = != >= <= > <.
inline Atom parse_atom(std::string_view text, int line) {
  text = trim(text);
  std::size_t op = text.find_first_of("=!<>");
  if (op == std::string_view::npos) {
    check_name(text, line);
    return {std::string(text), VersionConstraint::any()};
  }
  std::string_view rest = text.substr(op);
  Relation rel;
  std::size_t oplen = 2;
  if (rest.starts_with(">=")) rel = Relation::Geq;
  else if (rest.starts_with("<=")) rel = Relation::Leq;
  else if (rest.starts_with("!=")) rel = Relation::Neq;
  else if (rest.starts_with("=")) { rel = Relation::Eq; oplen = 1; }
  else if (rest.starts_with(">")) { rel = Relation::Gt; oplen = 1; }
  else if (rest.starts_with("<")) { rel = Relation::Lt; oplen = 1; }
  else throw ParseError(line, "unparseable relation in '" + std::string(text) + "'");
  std::string_view name = trim(text.substr(0, op));
  check_name(name, line);
  Version v = parse_version(rest.substr(oplen), line);
  return {std::string(name), {rel, v}};
}

// Comma-separated atoms; an empty value is an empty list.
inline std::vector<Atom> parse_atom_list(std::string_view value, int line) {
  std::vector<Atom> out;
  if (trim(value).empty()) return out;
  std::size_t start = 0;
  while (start <= value.size()) {
    std::size_t comma = value.find(',', start);
    std::string_view piece = value.substr(start, comma == std::string_view::npos ? comma : comma - start);
    out.push_back(parse_atom(piece, line));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Clauses separated by `,`, atoms inside a clause separated by `|`.
inline DependsFormula parse_depends(std::string_view value, int line) {
  DependsFormula f;
  if (trim(value).empty()) return f;
  std::size_t start = 0;
  while (start <= value.size()) {
    std::size_t comma = value.find(',', start);
    std::string_view clause_text =
        value.substr(start, comma == std::string_view::npos ? comma : comma - start);
    if (trim(clause_text).empty()) throw ParseError(line, "empty dependency clause");
    DependsClause clause;
    std::size_t a = 0;
    while (a <= clause_text.size()) {
      std::size_t bar = clause_text.find('|', a);
      clause.push_back(parse_atom(
          clause_text.substr(a, bar == std::string_view::npos ? bar : bar - a), line));
      if (bar == std::string_view::npos) break;
      a = bar + 1;
    }
    f.clauses.push_back(std::move(clause));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return f;
}

inline std::vector<ProvidedFeature> parse_provides(std::string_view value, int line) {
  std::vector<ProvidedFeature> out;
  for (const Atom& a : parse_atom_list(value, line)) {
    if (a.constraint.rel == Relation::Any) out.push_back({a.name, std::nullopt});
    else if (a.constraint.rel == Relation::Eq) out.push_back({a.name, a.constraint.version});
    else throw ParseError(line, "provides accepts only exact feature versions");
  }
  return out;
}

inline bool parse_bool(std::string_view value, int line) {
  value = trim(value);
  if (value == "true") return true;
  if (value == "false") return false;
  throw ParseError(line, "expected true or false, got '" + std::string(value) + "'");
}

struct StanzaLine {
  std::string key;
  std::string value;
  int line;
};

}  // namespace detail

// Parses a whole CUDF document. Unknown stanzas and unknown keys are
// skipped; structural problems (duplicate units, missing name/version,
// malformed atoms) throw ParseError with the offending line number.
inline Document parse_document(std::string_view text) {
  using namespace detail;
  Document doc;
  std::vector<StanzaLine> stanza;
  int lineno = 0;

  auto flush = [&doc](const std::vector<StanzaLine>& lines) {
    if (lines.empty()) return;
    const std::string& head = lines.front().key;
    if (head == "package") {
      PackageUnit unit;
      bool has_version = false;
      for (const StanzaLine& l : lines) {
        if (l.key == "package") {
          std::string_view name = trim(l.value);
          check_name(name, l.line);
          unit.name = std::string(name);
        } else if (l.key == "version") {
          unit.version = parse_version(l.value, l.line);
          has_version = true;
        } else if (l.key == "depends") {
          unit.depends = parse_depends(l.value, l.line);
        } else if (l.key == "conflicts") {
          unit.conflicts = parse_atom_list(l.value, l.line);
        } else if (l.key == "provides") {
          unit.provides = parse_provides(l.value, l.line);
        } else if (l.key == "installed") {
          unit.installed = parse_bool(l.value, l.line);
        }
        // other keys (description, ...) ignored
      }
      if (unit.name.empty()) throw ParseError(lines.front().line, "package stanza without a name");
      if (!has_version) throw ParseError(lines.front().line, "package stanza without a version");
      try {
        doc.universe.add_unit(std::move(unit));
      } catch (const std::invalid_argument& e) {
        throw ParseError(lines.front().line, e.what());
      }
    } else if (head == "request") {
      // the request name, if any, is ignored
      for (const StanzaLine& l : lines) {
        if (l.key == "install") {
          auto atoms = parse_atom_list(l.value, l.line);
          doc.request.install.insert(doc.request.install.end(), atoms.begin(), atoms.end());
        } else if (l.key == "remove") {
          auto atoms = parse_atom_list(l.value, l.line);
          doc.request.remove.insert(doc.request.remove.end(), atoms.begin(), atoms.end());
        } else if (l.key == "upgrade") {
          auto atoms = parse_atom_list(l.value, l.line);
          doc.request.upgrade.insert(doc.request.upgrade.end(), atoms.begin(), atoms.end());
        }
      }
    }
    // preamble and unrecognized stanzas are skipped
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? eol : eol - pos);
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (detail::trim(line).empty()) {
      flush(stanza);
      stanza.clear();
    } else if (detail::trim(line).front() != '#') {
      std::size_t colon = line.find(':');
      if (colon == std::string_view::npos)
        throw ParseError(lineno, "expected 'key: value', got '" + std::string(line) + "'");
      stanza.push_back({std::string(detail::trim(line.substr(0, colon))),
                        std::string(line.substr(colon + 1)), lineno});
    }
    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  flush(stanza);

  doc.universe.rebuild_indexes();
  return doc;
}

namespace detail {

inline std::string atom_list_text(const std::vector<Atom>& atoms) {
  std::string out;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (i) out += ", ";
    out += to_string(atoms[i]);
  }
  return out;
}

}  // namespace detail

// One stanza per installed pair, sorted by (name, version); `FAIL` when the
// caller marks the problem unsolvable.
inline std::string write_configuration(const std::optional<Configuration>& c) {
  if (!c) return "FAIL\n";
  std::string out;
  bool first = true;
  for (const UnitId& id : c->installed) {  // std::set iterates sorted
    if (!first) out += "\n";
    first = false;
    out += "package: " + id.name + "\n";
    out += "version: " + std::to_string(id.version) + "\n";
    out += "installed: true\n";
  }
  return out;
}

// Full stanzas for every unit plus the request; parsing the result yields
// the same universe and request back.
inline std::string write_document(const Universe& u, const Request& r) {
  std::string out;
  for (const PackageUnit& p : u.units()) {
    out += "package: " + p.name + "\n";
    out += "version: " + std::to_string(p.version) + "\n";
    if (!p.depends.empty()) {
      out += "depends: ";
      for (std::size_t i = 0; i < p.depends.clauses.size(); ++i) {
        if (i) out += ", ";
        for (std::size_t j = 0; j < p.depends.clauses[i].size(); ++j) {
          if (j) out += " | ";
          out += to_string(p.depends.clauses[i][j]);
        }
      }
      out += "\n";
    }
    if (!p.conflicts.empty()) out += "conflicts: " + detail::atom_list_text(p.conflicts) + "\n";
    if (!p.provides.empty()) {
      out += "provides: ";
      for (std::size_t i = 0; i < p.provides.size(); ++i) {
        if (i) out += ", ";
        out += p.provides[i].name;
        if (p.provides[i].version) out += " = " + std::to_string(*p.provides[i].version);
      }
      out += "\n";
    }
    if (p.installed) out += "installed: true\n";
    out += "\n";
  }
  out += "request: \n";
  if (!r.install.empty()) out += "install: " + detail::atom_list_text(r.install) + "\n";
  if (!r.remove.empty()) out += "remove: " + detail::atom_list_text(r.remove) + "\n";
  if (!r.upgrade.empty()) out += "upgrade: " + detail::atom_list_text(r.upgrade) + "\n";
  return out;
}

}  // namespace cupl
