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

#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cupl/bench.hpp"
#include "cupl/cudf_io.hpp"
#include "cupl/emit.hpp"
#include "cupl/encoder.hpp"
#include "cupl/external.hpp"
#include "cupl/solver.hpp"
#include "cupl/validator.hpp"

// Command-line front end: solve / encode / validate / gen / bench.
//
// Exit codes of `solve`: 0 optimal, 10 infeasible, 20 timeout, 1 error.

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 10;
constexpr int kExitTimeout = 20;

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream buf;
    buf << std::cin.rdbuf();
    return buf.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
}

cupl::Document parse_file(const std::string& path) {
  try {
    return cupl::parse_document(read_input(path));
  } catch (const cupl::ParseError& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

cupl::ObjectiveMode parse_mode(const std::string& name) {
  if (name == "aggregate") return cupl::ObjectiveMode::Aggregate;
  if (name == "c1") return cupl::ObjectiveMode::Criterion1;
  if (name == "c2") return cupl::ObjectiveMode::Criterion2;
  throw std::runtime_error("unknown criteria mode '" + name + "'");
}

// `external:<dialect>:<command>` with dialect `lp` or `opb`; the command
// template must contain {file} and may contain {timeout}.
std::optional<cupl::ExternalSolverSpec> parse_solver_spec(const std::string& spec) {
  if (spec == "builtin") return std::nullopt;
  const std::string prefix = "external:";
  if (!spec.starts_with(prefix))
    throw std::runtime_error("solver must be 'builtin' or 'external:<lp|opb>:<command>'");
  std::string rest = spec.substr(prefix.size());
  std::size_t colon = rest.find(':');
  if (colon == std::string::npos)
    throw std::runtime_error("external solver needs a dialect: external:<lp|opb>:<command>");
  std::string dialect = rest.substr(0, colon);
  cupl::ExternalSolverSpec out;
  out.command = rest.substr(colon + 1);
  if (dialect == "lp") out.dialect = cupl::AnswerDialect::LpSolution;
  else if (dialect == "opb") out.dialect = cupl::AnswerDialect::OpbSolution;
  else throw std::runtime_error("unknown answer dialect '" + dialect + "'");
  return out;
}

// (criterion-1, criterion-2) evaluators over a model that has feature vars.
std::pair<std::int64_t, std::int64_t> criteria_of(const cupl::IlpModel& model,
                                                  const cupl::Universe& u,
                                                  const cupl::Configuration& init,
                                                  std::span<const std::uint8_t> values) {
  cupl::Objective c1 = cupl::build_objective(model, u, init, cupl::ObjectiveMode::Criterion1);
  cupl::Objective c2 = cupl::build_objective(model, u, init, cupl::ObjectiveMode::Criterion2);
  return {cupl::eval_terms(c1.terms, values), cupl::eval_terms(c2.terms, values)};
}

int cmd_solve(const std::string& file, const std::string& criteria, bool paper_exact,
              const std::string& solver_spec, double timeout) {
  cupl::Document doc = parse_file(file);
  cupl::Configuration init = cupl::initial_configuration(doc.universe);

  cupl::SolveOutcome outcome;
  std::optional<std::pair<std::int64_t, std::int64_t>> criteria_pair;
  cupl::IlpModel model;

  if (criteria == "lex") {
    if (solver_spec != "builtin")
      throw std::runtime_error("--criteria lex runs the built-in solver only");
    cupl::LexicographicOutcome lex =
        cupl::lexicographic_solve(doc.universe, init, doc.request, timeout);
    outcome = std::move(lex.outcome);
    criteria_pair = lex.criteria;
  } else {
    cupl::EncodeOptions options{parse_mode(criteria), paper_exact};
    model = cupl::build_model(doc.universe, init, doc.request, options);
    if (model.infeasible_request) {
      std::cout << cupl::write_configuration(std::nullopt);
      std::cerr << "request is unsatisfiable at encoding time\n";
      return kExitInfeasible;
    }
    if (auto external = parse_solver_spec(solver_spec)) outcome = run_external(*external, model, timeout);
    else outcome = cupl::solve(model, timeout);
    if (outcome.best && options.mode == cupl::ObjectiveMode::Aggregate)
      criteria_pair = criteria_of(model, doc.universe, init, outcome.best->values);
  }

  if (outcome.status == cupl::SolveStatus::Infeasible) {
    std::cout << cupl::write_configuration(std::nullopt);
    return kExitInfeasible;
  }
  if (!outcome.best) {  // timed out with no incumbent
    std::cerr << "timed out with no solution\n";
    return kExitTimeout;
  }

  // never print an answer this binary cannot certify itself
  cupl::Configuration final_config;
  if (criteria == "lex") {
    // decode against the stage model: unit variables are registered first
    // and identically in every mode, so the universe order suffices
    const auto& units = doc.universe.units();
    for (std::size_t i = 0; i < units.size(); ++i)
      if (outcome.best->values[i]) final_config.installed.insert({units[i].name, units[i].version});
  } else {
    final_config = model.decode(outcome.best->values);
  }
  cupl::CheckResult consistency = cupl::check_consistency(doc.universe, final_config);
  cupl::CheckResult request_check =
      cupl::check_request(doc.universe, init, doc.request, final_config);
  if (!consistency.ok() || !request_check.ok()) {
    std::cerr << "internal consistency error: solver answer fails validation\n";
    for (const auto& v : consistency.violations) std::cerr << "  " << v.to_string() << "\n";
    for (const auto& v : request_check.violations) std::cerr << "  " << v.to_string() << "\n";
    return kExitError;
  }

  std::cout << cupl::write_configuration(final_config);
  std::cerr << "objective: " << outcome.best->objective << "\n";
  if (criteria_pair)
    std::cerr << "criteria: (" << criteria_pair->first << ", " << criteria_pair->second << ")\n";
  std::cerr << "nodes: " << outcome.stats.nodes << ", propagations: " << outcome.stats.propagations
            << ", time: " << outcome.stats.elapsed_seconds << "s\n";
  if (outcome.status == cupl::SolveStatus::TimedOut) {
    std::cerr << "timed out; best incumbent printed\n";
    return kExitTimeout;
  }
  return kExitOk;
}

int cmd_encode(const std::string& file, const std::string& format, const std::string& criteria,
               bool paper_exact, const std::string& name_map_path) {
  cupl::Document doc = parse_file(file);
  cupl::Configuration init = cupl::initial_configuration(doc.universe);
  cupl::EncodeOptions options{parse_mode(criteria == "lex" ? "aggregate" : criteria), paper_exact};
  cupl::IlpModel model = cupl::build_model(doc.universe, init, doc.request, options);
  if (format == "lp") {
    std::cout << cupl::emit_lp(model);
  } else if (format == "opb") {
    std::cout << cupl::emit_opb(model);
  } else {
    throw std::runtime_error("unknown format '" + format + "'");
  }
  if (!name_map_path.empty()) write_output(name_map_path, cupl::emit_opb_name_map(model));
  return kExitOk;
}

int cmd_validate(const std::string& file, const std::string& solution_path, double timeout) {
  cupl::Document doc = parse_file(file);
  cupl::Configuration init = cupl::initial_configuration(doc.universe);

  std::string solution_text = read_input(solution_path);
  std::string_view trimmed = cupl::detail::trim(solution_text);
  if (trimmed == "FAIL") {
    // declared unsolvable; accept only if the model really is infeasible
    cupl::IlpModel model = cupl::build_model(doc.universe, init, doc.request, {});
    cupl::SolveOutcome outcome = cupl::solve(model, timeout);
    if (outcome.status == cupl::SolveStatus::Infeasible) {
      std::cout << "declared unsolvable: confirmed infeasible\n";
      return kExitOk;
    }
    std::cout << "declared unsolvable, but the problem is "
              << (outcome.status == cupl::SolveStatus::Optimal ? "solvable" : "undecided within the timeout")
              << "\n";
    return kExitError;
  }

  cupl::Document solution = [&] {
    try {
      return cupl::parse_document(solution_text);
    } catch (const cupl::ParseError& e) {
      throw std::runtime_error(solution_path + ": " + e.what());
    }
  }();
  cupl::Configuration final_config = cupl::initial_configuration(solution.universe);

  cupl::CheckResult consistency = cupl::check_consistency(doc.universe, final_config);
  cupl::CheckResult request_check =
      cupl::check_request(doc.universe, init, doc.request, final_config);
  cupl::ConfigDiff diff = cupl::diff_configurations(init, final_config, doc.universe);

  for (const auto& v : consistency.violations) std::cout << "violation: " << v.to_string() << "\n";
  for (const auto& v : request_check.violations) std::cout << "violation: " << v.to_string() << "\n";
  std::cout << "removed functionalities: " << diff.removed_functionalities << "\n";
  std::cout << "changed units: " << diff.changed_units << "\n";
  bool clean = consistency.ok() && request_check.ok();
  std::cout << (clean ? "ok" : "invalid") << "\n";
  return clean ? kExitOk : kExitError;
}

int cmd_gen(const std::string& file, std::size_t n_install, std::size_t n_upgrade,
            std::uint64_t seed, const std::string& out_path) {
  cupl::Document doc = parse_file(file);
  cupl::Configuration init = cupl::initial_configuration(doc.universe);
  cupl::Request request = cupl::gen_random(doc.universe, init, n_install, n_upgrade, seed);
  write_output(out_path, cupl::write_document(doc.universe, request));
  return kExitOk;
}

int cmd_bench(const std::vector<std::string>& files, const std::vector<std::string>& solver_specs,
              const std::string& criteria, double timeout, int jobs, const std::string& records_path,
              const std::string& label) {
  std::vector<cupl::BenchInstance> instances;
  for (const std::string& file : files) {
    cupl::Document doc = parse_file(file);
    cupl::Configuration init = cupl::initial_configuration(doc.universe);
    cupl::EncodeOptions options{parse_mode(criteria), false};
    cupl::BenchInstance inst;
    inst.id = file;
    inst.model = cupl::build_model(doc.universe, init, doc.request, options);
    if (options.mode == cupl::ObjectiveMode::Aggregate) {
      cupl::Objective c1 =
          cupl::build_objective(inst.model, doc.universe, init, cupl::ObjectiveMode::Criterion1);
      cupl::Objective c2 =
          cupl::build_objective(inst.model, doc.universe, init, cupl::ObjectiveMode::Criterion2);
      inst.criteria = [c1, c2](std::span<const std::uint8_t> v) {
        return std::pair{cupl::eval_terms(c1.terms, v), cupl::eval_terms(c2.terms, v)};
      };
    }
    instances.push_back(std::move(inst));
  }

  std::vector<cupl::BenchSolver> solvers;
  std::vector<std::string> specs = solver_specs.empty() ? std::vector<std::string>{"builtin"}
                                                        : solver_specs;
  for (const std::string& spec : specs) {
    if (auto external = parse_solver_spec(spec)) {
      cupl::ExternalSolverSpec ext = *external;
      solvers.push_back({spec, [ext](const cupl::IlpModel& m, double t) {
                           return cupl::run_external(ext, m, t);
                         }});
    } else {
      solvers.push_back(
          {"builtin", [](const cupl::IlpModel& m, double t) { return cupl::solve(m, t); }});
    }
  }

  cupl::BenchResult result = cupl::run_bench(instances, solvers, timeout, jobs);
  if (!records_path.empty()) write_output(records_path, cupl::format_records(result.records));
  std::cout << cupl::format_stats_table(
      label + " (" + std::to_string(instances.size()) + " problems)", result.stats);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CUDF package-upgradeability toolkit: compiles upgrade problems to 0-1 integer "
               "linear programs, solves them, and checks the answers"};
  app.require_subcommand(1);

  std::string file, solution, criteria = "aggregate", solver_spec = "builtin";
  std::string format = "lp", name_map, out_path, records_path, label = "bench";
  std::vector<std::string> files, solver_specs;
  bool paper_exact = false;
  double timeout = 300.0;
  std::size_t n_install = 0, n_upgrade = 0;
  std::uint64_t seed = 0;
  int jobs = 1;

  CLI::App* solve = app.add_subcommand("solve", "solve a CUDF problem and print the configuration");
  solve->add_option("file", file, "CUDF file ('-' for stdin)")->required();
  solve->add_option("--criteria", criteria, "aggregate | lex | c1 | c2")
      ->check(CLI::IsMember({"aggregate", "lex", "c1", "c2"}));
  solve->add_flag("--paper-exact-weight", paper_exact,
                  "aggregate criterion-1 weight Card(P) instead of Card(P)+1");
  solve->add_option("--solver", solver_spec, "builtin | external:<lp|opb>:<command with {file}>");
  solve->add_option("--timeout", timeout, "time limit in seconds")->check(CLI::PositiveNumber);

  CLI::App* encode = app.add_subcommand("encode", "emit the ILP in an interchange format");
  encode->add_option("file", file, "CUDF file ('-' for stdin)")->required();
  encode->add_option("--format", format, "lp | opb")->check(CLI::IsMember({"lp", "opb"}));
  encode->add_option("--criteria", criteria, "aggregate | c1 | c2")
      ->check(CLI::IsMember({"aggregate", "c1", "c2"}));
  encode->add_flag("--paper-exact-weight", paper_exact, "use the Card(P) aggregate weight");
  encode->add_option("--name-map", name_map, "write the x<i> name map to this file");

  CLI::App* validate = app.add_subcommand("validate", "check a configuration against a problem");
  validate->add_option("file", file, "CUDF file")->required();
  validate->add_option("solution", solution, "configuration file, or FAIL")->required();
  validate->add_option("--timeout", timeout, "time limit for confirming FAIL answers")
      ->check(CLI::PositiveNumber);

  CLI::App* gen = app.add_subcommand("gen", "generate a random request over a base universe");
  gen->add_option("file", file, "base CUDF file")->required();
  gen->add_option("--install", n_install, "number of uninstalled names to install");
  gen->add_option("--upgrade", n_upgrade, "number of installed names to upgrade");
  gen->add_option("--seed", seed, "RNG seed");
  gen->add_option("-o,--output", out_path, "output file (default stdout)");

  CLI::App* bench = app.add_subcommand("bench", "run solvers over instances and tabulate times");
  bench->add_option("files", files, "instance CUDF files")->required();
  bench->add_option("--solver", solver_specs, "solver specs (repeatable)");
  bench->add_option("--criteria", criteria, "aggregate | c1 | c2")
      ->check(CLI::IsMember({"aggregate", "c1", "c2"}));
  bench->add_option("--timeout", timeout, "per-run time limit in seconds")->check(CLI::PositiveNumber);
  bench->add_option("--jobs", jobs, "concurrent solves")->check(CLI::PositiveNumber);
  bench->add_option("--records", records_path, "write the run record stream to this file");
  bench->add_option("--label", label, "table caption");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(file, criteria, paper_exact, solver_spec, timeout);
    if (encode->parsed()) return cmd_encode(file, format, criteria, paper_exact, name_map);
    if (validate->parsed()) return cmd_validate(file, solution, timeout);
    if (gen->parsed()) return cmd_gen(file, n_install, n_upgrade, seed, out_path);
    if (bench->parsed())
      return cmd_bench(files, solver_specs, criteria, timeout, jobs, records_path, label);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
