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

#include <algorithm>
#include <catch2/catch_amalgamated.hpp>
#include <set>

#include "cupl/cudf_io.hpp"
#include "cupl/encoder.hpp"
#include "testutil.hpp"

using namespace cupl;

namespace {

// order-insensitive comparison against a rendered constraint
bool same_constraint(const IlpModel& m, const LinearConstraint& c,
                     const std::vector<std::pair<std::int64_t, std::string>>& terms, Sense sense,
                     std::int64_t rhs) {
  if (c.sense != sense || c.rhs != rhs || c.terms.size() != terms.size()) return false;
  std::multiset<std::pair<std::int64_t, std::string>> want(terms.begin(), terms.end()), got;
  for (const Term& t : c.terms) got.insert({t.coef, m.var_label(t.var)});
  return want == got;
}

bool model_has_constraint(const IlpModel& m,
                          const std::vector<std::pair<std::int64_t, std::string>>& terms,
                          Sense sense, std::int64_t rhs) {
  return std::any_of(m.constraints.begin(), m.constraints.end(),
                     [&](const LinearConstraint& c) { return same_constraint(m, c, terms, sense, rhs); });
}

IlpModel model_for(const Document& doc, ObjectiveMode mode = ObjectiveMode::Aggregate) {
  return build_model(doc.universe, initial_configuration(doc.universe), doc.request, {mode});
}

}  // namespace

TEST_CASE("worked dependency constraint") {
  Document doc = parse_document(cupltest::load_fixture("figure1_full.cudf"));
  IlpModel m;
  register_variables(m, doc.universe, false);
  const PackageUnit* ge1 = doc.universe.find("gasoline-engine", 1);
  REQUIRE(ge1);
  auto constraints = encode_depends(m, doc.universe, *ge1);
  REQUIRE(constraints.size() == 1);
  CHECK(same_constraint(m, constraints[0], {{-1, "gasoline-engine_1"}, {1, "turbo_1"}}, Sense::Geq, 0));
  CHECK(format_constraint(m, constraints[0]) == "- gasoline-engine_1 + turbo_1 >= 0");
}

TEST_CASE("worked conflict constraint") {
  Document doc = parse_document(cupltest::load_fixture("figure1_full.cudf"));
  IlpModel m;
  register_variables(m, doc.universe, false);
  const PackageUnit* ge1 = doc.universe.find("gasoline-engine", 1);
  auto constraints = encode_conflicts(m, doc.universe, *ge1);
  REQUIRE(constraints.size() == 1);
  CHECK(same_constraint(m, constraints[0],
                        {{3, "gasoline-engine_1"},
                         {1, "gasoline-engine_2"},
                         {1, "electric-engine_1"},
                         {1, "electric-engine_2"}},
                        Sense::Leq, 3));
}

TEST_CASE("empty depends and conflicts emit nothing") {
  Document doc = parse_document("package: a\nversion: 1\n");
  IlpModel m;
  register_variables(m, doc.universe, false);
  CHECK(encode_depends(m, doc.universe, doc.universe.units()[0]).empty());
  CHECK(encode_conflicts(m, doc.universe, doc.universe.units()[0]).empty());
}

TEST_CASE("dependency on a providerless name forces the unit out") {
  Document doc = parse_document("package: a\nversion: 1\ndepends: nowhere\n");
  IlpModel m = model_for(doc, ObjectiveMode::Criterion2);
  CHECK(model_has_constraint(m, {{-1, "a_1"}}, Sense::Geq, 0));
  // no satisfying assignment installs a_1
  for (const auto& x : cupltest::enumerate_feasible(m)) CHECK(x[0] == 0);
}

TEST_CASE("singleton clauses are batched into one inequality") {
  Document doc = parse_document(
      "package: a\nversion: 1\ndepends: b, c, d | e\n\n"
      "package: b\nversion: 1\n\npackage: c\nversion: 1\n\n"
      "package: d\nversion: 1\n\npackage: e\nversion: 1\n");
  IlpModel m;
  register_variables(m, doc.universe, false);
  auto constraints = encode_depends(m, doc.universe, doc.universe.units()[0]);
  REQUIRE(constraints.size() == 2);
  CHECK(same_constraint(m, constraints[0], {{-2, "a_1"}, {1, "b_1"}, {1, "c_1"}}, Sense::Geq, 0));
  CHECK(same_constraint(m, constraints[1], {{-1, "a_1"}, {1, "d_1"}, {1, "e_1"}}, Sense::Geq, 0));
}

TEST_CASE("duplicate units inside a clause are deduplicated") {
  Document doc = parse_document(
      "package: a\nversion: 1\ndepends: b | f\n\n"
      "package: b\nversion: 1\nprovides: f\n");
  IlpModel m;
  register_variables(m, doc.universe, false);
  auto constraints = encode_depends(m, doc.universe, doc.universe.units()[0]);
  REQUIRE(constraints.size() == 1);
  // b_1 appears once even though it matches both atoms; the clause expands
  // to a single unit and lands in the batched form
  CHECK(same_constraint(m, constraints[0], {{-1, "a_1"}, {1, "b_1"}}, Sense::Geq, 0));
}

TEST_CASE("mutual conflicts leave exactly three feasible assignments") {
  Document doc = parse_document(
      "package: a\nversion: 1\nconflicts: b\n\n"
      "package: b\nversion: 1\nconflicts: a\n");
  IlpModel m = model_for(doc, ObjectiveMode::Criterion2);
  CHECK(cupltest::enumerate_feasible(m).size() == 3);  // all but {a_1, b_1}
}

TEST_CASE("self-conflict excludes the other versions only") {
  Document doc = parse_document(
      "package: a\nversion: 1\nconflicts: a\n\n"
      "package: a\nversion: 2\nconflicts: a\n");
  IlpModel m = model_for(doc, ObjectiveMode::Criterion2);
  CHECK(model_has_constraint(m, {{1, "a_1"}, {1, "a_2"}}, Sense::Leq, 1));
  CHECK(cupltest::enumerate_feasible(m).size() == 3);
}

TEST_CASE("worked upgrade constraints") {
  std::string text;
  for (int v = 1; v <= 5; ++v) {
    text += "package: gasoline-engine\nversion: " + std::to_string(v) + "\n";
    if (v == 3) text += "installed: true\n";
    text += "\n";
  }
  text += "request: \nupgrade: gasoline-engine\n";
  Document doc = parse_document(text);
  IlpModel m;
  register_variables(m, doc.universe, false);
  RequestConstraints req =
      encode_request(m, doc.universe, initial_configuration(doc.universe), doc.request);
  CHECK_FALSE(req.infeasible);
  REQUIRE(req.constraints.size() == 2);
  CHECK(same_constraint(m, req.constraints[0],
                        {{1, "gasoline-engine_1"}, {1, "gasoline-engine_2"}}, Sense::Eq, 0));
  CHECK(same_constraint(
      m, req.constraints[1],
      {{1, "gasoline-engine_3"}, {1, "gasoline-engine_4"}, {1, "gasoline-engine_5"}}, Sense::Eq, 1));
}

TEST_CASE("upgrade with nothing installed requires exactly one version") {
  Document doc = parse_document(
      "package: q\nversion: 1\n\npackage: q\nversion: 4\n\nrequest: \nupgrade: q\n");
  IlpModel m;
  register_variables(m, doc.universe, false);
  RequestConstraints req =
      encode_request(m, doc.universe, initial_configuration(doc.universe), doc.request);
  REQUIRE(req.constraints.size() == 1);
  CHECK(same_constraint(m, req.constraints[0], {{1, "q_1"}, {1, "q_4"}}, Sense::Eq, 1));
}

TEST_CASE("request translations") {
  Document doc = parse_document(
      "package: p\nversion: 2\n\npackage: p\nversion: 3\n\n"
      "package: r\nversion: 1\nprovides: f\n\npackage: s\nversion: 1\nprovides: f\n");
  IlpModel m;
  register_variables(m, doc.universe, false);
  Configuration init = initial_configuration(doc.universe);

  SECTION("install with an exact version pins the variable") {
    Request r{{{"p", VersionConstraint::exactly(2)}}, {}, {}};
    RequestConstraints req = encode_request(m, doc.universe, init, r);
    REQUIRE(req.constraints.size() == 1);
    CHECK(same_constraint(m, req.constraints[0], {{1, "p_2"}}, Sense::Eq, 1));
  }
  SECTION("install over several candidates requires at least one") {
    Request r{{{"f", VersionConstraint::any()}}, {}, {}};
    RequestConstraints req = encode_request(m, doc.universe, init, r);
    REQUIRE(req.constraints.size() == 1);
    CHECK(same_constraint(m, req.constraints[0], {{1, "r_1"}, {1, "s_1"}}, Sense::Geq, 1));
  }
  SECTION("unsatisfiable install leaves the infeasibility marker") {
    Request r{{{"ghost", VersionConstraint::any()}}, {}, {}};
    RequestConstraints req = encode_request(m, doc.universe, init, r);
    CHECK(req.infeasible);
    REQUIRE(req.constraints.size() == 1);
    CHECK(req.constraints[0].terms.empty());
    CHECK(req.constraints[0].sense == Sense::Geq);
    CHECK(req.constraints[0].rhs == 1);
  }
  SECTION("remove zeroes the whole expansion") {
    Request r{{}, {{"p", VersionConstraint::any()}}, {}};
    RequestConstraints req = encode_request(m, doc.universe, init, r);
    REQUIRE(req.constraints.size() == 1);
    CHECK(same_constraint(m, req.constraints[0], {{1, "p_2"}, {1, "p_3"}}, Sense::Eq, 0));
  }
  SECTION("removing something absent needs no constraint") {
    Request r{{}, {{"ghost", VersionConstraint::any()}}, {}};
    RequestConstraints req = encode_request(m, doc.universe, init, r);
    CHECK(req.constraints.empty());
    CHECK_FALSE(req.infeasible);
  }
  SECTION("upgrading a name without real versions is infeasible") {
    Request r{{}, {}, {{"f", VersionConstraint::any()}}};  // f is virtual only
    RequestConstraints req = encode_request(m, doc.universe, init, r);
    CHECK(req.infeasible);
  }
  SECTION("empty request emits nothing") {
    RequestConstraints req = encode_request(m, doc.universe, init, Request{});
    CHECK(req.constraints.empty());
    CHECK_FALSE(req.infeasible);
  }
}

TEST_CASE("feature links tie the auxiliary to its versions") {
  Document doc = parse_document("package: a\nversion: 1\n\npackage: b\nversion: 1\n\npackage: b\nversion: 2\n");
  IlpModel m;
  register_variables(m, doc.universe, true);
  auto links = encode_feature_links(m, doc.universe);
  REQUIRE(links.size() == 4);  // two per name

  // single version: p and p_1 are equivalent
  CHECK(same_constraint(m, links[0], {{-1, "a"}, {1, "a_1"}}, Sense::Geq, 0));
  CHECK(same_constraint(m, links[1], {{1, "a"}, {-1, "a_1"}}, Sense::Geq, 0));
  // n'' = 2 for the two-version name
  CHECK(same_constraint(m, links[2], {{-1, "b"}, {1, "b_1"}, {1, "b_2"}}, Sense::Geq, 0));
  CHECK(same_constraint(m, links[3], {{2, "b"}, {-1, "b_1"}, {-1, "b_2"}}, Sense::Geq, 0));

  // enumerate assignments over (b_1, b_2): the links admit exactly one
  // consistent auxiliary value, the or of the versions
  IlpModel bm;
  Universe two;
  two.add_unit({"b", 1, {}, {}, {}, false});
  two.add_unit({"b", 2, {}, {}, {}, false});
  two.rebuild_indexes();
  register_variables(bm, two, true);
  for (auto& c : encode_feature_links(bm, two)) bm.constraints.push_back(c);
  int seen = 0;
  for (const auto& x : cupltest::enumerate_feasible(bm)) {
    Var aux = bm.feature_var("b");
    CHECK(x[static_cast<std::size_t>(aux)] == ((x[0] || x[1]) ? 1 : 0));
    ++seen;
  }
  CHECK(seen == 4);  // every (b_1, b_2) pair extends uniquely
}

TEST_CASE("objective modes") {
  Document doc = parse_document(
      "package: a\nversion: 1\ninstalled: true\n\npackage: a\nversion: 2\n\n"
      "package: b\nversion: 1\n\npackage: c\nversion: 1\ninstalled: true\n");
  Configuration init = initial_configuration(doc.universe);

  SECTION("criterion 1 weights installed functionalities") {
    IlpModel m;
    register_variables(m, doc.universe, true);
    Objective obj = build_objective(m, doc.universe, init, ObjectiveMode::Criterion1);
    REQUIRE(obj.terms.size() == 2);  // names a and c
    for (const Term& t : obj.terms) {
      CHECK(t.coef == -1);
      CHECK(m.info(t.var).kind == VarKind::FeatureAux);
    }
  }
  SECTION("criterion 2 rewards keeping and penalizes adding") {
    IlpModel m;
    register_variables(m, doc.universe, false);
    Objective obj = build_objective(m, doc.universe, init, ObjectiveMode::Criterion2);
    REQUIRE(obj.terms.size() == 4);
    CHECK(obj.terms[0] == Term{-1, m.unit_var("a", 1)});
    CHECK(obj.terms[1] == Term{1, m.unit_var("a", 2)});
    CHECK(obj.terms[2] == Term{1, m.unit_var("b", 1)});
    CHECK(obj.terms[3] == Term{-1, m.unit_var("c", 1)});
  }
  SECTION("aggregate weight is Card(P)+1 by default, Card(P) when asked") {
    CHECK(aggregate_weight(doc.universe, false) == 5);
    CHECK(aggregate_weight(doc.universe, true) == 4);
    IlpModel m;
    register_variables(m, doc.universe, true);
    Objective obj = build_objective(m, doc.universe, init, ObjectiveMode::Aggregate);
    std::int64_t min_coef = 0;
    for (const Term& t : obj.terms) min_coef = std::min(min_coef, t.coef);
    CHECK(min_coef == -5);
  }
  SECTION("no installed units leaves criterion 1 empty") {
    Document empty_init = parse_document("package: a\nversion: 1\n\npackage: b\nversion: 1\n");
    IlpModel m;
    register_variables(m, empty_init.universe, true);
    Configuration none = initial_configuration(empty_init.universe);
    CHECK(build_objective(m, empty_init.universe, none, ObjectiveMode::Criterion1).terms.empty());
    Objective c2 = build_objective(m, empty_init.universe, none, ObjectiveMode::Criterion2);
    for (const Term& t : c2.terms) CHECK(t.coef == 1);
  }
}

TEST_CASE("aggregate optimum reaches the criterion-1 optimum") {
  // brute-force both optima over every assignment of a 10-unit instance
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    cupltest::RandomInstance inst = cupltest::random_instance(seed);
    IlpModel agg = build_model(inst.universe, inst.init, inst.request, {ObjectiveMode::Aggregate});
    auto feasible = cupltest::enumerate_feasible(agg);
    if (feasible.empty()) continue;
    Objective c1 = build_objective(agg, inst.universe, inst.init, ObjectiveMode::Criterion1);
    std::int64_t best_agg = std::numeric_limits<std::int64_t>::max();
    std::int64_t best_c1_at_agg = 0, best_c1 = std::numeric_limits<std::int64_t>::max();
    for (const auto& x : feasible) {
      std::int64_t va = objective_value(agg, x), v1 = eval_terms(c1.terms, x);
      if (va < best_agg) {
        best_agg = va;
        best_c1_at_agg = v1;
      }
      best_c1 = std::min(best_c1, v1);
    }
    CHECK(best_c1_at_agg == best_c1);
  }
}

TEST_CASE("model shape and determinism") {
  Document doc = parse_document(cupltest::load_fixture("figure1_full.cudf"));
  Configuration init = initial_configuration(doc.universe);
  IlpModel m = build_model(doc.universe, init, doc.request, {});

  // one variable per unit plus one auxiliary per name in aggregate mode
  CHECK(m.num_vars() == doc.universe.size() + doc.universe.by_name().size());

  // every constraint references declared variables, without duplicates or
  // zero coefficients
  for (const LinearConstraint& c : m.constraints) {
    std::set<Var> seen;
    for (const Term& t : c.terms) {
      CHECK(t.coef != 0);
      CHECK(t.var >= 0);
      CHECK(static_cast<std::size_t>(t.var) < m.num_vars());
      CHECK(seen.insert(t.var).second);
    }
  }

  IlpModel again = build_model(doc.universe, init, doc.request, {});
  CHECK(m.constraints == again.constraints);
  CHECK(m.objective == again.objective);

  // both worked constraints are present in the full model
  CHECK(model_has_constraint(m, {{-1, "gasoline-engine_1"}, {1, "turbo_1"}}, Sense::Geq, 0));
  CHECK(model_has_constraint(m,
                             {{3, "gasoline-engine_1"},
                              {1, "gasoline-engine_2"},
                              {1, "electric-engine_1"},
                              {1, "electric-engine_2"}},
                             Sense::Leq, 3));
}

TEST_CASE("empty universe and request give an empty model") {
  Document doc = parse_document("");
  IlpModel m = build_model(doc.universe, initial_configuration(doc.universe), doc.request, {});
  CHECK(m.num_vars() == 0);
  CHECK(m.constraints.empty());
  CHECK(m.objective.terms.empty());
  CHECK_FALSE(m.infeasible_request);
}

TEST_CASE("encoder soundness and completeness against the validator") {
  // configurations are feasible in the model exactly when the validator
  // accepts them; feasible assignments decode to validator-clean
  // configurations
  int checked = 0;
  for (std::uint64_t seed = 100; seed < 160; ++seed) {
    cupltest::RandomInstance inst = cupltest::random_instance(seed);
    IlpModel m = build_model(inst.universe, inst.init, inst.request, {});
    cupltest::for_each_configuration(inst.universe, [&](const Configuration& c) {
      bool valid = cupltest::validator_clean(inst.universe, inst.init, inst.request, c);
      bool feasible = satisfies_all(m, cupltest::induced_assignment(m, c)) && !m.infeasible_request;
      CHECK(valid == feasible);
      ++checked;
    });
    for (const auto& x : cupltest::enumerate_feasible(m)) {
      if (m.infeasible_request) break;
      CHECK(cupltest::validator_clean(inst.universe, inst.init, inst.request, m.decode(x)));
    }
  }
  CHECK(checked > 1000);
}
