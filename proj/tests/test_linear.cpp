#include "doctest.h"
#include "fixtures.hpp"
#include "rail/linear.hpp"

using namespace rail;

namespace {

LinearModel demo_model(const DispatchInstance& inst, const Routing& routing) {
  return build_linear_model(inst, routing, derive_conflict_sets(inst, routing));
}

bool has_row(const LinearModel& m, const EventKey& lhs, const EventKey& rhs, GridTime c,
             int active_when = -2) {
  for (const auto& row : m.rows) {
    if (m.time_vars[row.lhs].train != lhs.first || m.time_vars[row.lhs].station != lhs.second)
      continue;
    if (m.time_vars[row.rhs].train != rhs.first || m.time_vars[row.rhs].station != rhs.second)
      continue;
    if (row.c != c) continue;
    if (active_when == -2 || (row.y >= 0 && row.active_when == active_when) ||
        (active_when == -1 && row.y < 0))
      return true;
  }
  return false;
}

}  // namespace

TEST_CASE("demo span and stay rows") {
  auto inst = rail::testing::demo_instance();
  auto m = demo_model(inst, inst.default_routing);
  // span: t2 >= t1 + 2 when j1 first, t1 >= t2 + 6 otherwise
  CHECK(has_row(m, {"j2", "s1"}, {"j1", "s1"}, 2, 1));
  CHECK(has_row(m, {"j1", "s1"}, {"j2", "s1"}, 6, 0));
  // stay: t1* >= t1 + 5 and t2* >= t2 + 9
  CHECK(has_row(m, {"j1", "s2"}, {"j1", "s1"}, 5, -1));
  CHECK(has_row(m, {"j2", "s2"}, {"j2", "s1"}, 9, -1));
  // track occupation arrival rows: prior departure vs leaver, res - pass
  CHECK(has_row(m, {"j2", "s1"}, {"j1", "s2"}, 1 - 8, 1));
  CHECK(has_row(m, {"j1", "s1"}, {"j2", "s2"}, 1 - 4, 0));
}

TEST_CASE("single train yields no precedence variables") {
  auto inst = rail::testing::demo_instance();
  inst.trains.resize(1);
  Routing r;
  r.line_track[{"j1", "s1", "s2"}] = "track1";
  r.station_track[{"j1", "s1"}] = "track1";
  r.station_track[{"j1", "s2"}] = "track1";
  r.station_path[{"j1", "s1"}] = {"g1a"};
  r.station_path[{"j1", "s2"}] = {"g2a"};
  auto m = demo_model(inst, r);
  auto counts = count_variables(m);
  CHECK(counts.num_time == 2);
  CHECK(counts.num_precedence == 0);
  for (const auto& row : m.rows) CHECK(row.y < 0);
}

TEST_CASE("demo variable counts") {
  auto inst = rail::testing::demo_instance();
  auto counts = count_variables(demo_model(inst, inst.default_routing));
  CHECK(counts.num_time == 5);
  CHECK(counts.num_precedence_stored == 2);
  CHECK(counts.num_precedence == 1);  // span and platform orders coincide
}

TEST_CASE("two trains fully sharing three stations store three order variables") {
  auto inst = rail::testing::full_shared_instance(2, 3);
  REQUIRE(validate_instance(inst, inst.default_routing).empty());
  auto m = demo_model(inst, inst.default_routing);
  auto counts = count_variables(m);
  CHECK(counts.num_time == 6);
  CHECK(counts.num_precedence_stored == 3);  // one per shared station
  CHECK(counts.num_precedence == 1);         // chained order equalities
}

TEST_CASE("demo default optimum lets the fast train go first") {
  auto inst = rail::testing::demo_instance();
  SolveStats stats;
  auto s = solve_order_enumeration(demo_model(inst, inst.default_routing), {}, &stats);
  REQUIRE(s.feasible);
  CHECK(s.objective == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s.departure.at({"j1", "s1"}) == 4);
  CHECK(s.departure.at({"j2", "s1"}) == 6);
  CHECK(s.departure.at({"j3", "s2"}) == 8);
  CHECK(s.departure.at({"j1", "s2"}) == 9);
  CHECK(stats.assignments_tried == 2);  // one free order variable
  CHECK(stats.max_propagation_rounds <= static_cast<int>(5) + 1);
}

TEST_CASE("demo rerouted optimum") {
  auto inst = rail::testing::demo_instance();
  auto s = solve_order_enumeration(demo_model(inst, rail::testing::demo_rerouted(inst)));
  REQUIRE(s.feasible);
  CHECK(s.objective == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(s.departure.at({"j1", "s1"}) == 4);
  CHECK(s.departure.at({"j2", "s1"}) == 2);
  CHECK(s.departure.at({"j3", "s2"}) == 10);
  CHECK(s.departure.at({"j1", "s2"}) == 9);
}

TEST_CASE("forcing the opposing train first exceeds d_max") {
  auto inst = rail::testing::demo_instance();
  auto m = demo_model(inst, rail::testing::demo_rerouted(inst));
  SolveOptions opts;
  opts.forced[{YKey::Kind::LineEntry, "j2", "j3", "s1", "s2"}] = 0;  // j3 enters first
  auto s = solve_order_enumeration(m, opts);
  CHECK(!s.feasible);
  bool names_j2 = false;
  for (const auto& v : s.violations)
    if (v.family == "window" && v.a == "j2" && v.detail.find("exceeds d_max") != std::string::npos)
      names_j2 = true;
  CHECK(names_j2);
}

TEST_CASE("enumeration cap refusal points to annealing") {
  auto inst = rail::testing::demo_instance();
  auto m = demo_model(inst, inst.default_routing);
  SolveOptions opts;
  opts.precedence_cap = 0;
  CHECK_THROWS_WITH_AS(solve_order_enumeration(m, opts), doctest::Contains("annealing"),
                       RailError);
}

TEST_CASE("objective evaluation on known delay patterns") {
  auto inst = rail::testing::demo_instance();
  Schedule s;
  s.departure = {{{"j1", "s1"}, 4}, {{"j1", "s2"}, 9}, {{"j2", "s1"}, 2},
                 {{"j2", "s2"}, 11}, {{"j3", "s2"}, 10}};
  CHECK(evaluate_objective(s, inst) == doctest::Approx(0.3).epsilon(1e-12));

  Schedule punctual;
  punctual.departure = {{{"j1", "s1"}, 4}, {{"j1", "s2"}, 9}, {{"j2", "s1"}, 1},
                        {{"j2", "s2"}, 10}, {{"j3", "s2"}, 8}};
  CHECK(evaluate_objective(punctual, inst) == doctest::Approx(0.0));

  Schedule j1_late;
  j1_late.departure = {{{"j1", "s1"}, 7}, {{"j1", "s2"}, 12}, {{"j2", "s1"}, 1},
                       {{"j2", "s2"}, 10}, {{"j3", "s2"}, 8}};
  CHECK(evaluate_objective(j1_late, inst) == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("objective evaluation rejects departures outside the window") {
  auto inst = rail::testing::demo_instance();
  Schedule s;
  s.departure = {{{"j1", "s1"}, 20}, {{"j1", "s2"}, 25}, {{"j2", "s1"}, 1},
                 {{"j2", "s2"}, 10}, {{"j3", "s2"}, 8}};
  CHECK_THROWS_WITH_AS(evaluate_objective(s, inst), doctest::Contains("j1"), RailError);
}

TEST_CASE("feasibility check on the rerouted optimum is clean") {
  auto inst = rail::testing::demo_instance();
  auto m = demo_model(inst, rail::testing::demo_rerouted(inst));
  auto s = solve_order_enumeration(m);
  CHECK(check_feasibility(s, m).empty());
}

TEST_CASE("simultaneous line departures violate the span in both orders") {
  auto inst = rail::testing::demo_instance();
  auto m = demo_model(inst, inst.default_routing);
  Schedule s;
  s.departure = {{{"j1", "s1"}, 4}, {{"j2", "s1"}, 4}, {{"j1", "s2"}, 9},
                 {{"j2", "s2"}, 13}, {{"j3", "s2"}, 8}};
  auto violations = check_feasibility(s, m);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].family == "span");
  CHECK(violations[0].a == "j1");
  CHECK(violations[0].b == "j2");
}

TEST_CASE("too short a stay is reported for the slow train") {
  auto inst = rail::testing::demo_instance();
  auto m = demo_model(inst, inst.default_routing);
  Schedule s;
  s.departure = {{{"j1", "s1"}, 4}, {{"j2", "s1"}, 6}, {{"j1", "s2"}, 9},
                 {{"j2", "s2"}, 10}, {{"j3", "s2"}, 8}};
  auto violations = check_feasibility(s, m);
  bool stay_j2 = false;
  for (const auto& v : violations)
    if (v.family == "stay" && v.a == "j2") stay_j2 = true;
  CHECK(stay_j2);
}

TEST_CASE("deactivated big-M rows never bind anywhere on the time box") {
  auto inst = rail::testing::demo_instance();
  for (const auto* routing :
       {&inst.default_routing}) {
    auto m = demo_model(inst, *routing);
    for (const auto& row : m.rows) {
      if (row.y < 0) continue;
      // worst corner: lhs at its lower bound, rhs at its upper bound
      double slack = m.time_vars[row.lhs].lb + m.mu -
                     (m.time_vars[row.rhs].ub + static_cast<double>(row.c));
      CHECK(slack > 0);
    }
  }
}

TEST_CASE("optimum is invariant under positive weight rescaling") {
  auto inst = rail::testing::demo_instance();
  auto base = solve_order_enumeration(demo_model(inst, inst.default_routing));
  auto scaled_inst = inst;
  for (auto& t : scaled_inst.trains) t.weight *= 3.7;
  auto scaled = solve_order_enumeration(demo_model(scaled_inst, scaled_inst.default_routing));
  REQUIRE(scaled.feasible);
  CHECK(base.departure == scaled.departure);
  CHECK(scaled.objective == doctest::Approx(base.objective * 3.7));
}

TEST_CASE("lp export names the variables") {
  auto inst = rail::testing::demo_instance();
  auto lp = export_lp(demo_model(inst, inst.default_routing));
  CHECK(lp.find("t_j1_s1") != std::string::npos);
  CHECK(lp.find("t_j2_s2") != std::string::npos);
  CHECK(lp.find("y_") != std::string::npos);
  CHECK(lp.find("Binaries") != std::string::npos);
  CHECK(lp.find("Bounds") != std::string::npos);
}
