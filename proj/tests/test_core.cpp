#include "doctest.h"
#include "fixtures.hpp"
#include "rail/core.hpp"

using namespace rail;

TEST_CASE("demo instance validates cleanly") {
  auto inst = testing::demo_instance();
  CHECK(validate_instance(inst, inst.default_routing).empty());
  CHECK(validate_instance(inst, testing::demo_rerouted(inst)).empty());
}

TEST_CASE("missing pass entry is reported") {
  auto inst = testing::demo_instance();
  inst.timing.pass.erase({"j1", "s1", "s2"});
  auto diags = validate_instance(inst, inst.default_routing);
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].code == "missing-parameter");
  CHECK(diags[0].message.find("j1") != std::string::npos);
}

TEST_CASE("one-way track against travel direction is reported") {
  auto inst = testing::demo_instance();
  // track2 becomes one-way s1->s2; j3 travels s2->s1 on it
  inst.segments[0].tracks[1].mode = TrackMode::OneWay;
  auto diags = validate_instance(inst, inst.default_routing);
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].code == "direction-violation");
  CHECK(diags[0].message.find("j3") != std::string::npos);
}

TEST_CASE("unknown routing resources are reported") {
  auto inst = testing::demo_instance();
  inst.default_routing.station_track[{"j1", "s2"}] = "track9";
  auto diags = validate_instance(inst, inst.default_routing);
  CHECK(!diags.empty());
  CHECK(diags[0].code == "unknown-resource");
}

TEST_CASE("conflict sets under the default routing") {
  auto inst = testing::demo_instance();
  auto sets = derive_conflict_sets(inst, inst.default_routing);

  SegKey line{"s1", "s2", "track1"};
  REQUIRE(sets.same_direction.count(line) == 1);
  CHECK(sets.same_direction.at(line) ==
        std::set<std::pair<std::string, std::string>>{{"j1", "j2"}});
  CHECK(sets.single_track_opposite.empty());

  REQUIRE(sets.shared_station_track.size() == 1);
  CHECK(sets.shared_station_track.at({"s2", "track1"}) == std::set<std::string>{"j1", "j2"});

  // j1/j2 share switch g2a but already share the station track, so the pair
  // never appears as a switch conflict
  CHECK(sets.shared_switch.empty());
  CHECK(sets.switch_pairs("s2").empty());
}

TEST_CASE("conflict sets under the rerouted routing") {
  auto inst = testing::demo_instance();
  auto sets = derive_conflict_sets(inst, testing::demo_rerouted(inst));

  CHECK(sets.same_direction.empty());
  SegKey line{"s1", "s2", "track2"};
  REQUIRE(sets.single_track_opposite.count(line) == 1);
  CHECK(sets.single_track_opposite.at(line) ==
        std::set<std::pair<std::string, std::string>>{{"j2", "j3"}});
  CHECK(sets.shared_station_track.at({"s2", "track1"}) == std::set<std::string>{"j1", "j2"});
}

TEST_CASE("single train has no pair conflicts") {
  auto inst = testing::demo_instance();
  inst.trains.resize(1);
  Routing r;
  r.line_track[{"j1", "s1", "s2"}] = "track1";
  r.station_track[{"j1", "s1"}] = "track1";
  r.station_track[{"j1", "s2"}] = "track1";
  r.station_path[{"j1", "s1"}] = {"g1a"};
  r.station_path[{"j1", "s2"}] = {"g2a"};
  auto sets = derive_conflict_sets(inst, r);
  CHECK(sets.same_direction.empty());
  CHECK(sets.single_track_opposite.empty());
  CHECK(sets.shared_station_track.empty());
  CHECK(sets.shared_switch.empty());
  CHECK(enumerate_conflicts(inst, sets).empty());
}

TEST_CASE("conflict derivation is routing-local") {
  auto inst = testing::demo_instance();
  auto base = derive_conflict_sets(inst, inst.default_routing);
  Routing moved = inst.default_routing;
  moved.station_track[{"j2", "s2"}] = "track2";
  moved.station_path[{"j2", "s2"}] = {"g2b"};
  auto after = derive_conflict_sets(inst, moved);

  // line conflicts unchanged
  CHECK(base.same_direction == after.same_direction);
  CHECK(base.single_track_opposite == after.single_track_opposite);
  // the only differences touch s2 or pairs involving j2
  for (const auto& [key, trains] : after.shared_station_track)
    if (base.shared_station_track.count(key) == 0) {
      CHECK(key.first == "s2");
      CHECK(trains.count("j2") == 1);
    }
}

TEST_CASE("unavoidable delays of the demo") {
  auto inst = testing::demo_instance();
  auto t_u = propagate_unavoidable_delays(inst, inst.default_routing);
  CHECK(t_u.at({"j1", "s1"}) == 4);
  CHECK(t_u.at({"j2", "s1"}) == 1);
  CHECK(t_u.at({"j3", "s2"}) == 8);
  CHECK(t_u.at({"j1", "s2"}) == 9);   // 4 + pass 4 + stop 1
  CHECK(t_u.at({"j2", "s2"}) == 10);  // 1 + pass 8 + stop 1
  CHECK(t_u.count({"j3", "s1"}) == 0);  // terminates without departing
}

TEST_CASE("zero delay and zero timings give scheduled departures") {
  auto inst = testing::demo_instance();
  inst.scenario.primary_delay.clear();
  for (auto& [k, v] : inst.timing.pass) v = 0;
  for (auto& [k, v] : inst.timing.stop) v = 0;
  auto t_u = propagate_unavoidable_delays(inst, inst.default_routing);
  for (const auto& train : inst.trains)
    for (const auto& [s, sched] : train.scheduled_departure)
      CHECK(t_u.at({train.id, s}) == sched);
}

TEST_CASE("propagation throws a structured error on a missing pass time") {
  auto inst = testing::demo_instance();
  inst.timing.pass.erase({"j2", "s1", "s2"});
  CHECK_THROWS_AS(propagate_unavoidable_delays(inst, inst.default_routing), RailError);
}

TEST_CASE("departure windows match the demo time sets") {
  auto inst = testing::demo_instance();
  auto w = departure_windows(inst, inst.default_routing);
  CHECK(w.at({"j1", "s1"}).lb == 4);
  CHECK(w.at({"j1", "s1"}).ub == 14);
  CHECK(w.at({"j2", "s1"}).lb == 1);
  CHECK(w.at({"j2", "s1"}).ub == 11);
  CHECK(w.at({"j3", "s2"}).lb == 8);
  CHECK(w.at({"j3", "s2"}).ub == 18);
  for (const auto& [key, win] : w) CHECK(win.size() == 11);  // d_max * r + 1
}

TEST_CASE("window size degenerates to a single point at d_max zero") {
  auto inst = testing::demo_instance();
  for (auto& [k, v] : inst.scenario.d_max) v = 0;
  auto w = departure_windows(inst, inst.default_routing);
  for (const auto& [key, win] : w) CHECK(win.size() == 1);
}

TEST_CASE("resolution two with one minute of slack gives three grid points") {
  auto inst = testing::demo_instance();
  inst.scenario.resolution = 2;
  // one minute of acceptable secondary delay on the half-minute grid
  for (auto& [k, v] : inst.scenario.d_max) v = 2;
  auto w = departure_windows(inst, inst.default_routing);
  for (const auto& [key, win] : w) CHECK(win.size() == 3);
}

TEST_CASE("unavoidable delays are monotone in primary delays") {
  auto inst = testing::demo_instance();
  auto base = propagate_unavoidable_delays(inst, inst.default_routing);
  for (int bump = 1; bump <= 3; ++bump) {
    auto inst2 = inst;
    inst2.scenario.primary_delay[{"j1", "s1"}] += bump;
    auto bumped = propagate_unavoidable_delays(inst2, inst2.default_routing);
    for (const auto& [key, t] : base) CHECK(bumped.at(key) >= t);
  }
}
