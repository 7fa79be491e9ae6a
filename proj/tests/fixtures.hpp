#pragma once

#include <random>

#include "rail/core.hpp"

namespace rail::testing {

// Two stations joined by a double-track line, three trains: two heading
// s1 -> s2 (the fast regional j1 and the slower inter-city j2, sharing a
// platform at s2) and one opposing regional j3. All trains already delayed.
inline DispatchInstance demo_instance() {
  DispatchInstance inst;

  Station s1;
  s1.id = "s1";
  s1.switch_groups = {"g1a", "g1b", "g1c"};
  s1.tracks["track1"] = {{"g1a"}};
  s1.tracks["track2"] = {{"g1b"}};
  s1.tracks["track3"] = {{"g1c"}};
  Station s2;
  s2.id = "s2";
  s2.switch_groups = {"g2a", "g2b"};
  s2.tracks["track1"] = {{"g2a"}};
  s2.tracks["track2"] = {{"g2b"}};
  inst.stations = {s1, s2};

  LineSegment seg;
  seg.from = "s1";
  seg.to = "s2";
  seg.tracks = {{"track1", TrackMode::Bidirectional}, {"track2", TrackMode::Bidirectional}};
  inst.segments = {seg};

  Train j1;
  j1.id = "j1";
  j1.weight = 2.0;
  j1.route = {"s1", "s2"};
  j1.scheduled_departure = {{"s1", 0}, {"s2", 5}};
  j1.scheduled_arrival = {{"s2", 4}};
  j1.counted = {"s1"};
  Train j2;
  j2.id = "j2";
  j2.weight = 1.0;
  j2.route = {"s1", "s2"};
  j2.scheduled_departure = {{"s1", 0}, {"s2", 9}};
  j2.scheduled_arrival = {{"s2", 8}};
  j2.counted = {"s1"};
  Train j3;
  j3.id = "j3";
  j3.weight = 1.0;
  j3.route = {"s2", "s1"};
  j3.scheduled_departure = {{"s2", 0}};
  j3.scheduled_arrival = {{"s1", 8}};
  j3.counted = {"s2"};
  inst.trains = {j1, j2, j3};

  inst.timing.pass[{"j1", "s1", "s2"}] = 4;
  inst.timing.pass[{"j2", "s1", "s2"}] = 8;
  inst.timing.pass[{"j3", "s2", "s1"}] = 8;
  inst.timing.blocks[{"j1", "s1", "s2"}] = 2;
  inst.timing.blocks[{"j2", "s1", "s2"}] = 2;
  inst.timing.stop[{"j1", "s2"}] = 1;
  inst.timing.stop[{"j2", "s2"}] = 1;
  inst.timing.res_default = 1;

  inst.scenario.primary_delay[{"j1", "s1"}] = 4;
  inst.scenario.primary_delay[{"j2", "s1"}] = 1;
  inst.scenario.primary_delay[{"j3", "s2"}] = 8;
  inst.scenario.d_max = {{"j1", 10}, {"j2", 10}, {"j3", 10}};
  inst.scenario.resolution = 1;

  Routing& r = inst.default_routing;
  r.line_track[{"j1", "s1", "s2"}] = "track1";
  r.line_track[{"j2", "s1", "s2"}] = "track1";
  r.line_track[{"j3", "s2", "s1"}] = "track2";
  r.station_track[{"j1", "s1"}] = "track1";
  r.station_track[{"j1", "s2"}] = "track1";
  r.station_track[{"j2", "s1"}] = "track2";
  r.station_track[{"j2", "s2"}] = "track1";
  r.station_track[{"j3", "s2"}] = "track2";
  r.station_track[{"j3", "s1"}] = "track3";
  r.station_path[{"j1", "s1"}] = {"g1a"};
  r.station_path[{"j1", "s2"}] = {"g2a"};
  r.station_path[{"j2", "s1"}] = {"g1b"};
  r.station_path[{"j2", "s2"}] = {"g2a"};
  r.station_path[{"j3", "s2"}] = {"g2b"};
  r.station_path[{"j3", "s1"}] = {"g1c"};
  return inst;
}

// The demo after splitting the line into two parallel single-track lines.
inline Routing demo_rerouted(const DispatchInstance& inst) {
  Routing r = inst.default_routing;
  r.line_track[{"j2", "s1", "s2"}] = "track2";
  return r;
}

// A corridor where every train serves every station, departs everywhere
// (including the terminus) and shares the single segment track and the single
// platform with everyone else.
inline DispatchInstance full_shared_instance(int n_trains, int n_stations,
                                             GridTime d_max = 3) {
  DispatchInstance inst;
  std::vector<std::string> names;
  for (int i = 0; i < n_stations; ++i) {
    names.push_back("q" + std::to_string(i + 1));
    Station s;
    s.id = names.back();
    s.tracks["p1"] = {{}};
    inst.stations.push_back(s);
  }
  for (int i = 0; i + 1 < n_stations; ++i) {
    LineSegment seg;
    seg.from = names[i];
    seg.to = names[i + 1];
    seg.tracks = {{"t1", TrackMode::Bidirectional}};
    inst.segments.push_back(seg);
  }
  for (int k = 0; k < n_trains; ++k) {
    Train t;
    t.id = "j" + std::to_string(k + 1);
    t.weight = 1.0;
    t.route = names;
    GridTime clock = 0;
    for (int i = 0; i < n_stations; ++i) {
      if (i > 0) {
        inst.timing.pass[{t.id, names[i - 1], names[i]}] = 2;
        clock += 2;
        t.scheduled_arrival[names[i]] = clock;
      }
      t.scheduled_departure[names[i]] = clock;
      t.counted.insert(names[i]);
      if (i + 1 < n_stations) inst.timing.blocks[{t.id, names[i], names[i + 1]}] = 1;
    }
    inst.scenario.primary_delay[{t.id, names[0]}] = 3 * k;  // stagger the fleet
    inst.scenario.d_max[t.id] = d_max;
    inst.trains.push_back(t);
  }
  inst.timing.res_default = 1;
  inst.scenario.resolution = 1;
  Routing& r = inst.default_routing;
  for (const auto& t : inst.trains)
    for (int i = 0; i < n_stations; ++i) {
      if (i + 1 < n_stations) r.line_track[{t.id, names[i], names[i + 1]}] = "t1";
      r.station_track[{t.id, names[i]}] = "p1";
      r.station_path[{t.id, names[i]}] = {};
    }
  return inst;
}

// Seeded micro-instance generator for oracle-equivalence sweeps. Keeps the
// one-hot state space small enough for exhaustive enumeration.
inline DispatchInstance random_micro_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };

  DispatchInstance inst;
  int n_stations = pick(2, 3);
  std::vector<std::string> names = {"a", "b", "c"};
  names.resize(n_stations);

  for (int i = 0; i < n_stations; ++i) {
    Station s;
    s.id = names[i];
    int n_tracks = pick(1, 2);
    s.switch_groups = {"w1", "w2"};
    for (int t = 0; t < n_tracks; ++t) {
      std::string id = "p" + std::to_string(t + 1);
      // some tracks share a switch group, some have none
      switch (pick(0, 2)) {
        case 0: s.tracks[id] = {{}}; break;
        case 1: s.tracks[id] = {{"w1"}}; break;
        default: s.tracks[id] = {{"w" + std::to_string(t + 1)}}; break;
      }
    }
    inst.stations.push_back(s);
  }
  for (int i = 0; i + 1 < n_stations; ++i) {
    LineSegment seg;
    seg.from = names[i];
    seg.to = names[i + 1];
    int n_tracks = pick(1, 2);
    for (int t = 0; t < n_tracks; ++t)
      seg.tracks.push_back({"t" + std::to_string(t + 1), TrackMode::Bidirectional});
    inst.segments.push_back(seg);
  }

  int n_trains = pick(1, 3);
  GridTime d_max = pick(2, 4);
  for (int k = 0; k < n_trains; ++k) {
    Train t;
    t.id = "j" + std::to_string(k + 1);
    t.weight = pick(1, 2);
    int len = pick(2, n_stations);
    int start = pick(0, n_stations - len);
    bool forward = pick(0, 1) == 1;
    for (int i = 0; i < len; ++i)
      t.route.push_back(names[forward ? start + i : start + len - 1 - i]);

    GridTime clock = pick(0, 2);
    bool terminal_departs = pick(0, 1) == 1;
    for (std::size_t i = 0; i < t.route.size(); ++i) {
      const std::string& s = t.route[i];
      if (i > 0) {
        GridTime pass = pick(1, 4);
        inst.timing.pass[{t.id, t.route[i - 1], s}] = pass;
        clock += pass;
        t.scheduled_arrival[s] = clock;
        GridTime stop = pick(0, 1);
        if (stop) inst.timing.stop[{t.id, s}] = stop;
        clock += stop;
      }
      bool last = i + 1 == t.route.size();
      if (!last || terminal_departs) {
        t.scheduled_departure[s] = clock;
        if (pick(0, 3) > 0) t.counted.insert(s);
      }
      if (!last) inst.timing.blocks[{t.id, s, t.route[i + 1]}] = pick(1, 2);
    }
    if (pick(0, 1)) inst.scenario.primary_delay[{t.id, t.route[0]}] = pick(0, 3);
    inst.scenario.d_max[t.id] = d_max;
    inst.trains.push_back(t);
  }
  inst.timing.res_default = pick(1, 2);
  inst.scenario.resolution = 1;

  // Random valid routing. Trains sharing a same-direction segment get
  // distinct downstream platforms so span and station-track orders stay
  // independent decisions.
  Routing& r = inst.default_routing;
  for (const auto& t : inst.trains) {
    for (std::size_t i = 0; i + 1 < t.route.size(); ++i) {
      const LineSegment* seg = inst.find_segment(t.route[i], t.route[i + 1]);
      r.line_track[{t.id, t.route[i], t.route[i + 1]}] =
          seg->tracks[pick(0, static_cast<int>(seg->tracks.size()) - 1)].id;
    }
  }
  for (const auto& t : inst.trains) {
    for (std::size_t i = 0; i < t.route.size(); ++i) {
      const Station* st = inst.find_station(t.route[i]);
      std::vector<std::string> track_ids;
      for (const auto& [id, alts] : st->tracks) track_ids.push_back(id);
      std::string chosen = track_ids[pick(0, static_cast<int>(track_ids.size()) - 1)];
      // avoid platform sharing downstream of a shared same-direction track
      if (i > 0) {
        for (const auto& other : inst.trains) {
          if (other.id >= t.id) break;
          auto ot = r.line_track.find({other.id, t.route[i - 1], t.route[i]});
          auto mt = r.line_track.find({t.id, t.route[i - 1], t.route[i]});
          auto op = r.station_track.find({other.id, t.route[i]});
          if (ot != r.line_track.end() && mt != r.line_track.end() &&
              ot->second == mt->second && op != r.station_track.end() &&
              op->second == chosen) {
            for (const auto& id : track_ids)
              if (id != op->second) { chosen = id; break; }
          }
        }
      }
      r.station_track[{t.id, t.route[i]}] = chosen;
      r.station_path[{t.id, t.route[i]}] = st->tracks.at(chosen).front();
    }
  }

  // Occasionally hook up a turnaround pair.
  if (n_trains >= 2) {
    for (int a = 0; a < n_trains && inst.turnarounds.empty(); ++a)
      for (int b = 0; b < n_trains; ++b) {
        if (a == b) continue;
        const Train& in = inst.trains[a];
        const Train& out = inst.trains[b];
        if (in.route.back() == out.route.front() && pick(0, 1)) {
          inst.turnarounds.push_back({in.id, out.id, in.route.back()});
          inst.timing.prep[{in.id, out.id, in.route.back()}] = pick(0, 3);
          break;
        }
      }
  }
  return inst;
}

}  // namespace rail::testing
