#include "rail/core.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace rail {

const SegmentTrack* LineSegment::find_track(const std::string& id) const {
  for (const auto& t : tracks)
    if (t.id == id) return &t;
  return nullptr;
}

std::optional<std::string> Train::prior_station(const std::string& s) const {
  for (std::size_t i = 1; i < route.size(); ++i)
    if (route[i] == s) return route[i - 1];
  return std::nullopt;
}

std::optional<std::string> Train::next_station(const std::string& s) const {
  for (std::size_t i = 0; i + 1 < route.size(); ++i)
    if (route[i] == s) return route[i + 1];
  return std::nullopt;
}

std::optional<GridTime> TimingParams::pass_time(const std::string& j, const std::string& s,
                                                const std::string& s2) const {
  auto it = pass.find({j, s, s2});
  if (it == pass.end()) return std::nullopt;
  return it->second;
}

std::optional<GridTime> TimingParams::blocks_time(const std::string& j, const std::string& s,
                                                  const std::string& s2) const {
  auto it = blocks.find({j, s, s2});
  if (it == blocks.end()) return std::nullopt;
  return it->second;
}

GridTime TimingParams::stop_time(const std::string& j, const std::string& s) const {
  auto it = stop.find({j, s});
  return it == stop.end() ? 0 : it->second;
}

std::optional<GridTime> TimingParams::prep_time(const std::string& jin, const std::string& jout,
                                                const std::string& s) const {
  auto it = prep.find({jin, jout, s});
  if (it == prep.end()) return std::nullopt;
  return it->second;
}

std::optional<GridTime> TimingParams::resource_time(const std::string& j, const std::string& j2,
                                                    const std::string& s) const {
  auto it = res.find({j, j2, s});
  if (it != res.end()) return it->second;
  return res_default;
}

const Station* DispatchInstance::find_station(const std::string& id) const {
  for (const auto& s : stations)
    if (s.id == id) return &s;
  return nullptr;
}

const Train* DispatchInstance::find_train(const std::string& id) const {
  for (const auto& t : trains)
    if (t.id == id) return &t;
  return nullptr;
}

const LineSegment* DispatchInstance::find_segment(const std::string& a,
                                                  const std::string& b) const {
  for (const auto& seg : segments)
    if (seg.joins(a, b)) return &seg;
  return nullptr;
}

GridTime DispatchInstance::d_max_of(const std::string& train) const {
  auto it = scenario.d_max.find(train);
  if (it == scenario.d_max.end())
    throw RailError("missing-parameter", "d_max missing for train " + train);
  return it->second;
}

std::string to_string(ConflictKind k) {
  switch (k) {
    case ConflictKind::Span: return "span";
    case ConflictKind::SingleTrack: return "single-track";
    case ConflictKind::StationTrack: return "station-track";
    case ConflictKind::Switch: return "switch";
    case ConflictKind::RollingStock: return "rolling-stock";
  }
  return "?";
}

std::string Conflict::label() const {
  std::ostringstream os;
  os << to_string(kind) << ' ' << a << '/' << b;
  if (!s_from.empty()) os << " line " << s_from << "->" << s_to << " " << track;
  if (!station.empty()) {
    os << " at " << station;
    if (!track.empty()) os << " " << track;
    for (const auto& g : switches) os << " " << g;
  }
  return os.str();
}

std::vector<std::tuple<std::string, std::string, std::set<std::string>>>
ConflictSets::switch_pairs(const std::string& station) const {
  std::map<std::pair<std::string, std::string>, std::set<std::string>> by_pair;
  for (const auto& [key, trains] : shared_switch) {
    if (key.first != station) continue;
    for (auto it = trains.begin(); it != trains.end(); ++it)
      for (auto jt = std::next(it); jt != trains.end(); ++jt)
        by_pair[{*it, *jt}].insert(key.second);
  }
  std::vector<std::tuple<std::string, std::string, std::set<std::string>>> out;
  for (const auto& [pair, groups] : by_pair) {
    bool same_track = false;
    for (const auto& [tk, ts] : shared_station_track)
      if (tk.first == station && ts.count(pair.first) && ts.count(pair.second))
        same_track = true;
    if (!same_track) out.emplace_back(pair.first, pair.second, groups);
  }
  return out;
}

namespace {

std::pair<std::string, std::string> sorted_pair(const std::string& a, const std::string& b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

}  // namespace

ConflictSets derive_conflict_sets(const DispatchInstance& instance, const Routing& routing) {
  ConflictSets sets;

  // Group trains by (segment, track); remember each train's travel direction.
  struct LineUse { std::string train; bool forward; std::string from, to; };
  std::map<std::pair<std::pair<std::string, std::string>, std::string>, std::vector<LineUse>> uses;
  for (const auto& train : instance.trains) {
    for (std::size_t i = 0; i + 1 < train.route.size(); ++i) {
      const std::string& s = train.route[i];
      const std::string& s2 = train.route[i + 1];
      auto it = routing.line_track.find({train.id, s, s2});
      if (it == routing.line_track.end()) continue;
      const LineSegment* seg = instance.find_segment(s, s2);
      if (!seg || !seg->find_track(it->second)) continue;
      bool forward = (seg->from == s);
      uses[{{seg->from, seg->to}, it->second}].push_back({train.id, forward, s, s2});
    }
  }
  for (const auto& [key, list] : uses) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      for (std::size_t k = i + 1; k < list.size(); ++k) {
        const LineUse& u = list[i];
        const LineUse& v = list[k];
        if (u.forward == v.forward) {
          SegKey sk{u.from, u.to, key.second};
          sets.same_direction[sk].insert(sorted_pair(u.train, v.train));
        } else {
          SegKey sk{key.first.first, key.first.second, key.second};
          const LineUse& fwd = u.forward ? u : v;
          const LineUse& rev = u.forward ? v : u;
          sets.single_track_opposite[sk].insert({fwd.train, rev.train});
        }
      }
    }
  }

  // Station tracks.
  std::map<std::pair<std::string, std::string>, std::set<std::string>> track_users;
  for (const auto& train : instance.trains)
    for (const auto& s : train.route) {
      auto it = routing.station_track.find({train.id, s});
      if (it != routing.station_track.end()) track_users[{s, it->second}].insert(train.id);
    }
  for (const auto& [key, trains] : track_users)
    if (trains.size() >= 2) sets.shared_station_track[key] = trains;

  // Switch groups; drop a group if every pair in it already shares a track.
  std::map<std::pair<std::string, std::string>, std::set<std::string>> switch_users;
  for (const auto& train : instance.trains)
    for (const auto& s : train.route) {
      auto it = routing.station_path.find({train.id, s});
      if (it == routing.station_path.end()) continue;
      for (const auto& g : it->second) switch_users[{s, g}].insert(train.id);
    }
  for (const auto& [key, trains] : switch_users) {
    if (trains.size() < 2) continue;
    bool any_uncovered = false;
    for (auto it = trains.begin(); it != trains.end() && !any_uncovered; ++it)
      for (auto jt = std::next(it); jt != trains.end() && !any_uncovered; ++jt) {
        bool covered = false;
        for (const auto& [tk, ts] : sets.shared_station_track)
          if (tk.first == key.first && ts.count(*it) && ts.count(*jt)) covered = true;
        if (!covered) any_uncovered = true;
      }
    if (any_uncovered) sets.shared_switch[key] = trains;
  }

  for (const auto& t : instance.turnarounds)
    sets.rolling_stock_pairs[t.station].insert({t.arriving, t.departing});

  // Common consecutive-pair paths, same orientation for both trains.
  for (std::size_t i = 0; i < instance.trains.size(); ++i)
    for (std::size_t k = i + 1; k < instance.trains.size(); ++k) {
      const Train& a = instance.trains[i];
      const Train& b = instance.trains[k];
      std::vector<std::pair<std::string, std::string>> shared;
      for (std::size_t p = 0; p + 1 < a.route.size(); ++p)
        for (std::size_t q = 0; q + 1 < b.route.size(); ++q)
          if (a.route[p] == b.route[q] && a.route[p + 1] == b.route[q + 1])
            shared.emplace_back(a.route[p], a.route[p + 1]);
      if (!shared.empty()) sets.common_path[sorted_pair(a.id, b.id)] = shared;
    }

  return sets;
}

std::vector<Conflict> enumerate_conflicts(const DispatchInstance& instance,
                                          const ConflictSets& sets) {
  std::vector<Conflict> out;
  for (const auto& [key, pairs] : sets.same_direction)
    for (const auto& p : pairs) {
      Conflict c;
      c.kind = ConflictKind::Span;
      c.a = p.first; c.b = p.second;
      c.s_from = key.a; c.s_to = key.b; c.track = key.track;
      out.push_back(c);
    }
  for (const auto& [key, pairs] : sets.single_track_opposite)
    for (const auto& p : pairs) {
      Conflict c;
      c.kind = ConflictKind::SingleTrack;
      c.a = p.first; c.b = p.second;
      c.s_from = key.a; c.s_to = key.b; c.track = key.track;
      out.push_back(c);
    }
  for (const auto& [key, trains] : sets.shared_station_track)
    for (auto it = trains.begin(); it != trains.end(); ++it)
      for (auto jt = std::next(it); jt != trains.end(); ++jt) {
        Conflict c;
        c.kind = ConflictKind::StationTrack;
        c.a = *it; c.b = *jt;
        c.station = key.first; c.track = key.second;
        out.push_back(c);
      }
  for (const auto& station : instance.stations)
    for (const auto& [a, b, groups] : sets.switch_pairs(station.id)) {
      Conflict c;
      c.kind = ConflictKind::Switch;
      c.a = a; c.b = b;
      c.station = station.id; c.switches = groups;
      out.push_back(c);
    }
  for (const auto& [s, pairs] : sets.rolling_stock_pairs)
    for (const auto& p : pairs) {
      Conflict c;
      c.kind = ConflictKind::RollingStock;
      c.a = p.first; c.b = p.second;
      c.station = s;
      out.push_back(c);
    }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Diagnostic> validate_instance(const DispatchInstance& instance,
                                          const Routing& routing) {
  std::vector<Diagnostic> diags;
  auto add = [&](const std::string& code, const std::string& msg) {
    diags.push_back({code, msg});
  };

  std::set<std::string> station_ids, train_ids;
  for (const auto& s : instance.stations)
    if (!station_ids.insert(s.id).second) add("duplicate-id", "duplicate station id " + s.id);
  for (const auto& t : instance.trains)
    if (!train_ids.insert(t.id).second) add("duplicate-id", "duplicate train id " + t.id);

  if (instance.scenario.resolution < 1)
    add("resolution-invalid", "resolution must be a positive integer");

  for (const auto& seg : instance.segments) {
    std::set<std::string> ids;
    for (const auto& tr : seg.tracks)
      if (!ids.insert(tr.id).second)
        add("duplicate-id", "duplicate track " + tr.id + " on segment " + seg.from + "-" + seg.to);
    if (!station_ids.count(seg.from) || !station_ids.count(seg.to))
      add("unknown-resource", "segment " + seg.from + "-" + seg.to + " references unknown station");
  }

  for (const auto& train : instance.trains) {
    if (train.route.size() < 2) {
      add("route-too-short", "train " + train.id + " needs at least 2 stations");
      continue;
    }
    for (std::size_t i = 0; i + 1 < train.route.size(); ++i)
      if (train.route[i] == train.route[i + 1])
        add("route-repetition", "train " + train.id + " repeats station " + train.route[i]);
    for (const auto& s : train.route)
      if (!station_ids.count(s))
        add("unknown-resource", "train " + train.id + " route references unknown station " + s);
    if (train.weight < 0)
      add("negative-weight", "train " + train.id + " has negative weight");

    // Departure events required everywhere except the terminal station.
    for (std::size_t i = 0; i + 1 < train.route.size(); ++i)
      if (!train.has_departure(train.route[i]))
        add("missing-parameter",
            "train " + train.id + " lacks a scheduled departure at " + train.route[i]);

    // Schedule must be nondecreasing along the route.
    GridTime last = std::numeric_limits<GridTime>::min();
    for (const auto& s : train.route) {
      for (auto* m : {&train.scheduled_arrival, &train.scheduled_departure}) {
        auto it = m->find(s);
        if (it == m->end()) continue;
        if (it->second < last)
          add("schedule-order", "train " + train.id + " schedule decreases at " + s);
        last = std::max(last, it->second);
      }
    }

    // pass must exist for every consecutive pair on the route.
    for (std::size_t i = 0; i + 1 < train.route.size(); ++i)
      if (!instance.timing.pass_time(train.id, train.route[i], train.route[i + 1]))
        add("missing-parameter", "pass time missing for " + train.id + " " +
                                     train.route[i] + "->" + train.route[i + 1]);

    auto dm = instance.scenario.d_max.find(train.id);
    if (dm == instance.scenario.d_max.end())
      add("missing-parameter", "d_max missing for train " + train.id);
    else if (dm->second < 0)
      add("negative-time", "d_max negative for train " + train.id);
  }

  for (const auto& [k, v] : instance.timing.pass)
    if (v < 0) add("negative-time", "negative pass time for " + std::get<0>(k));
  for (const auto& [k, v] : instance.timing.blocks)
    if (v < 0) add("negative-time", "negative blocks time for " + std::get<0>(k));
  for (const auto& [k, v] : instance.timing.stop)
    if (v < 0) add("negative-time", "negative stop time for " + k.first);
  for (const auto& [k, v] : instance.timing.prep)
    if (v < 0) add("negative-time", "negative prep time for " + std::get<0>(k));
  for (const auto& [k, v] : instance.timing.res)
    if (v < 0) add("negative-time", "negative resource time for " + std::get<0>(k));
  for (const auto& [k, v] : instance.scenario.primary_delay)
    if (v < 0) add("negative-time", "negative primary delay for " + k.first);

  // Routing assignments must exist and reference real resources.
  for (const auto& train : instance.trains) {
    if (train.route.size() < 2) continue;
    for (std::size_t i = 0; i + 1 < train.route.size(); ++i) {
      const std::string& s = train.route[i];
      const std::string& s2 = train.route[i + 1];
      const LineSegment* seg = instance.find_segment(s, s2);
      if (!seg) {
        add("unknown-resource", "no segment between " + s + " and " + s2);
        continue;
      }
      auto it = routing.line_track.find({train.id, s, s2});
      if (it == routing.line_track.end()) {
        add("missing-assignment", "no line track for " + train.id + " " + s + "->" + s2);
        continue;
      }
      const SegmentTrack* tr = seg->find_track(it->second);
      if (!tr) {
        add("unknown-resource", "track " + it->second + " not on segment " + s + "-" + s2);
        continue;
      }
      if (tr->mode == TrackMode::OneWay && seg->from != s)
        add("direction-violation", "train " + train.id + " routed against one-way track " +
                                       tr->id + " on " + s + "->" + s2);
    }
    for (const auto& s : train.route) {
      const Station* st = instance.find_station(s);
      if (!st) continue;
      auto it = routing.station_track.find({train.id, s});
      if (it == routing.station_track.end()) {
        add("missing-assignment", "no station track for " + train.id + " at " + s);
        continue;
      }
      auto tk = st->tracks.find(it->second);
      if (tk == st->tracks.end()) {
        add("unknown-resource", "station track " + it->second + " not at " + s);
        continue;
      }
      auto pt = routing.station_path.find({train.id, s});
      if (pt == routing.station_path.end()) {
        add("missing-assignment", "no station path for " + train.id + " at " + s);
        continue;
      }
      bool found = tk->second.empty() && pt->second.empty();
      for (const auto& alt : tk->second)
        if (alt == pt->second) found = true;
      if (!found)
        add("path-unavailable", "path for " + train.id + " at " + s +
                                    " is not an alternative of track " + it->second);
    }
  }

  for (const auto& t : instance.turnarounds) {
    const Train* in = instance.find_train(t.arriving);
    const Train* out = instance.find_train(t.departing);
    if (!in || !out || !station_ids.count(t.station)) {
      add("turnaround-invalid", "turnaround references unknown train or station");
      continue;
    }
    if (in->route.empty() || in->route.back() != t.station)
      add("turnaround-invalid", "train " + t.arriving + " does not terminate at " + t.station);
    if (out->route.empty() || out->route.front() != t.station)
      add("turnaround-invalid", "train " + t.departing + " does not originate at " + t.station);
    if (!instance.timing.prep_time(t.arriving, t.departing, t.station))
      add("missing-parameter", "prep time missing for turnaround " + t.arriving + "->" +
                                   t.departing + " at " + t.station);
  }

  // Timing needed by the induced conflicts.
  if (diags.empty()) {
    ConflictSets sets = derive_conflict_sets(instance, routing);
    for (const auto& [key, pairs] : sets.same_direction)
      for (const auto& p : pairs)
        for (const auto& j : {p.first, p.second})
          if (!instance.timing.blocks_time(j, key.a, key.b))
            add("missing-parameter",
                "blocks time missing for " + j + " " + key.a + "->" + key.b);
    for (const auto& [key, trains] : sets.shared_station_track)
      for (auto it = trains.begin(); it != trains.end(); ++it)
        for (auto jt = std::next(it); jt != trains.end(); ++jt)
          if (!instance.timing.resource_time(*it, *jt, key.first) ||
              !instance.timing.resource_time(*jt, *it, key.first))
            add("missing-parameter",
                "resource time missing for " + *it + "/" + *jt + " at " + key.first);
    for (const auto& station : instance.stations)
      for (const auto& [a, b, groups] : sets.switch_pairs(station.id))
        if (!instance.timing.resource_time(a, b, station.id) ||
            !instance.timing.resource_time(b, a, station.id))
          add("missing-parameter",
              "resource time missing for " + a + "/" + b + " at " + station.id);
  }

  return diags;
}

std::map<EventKey, GridTime> propagate_unavoidable_delays(const DispatchInstance& instance,
                                                          const Routing& routing) {
  (void)routing;  // unavoidable delays ignore inter-train conflicts
  std::map<EventKey, GridTime> t_u;
  for (const auto& train : instance.trains) {
    GridTime prev = 0;
    bool have_prev = false;
    for (std::size_t i = 0; i < train.route.size(); ++i) {
      const std::string& s = train.route[i];
      GridTime earliest = std::numeric_limits<GridTime>::min();
      auto sched = train.scheduled_departure.find(s);
      if (sched != train.scheduled_departure.end()) {
        GridTime base = sched->second;
        auto d = instance.scenario.primary_delay.find({train.id, s});
        if (d != instance.scenario.primary_delay.end()) base += d->second;
        earliest = base;
      }
      if (have_prev) {
        auto p = instance.timing.pass_time(train.id, train.route[i - 1], s);
        if (!p)
          throw RailError("missing-parameter", "pass time missing for " + train.id + " " +
                                                   train.route[i - 1] + "->" + s);
        earliest = std::max(earliest, prev + *p + instance.timing.stop_time(train.id, s));
      }
      if (!train.has_departure(s)) break;  // terminal station without departure
      t_u[{train.id, s}] = earliest;
      prev = earliest;
      have_prev = true;
    }
  }
  return t_u;
}

std::map<EventKey, Window> departure_windows(const DispatchInstance& instance,
                                             const Routing& routing) {
  std::map<EventKey, Window> out;
  auto t_u = propagate_unavoidable_delays(instance, routing);
  for (const auto& [key, t] : t_u)
    out[key] = Window{t, t + instance.d_max_of(key.first)};
  return out;
}

}  // namespace rail
