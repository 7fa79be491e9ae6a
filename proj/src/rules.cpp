#include "rail/rules.hpp"

#include <sstream>

namespace rail {

namespace {

GridTime need(std::optional<GridTime> v, const std::string& what) {
  if (!v) throw RailError("missing-parameter", what + " missing");
  return *v;
}

std::string seg_label(const std::string& s, const std::string& s2, const std::string& track) {
  return s + "->" + s2 + ":" + track;
}

}  // namespace

std::string YKey::name() const {
  std::ostringstream os;
  os << a << '_' << b << '_' << s;
  if (kind == Kind::LineEntry) os << '_' << s2;
  return os.str();
}

ForbiddenWindow span_window(const std::string& j, const std::string& j2,
                            const std::string& s, const std::string& s2,
                            const TimingParams& timing) {
  GridTime pass_j = need(timing.pass_time(j, s, s2), "pass " + j);
  GridTime pass_j2 = need(timing.pass_time(j2, s, s2), "pass " + j2);
  GridTime blk_j = need(timing.blocks_time(j, s, s2), "blocks " + j);
  GridTime blk_j2 = need(timing.blocks_time(j2, s, s2), "blocks " + j2);
  ForbiddenWindow w;
  w.var_a = {j, s};
  w.var_b = {j2, s};
  w.lo = static_cast<double>(-blk_j2 - std::max<GridTime>(0, pass_j2 - pass_j));
  w.hi = static_cast<double>(blk_j + std::max<GridTime>(0, pass_j - pass_j2));
  return w;
}

ForbiddenWindow single_track_window(const std::string& j, const std::string& j2,
                                    const std::string& s, const std::string& s2,
                                    const TimingParams& timing) {
  ForbiddenWindow w;
  w.var_a = {j, s};
  w.var_b = {j2, s2};
  w.lo = static_cast<double>(-need(timing.pass_time(j2, s2, s), "pass " + j2));
  w.hi = static_cast<double>(need(timing.pass_time(j, s, s2), "pass " + j));
  return w;
}

ForbiddenWindow stay_window(const std::string& j, const std::string& s,
                            const std::string& s2, const TimingParams& timing) {
  ForbiddenWindow w;
  w.var_a = {j, s};
  w.var_b = {j, s2};
  w.hi = static_cast<double>(need(timing.pass_time(j, s, s2), "pass " + j) +
                             timing.stop_time(j, s2));
  return w;
}

ForbiddenWindow circulation_window(const std::string& j, const std::string& j2,
                                   const std::string& s_prior, const std::string& s,
                                   const TimingParams& timing) {
  ForbiddenWindow w;
  w.var_a = {j, s_prior};
  w.var_b = {j2, s};
  w.hi = static_cast<double>(need(timing.pass_time(j, s_prior, s), "pass " + j) +
                             need(timing.prep_time(j, j2, s), "prep " + j + "/" + j2));
  return w;
}

ForbiddenWindow switch_window(const std::string& j, const std::string& j2,
                              const std::string& s, const TimingParams& timing) {
  ForbiddenWindow w;
  w.var_a = {j, s};
  w.var_b = {j2, s};
  w.lo = static_cast<double>(-need(timing.resource_time(j2, j, s), "res " + j2 + "/" + j));
  w.hi = static_cast<double>(need(timing.resource_time(j, j2, s), "res " + j + "/" + j2));
  return w;
}

RuleSet build_rules(const DispatchInstance& instance, const Routing& routing,
                    const ConflictSets& sets) {
  (void)routing;
  RuleSet rules;

  // Minimal span between same-direction trains on a shared segment track.
  for (const auto& [key, pairs] : sets.same_direction) {
    for (const auto& [a, b] : pairs) {
      ForbiddenWindow w = span_window(a, b, key.a, key.b, instance.timing);
      PairRule r;
      r.kind = ConflictKind::Span;
      r.a = w.var_a;
      r.b = w.var_b;
      r.lo = w.lo;
      r.hi = w.hi;
      r.y = YKey{YKey::Kind::StationOrder, a, b, key.a, ""};
      r.ja = a; r.jb = b;
      r.resource = seg_label(key.a, key.b, key.track);
      rules.pairs.push_back(r);
    }
  }

  // Single-track line used in opposite directions.
  for (const auto& [key, pairs] : sets.single_track_opposite) {
    for (const auto& [fwd, rev] : pairs) {
      ForbiddenWindow w = single_track_window(fwd, rev, key.a, key.b, instance.timing);
      PairRule r;
      r.kind = ConflictKind::SingleTrack;
      r.a = w.var_a;
      r.b = w.var_b;
      r.lo = w.lo;
      r.hi = w.hi;
      r.y = YKey{YKey::Kind::LineEntry, fwd, rev, key.a, key.b};
      r.ja = fwd; r.jb = rev;
      r.resource = seg_label(key.a, key.b, key.track);
      rules.pairs.push_back(r);
    }
  }

  // Minimal stay: departure from s2 only after arrival plus stop.
  for (const auto& train : instance.trains) {
    for (std::size_t i = 0; i + 1 < train.route.size(); ++i) {
      const std::string& s = train.route[i];
      const std::string& s2 = train.route[i + 1];
      if (!train.has_departure(s) || !train.has_departure(s2)) continue;
      ForbiddenWindow w = stay_window(train.id, s, s2, instance.timing);
      PairRule r;
      r.is_stay = true;
      r.a = w.var_a;
      r.b = w.var_b;
      r.hi = w.hi;
      r.ja = train.id; r.jb = train.id;
      r.resource = s + "->" + s2;
      rules.pairs.push_back(r);
    }
  }

  // Rolling stock circulation: the departing service waits for the arriving
  // train plus preparation time.
  for (const auto& [s, pairs] : sets.rolling_stock_pairs) {
    for (const auto& [jin, jout] : pairs) {
      const Train* in = instance.find_train(jin);
      if (!in) continue;
      auto prior = in->prior_station(s);
      if (!prior || !in->has_departure(*prior)) continue;
      const Train* out = instance.find_train(jout);
      if (!out || !out->has_departure(s)) continue;
      ForbiddenWindow w = circulation_window(jin, jout, *prior, s, instance.timing);
      PairRule r;
      r.kind = ConflictKind::RollingStock;
      r.is_circulation = true;
      r.a = w.var_a;
      r.b = w.var_b;
      r.hi = w.hi;
      r.ja = jin; r.jb = jout;
      r.resource = s;
      rules.pairs.push_back(r);
    }
  }

  // Shared switch groups, pairs not already sharing a station track.
  for (const auto& station : instance.stations) {
    for (const auto& [a, b, groups] : sets.switch_pairs(station.id)) {
      const Train* ta = instance.find_train(a);
      const Train* tb = instance.find_train(b);
      if (!ta || !tb || !ta->has_departure(station.id) || !tb->has_departure(station.id))
        continue;
      ForbiddenWindow w = switch_window(a, b, station.id, instance.timing);
      PairRule r;
      r.kind = ConflictKind::Switch;
      r.a = w.var_a;
      r.b = w.var_b;
      r.lo = w.lo;
      r.hi = w.hi;
      r.y = YKey{YKey::Kind::StationOrder, a, b, station.id, ""};
      r.ja = a; r.jb = b;
      std::string label = station.id;
      for (const auto& g : groups) label += ":" + g;
      r.resource = label;
      rules.pairs.push_back(r);
    }
  }

  // Station track occupation. Two trains on one station track cannot swap
  // order there, and neither may arrive while the other still holds the
  // track. Departures from the same track are additionally separated by the
  // shared-resource time; the cubic pattern alone does not exclude equal
  // departure times.
  for (const auto& [key, trains] : sets.shared_station_track) {
    const std::string& s = key.first;
    std::vector<std::string> with_departure;
    for (const auto& j : trains) {
      const Train* t = instance.find_train(j);
      if (t && t->has_departure(s)) with_departure.push_back(j);
    }
    for (std::size_t i = 0; i < with_departure.size(); ++i) {
      for (std::size_t k = i + 1; k < with_departure.size(); ++k) {
        const std::string& a = with_departure[i];
        const std::string& b = with_departure[k];
        YKey y{YKey::Kind::StationOrder, a, b, s, ""};
        std::string resource = s + ":" + key.second;

        ForbiddenWindow w = switch_window(a, b, s, instance.timing);
        PairRule sep;
        sep.kind = ConflictKind::StationTrack;
        sep.a = w.var_a;
        sep.b = w.var_b;
        sep.lo = w.lo;
        sep.hi = w.hi;
        sep.y = y;
        sep.ja = a; sep.jb = b;
        sep.resource = resource;
        rules.pairs.push_back(sep);

        // One cubic family per arriving member of the pair.
        auto add_triple = [&](const std::string& leaver, const std::string& arriver,
                              int active_when) {
          const Train* arr = instance.find_train(arriver);
          auto prior = arr->prior_station(s);
          if (!prior || !arr->has_departure(*prior)) return;
          TripleRule t;
          t.leaver = {leaver, s};
          t.arriver = {arriver, s};
          t.prior = {arriver, *prior};
          GridTime res = need(instance.timing.resource_time(leaver, arriver, s),
                              "res " + leaver + "/" + arriver);
          GridTime pass = need(instance.timing.pass_time(arriver, *prior, s),
                               "pass " + arriver);
          t.shift = res - pass;
          t.y = y;
          t.active_when = active_when;
          t.ja = a; t.jb = b;
          t.resource = resource;
          rules.triples.push_back(t);
        };
        add_triple(a, b, 1);
        add_triple(b, a, 0);
      }
    }
  }

  // Overtaking is impossible between a shared segment and a shared station
  // track at its downstream end: the two order variables coincide.
  for (const auto& [key, pairs] : sets.same_direction) {
    for (const auto& [a, b] : pairs) {
      auto it = sets.shared_station_track.end();
      for (auto jt = sets.shared_station_track.begin();
           jt != sets.shared_station_track.end(); ++jt)
        if (jt->first.first == key.b && jt->second.count(a) && jt->second.count(b)) it = jt;
      if (it == sets.shared_station_track.end()) continue;
      const Train* ta = instance.find_train(a);
      const Train* tb = instance.find_train(b);
      if (!ta || !tb || !ta->has_departure(key.b) || !tb->has_departure(key.b)) continue;
      rules.order_equalities.push_back({YKey{YKey::Kind::StationOrder, a, b, key.a, ""},
                                        YKey{YKey::Kind::StationOrder, a, b, key.b, ""}});
    }
  }

  return rules;
}

}  // namespace rail
