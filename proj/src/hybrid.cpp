#include "rail/hybrid.hpp"

#include <algorithm>
#include <cmath>

namespace rail {

std::string to_string(SolverMode m) {
  switch (m) {
    case SolverMode::LinearOracle: return "linear";
    case SolverMode::QuboBrute: return "qubo-brute";
    case SolverMode::QuboAnneal: return "qubo-anneal";
  }
  return "?";
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::Satisfied: return "satisfied";
    case StopReason::ExhaustedMoves: return "exhausted-moves";
    case StopReason::MaxIterations: return "max-iterations";
  }
  return "?";
}

RebuildOutput rebuild_after_reroute(const DispatchInstance& instance, const Routing& routing,
                                    const PenaltyConstants& constants, bool build_qubo) {
  RebuildOutput out;
  out.sets = derive_conflict_sets(instance, routing);
  out.linear = build_linear_model(instance, routing, out.sets);
  if (build_qubo) out.qubo = assemble(instance, routing, out.sets, constants);
  return out;
}

namespace {

std::string seg_resource(const Conflict& c) {
  return c.s_from + "->" + c.s_to + ":" + c.track;
}

std::string conflict_resource(const Conflict& c) {
  switch (c.kind) {
    case ConflictKind::Span:
    case ConflictKind::SingleTrack:
      return seg_resource(c);
    case ConflictKind::StationTrack:
      return c.station + ":" + c.track;
    case ConflictKind::Switch: {
      std::string label = c.station;
      for (const auto& g : c.switches) label += ":" + g;
      return label;
    }
    case ConflictKind::RollingStock:
      return c.station;
  }
  return {};
}

bool same_pair(const std::string& a, const std::string& b, const std::string& x,
               const std::string& y) {
  return (a == x && b == y) || (a == y && b == x);
}

RuleSet without_conflict(const RuleSet& rules, const Conflict& c) {
  RuleSet out;
  const std::string resource = conflict_resource(c);
  for (const auto& r : rules.pairs) {
    if (!r.is_stay && !r.is_circulation && r.kind == c.kind &&
        same_pair(r.ja, r.jb, c.a, c.b) && r.resource == resource)
      continue;
    if (r.is_circulation && c.kind == ConflictKind::RollingStock &&
        same_pair(r.ja, r.jb, c.a, c.b) && r.resource == resource)
      continue;
    out.pairs.push_back(r);
  }
  for (const auto& t : rules.triples) {
    if (c.kind == ConflictKind::StationTrack && same_pair(t.ja, t.jb, c.a, c.b) &&
        t.resource == resource)
      continue;
    out.triples.push_back(t);
  }
  out.order_equalities = rules.order_equalities;
  return out;
}

}  // namespace

std::optional<Conflict> pick_conflict(const DispatchInstance& instance, const Routing& routing,
                                      const ConflictSets& sets, const Schedule& schedule) {
  std::vector<Conflict> conflicts = enumerate_conflicts(instance, sets);
  if (conflicts.empty()) return std::nullopt;

  if (!schedule.feasible) {
    for (const auto& v : schedule.violations) {
      for (const auto& c : conflicts)
        if (to_string(c.kind) == v.family && same_pair(c.a, c.b, v.a, v.b)) return c;
    }
    // No conflict named in the diagnostics; fall through to attribution on a
    // best-effort basis.
  }

  // Participant-delay fallback when the exact oracle is unavailable.
  auto heuristic_pick = [&]() -> std::optional<Conflict> {
    double best_weight = -1.0;
    const Conflict* best = nullptr;
    for (const auto& c : conflicts) {
      double w = 0.0;
      for (const auto& [key, d] : schedule.secondary_delay) {
        if (key.first != c.a && key.first != c.b) continue;
        const Train* t = instance.find_train(key.first);
        if (t && t->counted.count(key.second))
          w += t->weight * static_cast<double>(d) /
               static_cast<double>(instance.d_max_of(key.first));
      }
      if (w > best_weight + 1e-12) { best_weight = w; best = &c; }
    }
    return best ? std::optional<Conflict>(*best) : std::optional<Conflict>(conflicts.front());
  };

  LinearModel base = build_linear_model(instance, routing, sets);
  double base_obj;
  try {
    Schedule s = solve_order_enumeration(base);
    if (!s.feasible) {
      // No order works at all: blame the first conflict whose removal
      // restores feasibility.
      for (const auto& c : conflicts) {
        LinearModel lifted =
            build_linear_model_from_rules(instance, routing, without_conflict(base.rules, c));
        if (solve_order_enumeration(lifted).feasible) return c;
      }
      return conflicts.front();
    }
    base_obj = s.objective;
  } catch (const RailError&) {
    return heuristic_pick();
  }

  // Exact attribution: objective drop when the conflict alone is lifted.
  double best_attr = -1.0;
  const Conflict* best = nullptr;
  for (const auto& c : conflicts) {
    RuleSet lifted = without_conflict(base.rules, c);
    LinearModel lifted_model = build_linear_model_from_rules(instance, routing, lifted);
    double attr = 0.0;
    try {
      Schedule s = solve_order_enumeration(lifted_model);
      if (s.feasible) attr = std::max(0.0, base_obj - s.objective);
    } catch (const RailError&) {
      attr = 0.0;
    }
    // Ties keep the earlier conflict; enumerate_conflicts sorts line
    // conflicts ahead of station conflicts.
    if (attr > best_attr + 1e-9) {
      best_attr = attr;
      best = &c;
    }
  }
  if (!best) best = &conflicts.front();
  return *best;
}

std::optional<Routing> reroute(const Routing& routing, const Conflict& conflict,
                               const DispatchInstance& instance, MoveMemory& memory,
                               const std::set<Routing>& visited, std::string* move_desc) {
  const Train* ta = instance.find_train(conflict.a);
  const Train* tb = instance.find_train(conflict.b);
  if (!ta || !tb) return std::nullopt;
  // Lower priority moves; ties break toward the smaller id.
  const Train* mover = ta;
  const Train* other = tb;
  if (ta->weight > tb->weight || (ta->weight == tb->weight && ta->id > tb->id)) {
    mover = tb;
    other = ta;
  }

  auto& tried = memory.tried[conflict.label()];
  auto attempt = [&](Routing candidate, const std::string& move_id) -> std::optional<Routing> {
    if (tried.count(move_id)) return std::nullopt;
    if (visited.count(candidate)) return std::nullopt;
    if (!validate_instance(instance, candidate).empty()) return std::nullopt;
    tried.insert(move_id);
    if (move_desc) *move_desc = move_id + " (" + mover->id + ")";
    return candidate;
  };

  // 1. Move to a parallel track on the conflicted segment.
  if (conflict.kind == ConflictKind::Span || conflict.kind == ConflictKind::SingleTrack) {
    std::string from = conflict.s_from, to = conflict.s_to;
    if (conflict.kind == ConflictKind::SingleTrack && mover->id == conflict.b)
      std::swap(from, to);  // the opposing train travels against the key
    const LineSegment* seg = instance.find_segment(from, to);
    if (seg) {
      auto cur = routing.line_track.find({mover->id, from, to});
      for (const auto& track : seg->tracks) {
        if (cur != routing.line_track.end() && track.id == cur->second) continue;
        if (track.mode == TrackMode::OneWay && seg->from != from) continue;
        Routing candidate = routing;
        candidate.line_track[{mover->id, from, to}] = track.id;
        auto moved = attempt(std::move(candidate), "line:" + from + "->" + to + ":" + track.id);
        if (moved) return moved;
      }
    }
    return std::nullopt;
  }

  if (conflict.kind == ConflictKind::RollingStock) return std::nullopt;

  const Station* station = instance.find_station(conflict.station);
  if (!station) return std::nullopt;
  auto other_path_it = routing.station_path.find({other->id, conflict.station});
  std::set<std::string> other_path =
      other_path_it == routing.station_path.end() ? std::set<std::string>{} : other_path_it->second;
  auto cur_track = routing.station_track.find({mover->id, conflict.station});

  auto lifts = [&](const std::set<std::string>& path) {
    if (conflict.kind != ConflictKind::Switch) return true;
    for (const auto& g : path)
      if (other_path.count(g)) return false;
    return true;
  };

  // 2. Change the platform at the station.
  for (const auto& [track, alts] : station->tracks) {
    if (cur_track != routing.station_track.end() && track == cur_track->second) continue;
    for (std::size_t i = 0; i < alts.size(); ++i) {
      if (!lifts(alts[i])) continue;
      Routing candidate = routing;
      candidate.station_track[{mover->id, conflict.station}] = track;
      candidate.station_path[{mover->id, conflict.station}] = alts[i];
      auto moved = attempt(std::move(candidate), "platform:" + conflict.station + ":" + track +
                                                     ":path" + std::to_string(i));
      if (moved) return moved;
      break;  // one path per platform candidate; further paths are path moves
    }
  }

  // 3. Change the path within the station, keeping the platform.
  if (conflict.kind == ConflictKind::Switch && cur_track != routing.station_track.end()) {
    auto alts_it = station->tracks.find(cur_track->second);
    if (alts_it != station->tracks.end()) {
      auto cur_path = routing.station_path.find({mover->id, conflict.station});
      for (std::size_t i = 0; i < alts_it->second.size(); ++i) {
        const auto& path = alts_it->second[i];
        if (cur_path != routing.station_path.end() && path == cur_path->second) continue;
        if (!lifts(path)) continue;
        Routing candidate = routing;
        candidate.station_path[{mover->id, conflict.station}] = path;
        auto moved = attempt(std::move(candidate), "path:" + conflict.station + ":" +
                                                       cur_track->second + ":path" +
                                                       std::to_string(i));
        if (moved) return moved;
      }
    }
  }

  return std::nullopt;
}

namespace {

Schedule run_solver(const DispatchInstance& instance, const DispatchConfig& config,
                    const RebuildOutput& build) {
  switch (config.solver_mode) {
    case SolverMode::LinearOracle:
      return solve_order_enumeration(build.linear);
    case SolverMode::QuboBrute: {
      SampleSet samples = brute_force_onehot(build.qubo->model, build.qubo->index);
      DecodedSample decoded = decode(samples.best().bits, *build.qubo, instance);
      Schedule s = decoded.schedule;
      if (!s.feasible && decoded.one_hot) s.violations = check_feasibility(s, build.linear);
      return s;
    }
    case SolverMode::QuboAnneal: {
      SampleSet samples = simulated_annealing(build.qubo->model, config.anneal);
      DecodedSample decoded = decode(samples.best().bits, *build.qubo, instance);
      Schedule s = decoded.schedule;
      if (!s.feasible && decoded.one_hot) s.violations = check_feasibility(s, build.linear);
      return s;
    }
  }
  throw RailError("bad-mode", "unknown solver mode");
}

}  // namespace

DispatchResult run(const DispatchInstance& instance, const DispatchConfig& config) {
  auto diags = validate_instance(instance, instance.default_routing);
  if (!diags.empty())
    throw RailError("invalid-instance", "instance validation failed: " + diags.front().message);
  if (config.max_iterations < 1)
    throw RailError("bad-params", "max_iterations must be at least 1");

  PenaltyConstants constants =
      config.constants ? *config.constants : default_penalty_constants(instance);
  bool need_qubo = config.solver_mode != SolverMode::LinearOracle;

  DispatchResult result;
  Routing routing = instance.default_routing;
  std::set<Routing> visited{routing};
  MoveMemory memory;
  std::string delta = "default";
  bool have_best = false;
  Routing best_routing = routing;
  Schedule last_schedule;

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    RebuildOutput build = rebuild_after_reroute(instance, routing, constants, need_qubo);
    Schedule schedule = run_solver(instance, config, build);
    last_schedule = schedule;

    IterationRecord rec;
    rec.routing = routing;
    rec.routing_delta = delta;
    rec.feasible = schedule.feasible;
    rec.objective = schedule.objective;

    if (schedule.feasible &&
        (!have_best || schedule.objective < result.best_schedule.objective - 1e-12)) {
      result.best_schedule = schedule;
      best_routing = routing;
      have_best = true;
    }

    if (schedule.feasible && schedule.objective <= config.objective_threshold + 1e-12) {
      result.iterations.push_back(rec);
      result.terminated_by = StopReason::Satisfied;
      result.final_routing = routing;
      return result;
    }

    auto conflict = pick_conflict(instance, routing, build.sets, schedule);
    if (!conflict) {
      result.iterations.push_back(rec);
      result.terminated_by = StopReason::ExhaustedMoves;
      result.final_routing = have_best ? best_routing : routing;
      if (!have_best) result.best_schedule = last_schedule;
      return result;
    }
    rec.picked_conflict = conflict->label();

    std::string move;
    auto moved = reroute(routing, *conflict, instance, memory, visited, &move);
    if (!moved) {
      result.iterations.push_back(rec);
      result.terminated_by = StopReason::ExhaustedMoves;
      result.final_routing = have_best ? best_routing : routing;
      if (!have_best) result.best_schedule = last_schedule;
      return result;
    }
    rec.move_applied = move;
    result.iterations.push_back(rec);
    routing = *moved;
    visited.insert(routing);
    delta = move;
  }

  result.terminated_by = StopReason::MaxIterations;
  result.final_routing = have_best ? best_routing : routing;
  if (!have_best) result.best_schedule = last_schedule;
  return result;
}

}  // namespace rail
