#pragma once

#include <optional>

#include "rail/linear.hpp"
#include "rail/qubo.hpp"
#include "rail/solvers.hpp"

namespace rail {

enum class SolverMode { LinearOracle, QuboBrute, QuboAnneal };

std::string to_string(SolverMode m);

struct DispatchConfig {
  double objective_threshold = 0.0;
  int max_iterations = 20;
  SolverMode solver_mode = SolverMode::LinearOracle;
  AnnealParams anneal;
  std::optional<PenaltyConstants> constants;  // defaults derived from the instance
};

struct IterationRecord {
  Routing routing;
  std::string routing_delta;  // move that produced this routing, "default" first
  bool feasible = false;
  double objective = 0.0;
  std::string picked_conflict;
  std::string move_applied;
};

enum class StopReason { Satisfied, ExhaustedMoves, MaxIterations };

std::string to_string(StopReason r);

struct DispatchResult {
  Schedule best_schedule;
  Routing final_routing;
  std::vector<IterationRecord> iterations;
  StopReason terminated_by = StopReason::MaxIterations;
};

struct RebuildOutput {
  ConflictSets sets;
  LinearModel linear;
  std::optional<QuboEncoding> qubo;
};

// Full re-derivation of conflict sets and models for a routing; no
// incremental patching.
RebuildOutput rebuild_after_reroute(const DispatchInstance& instance, const Routing& routing,
                                    const PenaltyConstants& constants, bool build_qubo);

// Infeasible solutions yield the violated conflict; otherwise the conflict
// whose removal would lower the objective the most (measured by re-solving
// the exact oracle with that conflict lifted).
std::optional<Conflict> pick_conflict(const DispatchInstance& instance, const Routing& routing,
                                      const ConflictSets& sets, const Schedule& schedule);

struct MoveMemory {
  std::map<std::string, std::set<std::string>> tried;  // conflict label -> move ids
};

// First applicable move in order: parallel track, platform, station path.
// A move must lift the picked conflict, validate, avoid routings already
// visited this run and moves already tried for this conflict.
std::optional<Routing> reroute(const Routing& routing, const Conflict& conflict,
                               const DispatchInstance& instance, MoveMemory& memory,
                               const std::set<Routing>& visited, std::string* move_desc);

DispatchResult run(const DispatchInstance& instance, const DispatchConfig& config);

}  // namespace rail
