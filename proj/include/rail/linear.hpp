#pragma once

#include "rail/core.hpp"
#include "rail/rules.hpp"

namespace rail {

struct TimeVar {
  std::string train, station;
  GridTime lb = 0, ub = 0;
};

// One difference row t[lhs] >= t[rhs] + c, active when its precedence
// variable holds the given value (y < 0 means unconditional).
struct Row {
  ConflictKind kind{};
  bool is_stay = false, is_circulation = false;
  int lhs = -1, rhs = -1;
  GridTime c = 0;
  int y = -1;
  int active_when = 1;
  std::string ja, jb, resource;
};

struct Violation {
  std::string family;  // "span", "single-track", ..., "stay", "window"
  std::string a, b;    // participants (b empty for stay/window)
  std::string resource;
  std::string detail;
};

struct Schedule {
  std::map<EventKey, GridTime> departure;
  std::map<EventKey, GridTime> secondary_delay;
  double objective = 0.0;
  bool feasible = false;
  std::vector<Violation> violations;
};

struct LinearModel {
  std::vector<TimeVar> time_vars;
  std::map<EventKey, int> var_of;

  std::vector<YKey> y_keys;        // stored precedence variables, sorted
  std::map<YKey, int> y_index;
  std::vector<int> y_parent;       // union-find over order equalities
  std::vector<std::pair<YKey, YKey>> order_equalities;

  std::vector<Row> rows;
  RuleSet rules;  // ground-truth windows, kept for feasibility checks
  double mu = 0.0;

  struct ObjTerm {
    int var;
    double weight;  // w_j
    GridTime t_u, d_max;
  };
  std::vector<ObjTerm> objective;

  int y_root(int i) const;
  int num_free_precedence() const;
};

struct VariableCounts {
  int num_time = 0;
  int num_precedence = 0;         // free variables after order-equality merging
  int num_precedence_stored = 0;  // distinct conflict keys before merging
};

LinearModel build_linear_model(const DispatchInstance& instance, const Routing& routing,
                               const ConflictSets& sets);

// Same construction from an explicit rule inventory (used to re-solve with a
// single conflict lifted).
LinearModel build_linear_model_from_rules(const DispatchInstance& instance,
                                          const Routing& routing, const RuleSet& rules);

VariableCounts count_variables(const LinearModel& model);

struct SolveOptions {
  int precedence_cap = 20;
  std::map<YKey, int> forced;  // pin chosen precedence variables
};

struct SolveStats {
  long assignments_tried = 0;
  int max_propagation_rounds = 0;
};

// Exact oracle: enumerate precedence assignments, propagate earliest times,
// keep the feasible schedule with the smallest objective. Ties are broken by
// the lexicographically smallest precedence vector.
Schedule solve_order_enumeration(const LinearModel& model, const SolveOptions& opts = {},
                                 SolveStats* stats = nullptr);

double evaluate_objective(const Schedule& schedule, const DispatchInstance& instance);

// Ground check of every condition family at the given departure times.
std::vector<Violation> check_feasibility(const Schedule& schedule, const LinearModel& model);

std::string export_lp(const LinearModel& model);

}  // namespace rail
