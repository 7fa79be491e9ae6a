#include "rail/linear.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace rail {

int LinearModel::y_root(int i) const {
  while (y_parent[i] != i) i = y_parent[i];
  return i;
}

int LinearModel::num_free_precedence() const {
  std::set<int> roots;
  for (std::size_t i = 0; i < y_keys.size(); ++i) roots.insert(y_root(static_cast<int>(i)));
  return static_cast<int>(roots.size());
}

LinearModel build_linear_model(const DispatchInstance& instance, const Routing& routing,
                               const ConflictSets& sets) {
  return build_linear_model_from_rules(instance, routing, build_rules(instance, routing, sets));
}

LinearModel build_linear_model_from_rules(const DispatchInstance& instance,
                                          const Routing& routing, const RuleSet& rules) {
  LinearModel m;

  auto windows = departure_windows(instance, routing);
  for (const auto& train : instance.trains)
    for (const auto& s : train.route) {
      auto it = windows.find({train.id, s});
      if (it == windows.end()) continue;
      m.var_of[{train.id, s}] = static_cast<int>(m.time_vars.size());
      m.time_vars.push_back({train.id, s, it->second.lb, it->second.ub});
    }

  m.rules = rules;

  std::set<YKey> keys;
  for (const auto& r : m.rules.pairs)
    if (r.y) keys.insert(*r.y);
  for (const auto& t : m.rules.triples) keys.insert(t.y);
  for (const auto& k : keys) {
    m.y_index[k] = static_cast<int>(m.y_keys.size());
    m.y_keys.push_back(k);
  }
  m.y_parent.resize(m.y_keys.size());
  for (std::size_t i = 0; i < m.y_parent.size(); ++i) m.y_parent[i] = static_cast<int>(i);
  for (const auto& [ka, kb] : m.rules.order_equalities) {
    auto ia = m.y_index.find(ka);
    auto ib = m.y_index.find(kb);
    if (ia == m.y_index.end() || ib == m.y_index.end()) continue;
    m.order_equalities.push_back({ka, kb});
    int ra = m.y_root(ia->second);
    int rb = m.y_root(ib->second);
    if (ra != rb) m.y_parent[std::max(ra, rb)] = std::min(ra, rb);
  }

  auto var = [&](const EventKey& e) {
    auto it = m.var_of.find(e);
    if (it == m.var_of.end())
      throw RailError("missing-variable", "no departure variable for " + e.first + "@" + e.second);
    return it->second;
  };

  for (const auto& r : m.rules.pairs) {
    if (!r.y) {
      Row row;
      row.kind = r.kind;
      row.is_stay = r.is_stay;
      row.is_circulation = r.is_circulation;
      row.lhs = var(r.b);
      row.rhs = var(r.a);
      row.c = static_cast<GridTime>(r.hi);
      row.ja = r.ja; row.jb = r.jb; row.resource = r.resource;
      m.rows.push_back(row);
      continue;
    }
    int y = m.y_index.at(*r.y);
    Row fwd;  // y = 1: a acts first, so b keeps the upper gap
    fwd.kind = r.kind;
    fwd.lhs = var(r.b);
    fwd.rhs = var(r.a);
    fwd.c = static_cast<GridTime>(r.hi);
    fwd.y = y;
    fwd.active_when = 1;
    fwd.ja = r.ja; fwd.jb = r.jb; fwd.resource = r.resource;
    m.rows.push_back(fwd);
    Row rev;
    rev.kind = r.kind;
    rev.lhs = var(r.a);
    rev.rhs = var(r.b);
    rev.c = static_cast<GridTime>(-r.lo);
    rev.y = y;
    rev.active_when = 0;
    rev.ja = r.ja; rev.jb = r.jb; rev.resource = r.resource;
    m.rows.push_back(rev);
  }
  for (const auto& t : m.rules.triples) {
    Row row;
    row.kind = ConflictKind::StationTrack;
    row.lhs = var(t.prior);
    row.rhs = var(t.leaver);
    row.c = t.shift;
    row.y = m.y_index.at(t.y);
    row.active_when = t.active_when;
    row.ja = t.ja; row.jb = t.jb; row.resource = t.resource;
    m.rows.push_back(row);
  }

  for (const auto& train : instance.trains)
    for (const auto& s : train.route) {
      if (!train.counted.count(s)) continue;
      auto it = m.var_of.find({train.id, s});
      if (it == m.var_of.end()) continue;
      m.objective.push_back({it->second, train.weight, m.time_vars[it->second].lb,
                             instance.d_max_of(train.id)});
    }

  GridTime max_ub = 0, min_lb = 0, max_c = 0;
  for (const auto& v : m.time_vars) {
    max_ub = std::max(max_ub, v.ub);
    min_lb = std::min(min_lb, v.lb);
  }
  for (const auto& r : m.rows) max_c = std::max(max_c, std::abs(r.c));
  m.mu = static_cast<double>((max_ub - min_lb) + max_c + 1);

  return m;
}

VariableCounts count_variables(const LinearModel& model) {
  VariableCounts c;
  c.num_time = static_cast<int>(model.time_vars.size());
  c.num_precedence_stored = static_cast<int>(model.y_keys.size());
  c.num_precedence = model.num_free_precedence();
  return c;
}

namespace {

double objective_of(const LinearModel& model, const std::vector<GridTime>& times) {
  double obj = 0.0;
  for (const auto& term : model.objective)
    obj += term.weight * static_cast<double>(times[term.var] - term.t_u) /
           static_cast<double>(term.d_max);
  return obj;
}

struct PropagationResult {
  bool positive_cycle = false;
  std::vector<GridTime> times;
  std::vector<int> raised_by;  // row index that last raised each variable
  int rounds = 0;
};

PropagationResult propagate(const LinearModel& model, const std::vector<Row>& active) {
  PropagationResult r;
  const int n = static_cast<int>(model.time_vars.size());
  r.times.resize(n);
  r.raised_by.assign(n, -1);
  for (int i = 0; i < n; ++i) r.times[i] = model.time_vars[i].lb;
  for (int round = 0; round <= n; ++round) {
    bool changed = false;
    for (std::size_t k = 0; k < active.size(); ++k) {
      const Row& row = active[k];
      GridTime needed = r.times[row.rhs] + row.c;
      if (r.times[row.lhs] < needed) {
        r.times[row.lhs] = needed;
        r.raised_by[row.lhs] = static_cast<int>(k);
        changed = true;
      }
    }
    r.rounds = round + 1;
    if (!changed) return r;
  }
  r.positive_cycle = true;
  return r;
}

}  // namespace

Schedule solve_order_enumeration(const LinearModel& model, const SolveOptions& opts,
                                 SolveStats* stats) {
  const int stored = static_cast<int>(model.y_keys.size());

  // Map forced keys onto union-find roots; conflicting forces on one class
  // make the whole problem trivially infeasible.
  std::map<int, int> forced_root;
  bool contradictory_force = false;
  for (const auto& [key, value] : opts.forced) {
    auto it = model.y_index.find(key);
    if (it == model.y_index.end())
      throw RailError("unknown-variable", "forced precedence key not in model: " + key.name());
    int root = model.y_root(it->second);
    auto f = forced_root.find(root);
    if (f != forced_root.end() && f->second != value) contradictory_force = true;
    forced_root[root] = value;
  }

  std::vector<int> free_roots;
  {
    std::set<int> roots;
    for (int i = 0; i < stored; ++i) roots.insert(model.y_root(i));
    for (int r : roots)
      if (!forced_root.count(r)) free_roots.push_back(r);
  }
  if (static_cast<int>(free_roots.size()) > opts.precedence_cap)
    throw RailError("cap-exceeded",
                    "free precedence variables exceed the enumeration cap (" +
                        std::to_string(free_roots.size()) + " > " +
                        std::to_string(opts.precedence_cap) +
                        "); use the annealing path for this instance");

  Schedule best;
  best.feasible = false;
  std::vector<int> best_yvec;
  double best_exceed = std::numeric_limits<double>::infinity();
  Schedule fallback;
  std::vector<Violation> fallback_violations;
  int max_rounds = 0;
  long tried = 0;

  const std::uint64_t combos = contradictory_force ? 0 : (1ULL << free_roots.size());
  for (std::uint64_t mask = 0; mask < combos; ++mask) {
    ++tried;
    std::map<int, int> value_of_root = forced_root;
    for (std::size_t b = 0; b < free_roots.size(); ++b)
      value_of_root[free_roots[b]] = static_cast<int>((mask >> b) & 1ULL);

    std::vector<Row> active;
    for (const auto& row : model.rows) {
      if (row.y < 0) { active.push_back(row); continue; }
      if (value_of_root.at(model.y_root(row.y)) == row.active_when) active.push_back(row);
    }

    PropagationResult prop = propagate(model, active);
    max_rounds = std::max(max_rounds, prop.rounds);
    if (prop.positive_cycle) continue;

    double exceed = 0.0;
    std::vector<Violation> window_violations;
    for (std::size_t i = 0; i < model.time_vars.size(); ++i) {
      const TimeVar& v = model.time_vars[i];
      if (prop.times[i] > v.ub) {
        exceed += static_cast<double>(prop.times[i] - v.ub);
        Violation viol;
        viol.family = "window";
        viol.a = v.train;
        viol.resource = v.station;
        viol.detail = "departure " + std::to_string(prop.times[i]) + " exceeds d_max window [" +
                      std::to_string(v.lb) + "," + std::to_string(v.ub) + "] by " +
                      std::to_string(prop.times[i] - v.ub);
        window_violations.push_back(viol);
        // Walk the raising chain to the conflict responsible.
        int cur = static_cast<int>(i);
        std::set<int> seen;
        while (cur >= 0 && prop.raised_by[cur] >= 0 && !seen.count(cur)) {
          seen.insert(cur);
          const Row& row = active[prop.raised_by[cur]];
          if (row.y >= 0) {
            Violation cause;
            cause.family = to_string(row.kind);
            cause.a = row.ja;
            cause.b = row.jb;
            cause.resource = row.resource;
            cause.detail = "forced order pushes " + v.train + " beyond its window";
            window_violations.push_back(cause);
            break;
          }
          cur = row.rhs;
        }
      }
    }

    std::vector<int> yvec(stored);
    for (int i = 0; i < stored; ++i) yvec[i] = value_of_root.at(model.y_root(i));

    if (exceed == 0.0) {
      double obj = objective_of(model, prop.times);
      bool better = !best.feasible || obj < best.objective - 1e-12 ||
                    (std::abs(obj - best.objective) <= 1e-12 && yvec < best_yvec);
      if (better) {
        best = Schedule{};
        best.feasible = true;
        best.objective = obj;
        for (std::size_t i = 0; i < model.time_vars.size(); ++i) {
          EventKey key{model.time_vars[i].train, model.time_vars[i].station};
          best.departure[key] = prop.times[i];
          best.secondary_delay[key] = prop.times[i] - model.time_vars[i].lb;
        }
        best_yvec = yvec;
      }
    } else if (exceed < best_exceed) {
      best_exceed = exceed;
      fallback = Schedule{};
      fallback.feasible = false;
      for (std::size_t i = 0; i < model.time_vars.size(); ++i) {
        EventKey key{model.time_vars[i].train, model.time_vars[i].station};
        fallback.departure[key] = prop.times[i];
        fallback.secondary_delay[key] = prop.times[i] - model.time_vars[i].lb;
      }
      fallback.objective = objective_of(model, prop.times);
      fallback_violations = window_violations;
    }
  }

  if (stats) {
    stats->assignments_tried = tried;
    stats->max_propagation_rounds = max_rounds;
  }
  if (best.feasible) return best;
  fallback.violations = fallback_violations;
  if (fallback.departure.empty()) {
    fallback.feasible = false;
    Violation v;
    v.family = "window";
    v.detail = contradictory_force ? "contradictory forced precedence values"
                                   : "every precedence assignment forms a positive cycle";
    fallback.violations.push_back(v);
  }
  return fallback;
}

double evaluate_objective(const Schedule& schedule, const DispatchInstance& instance) {
  auto t_u = propagate_unavoidable_delays(instance, instance.default_routing);
  double obj = 0.0;
  for (const auto& train : instance.trains)
    for (const auto& s : train.route) {
      auto it = t_u.find({train.id, s});
      if (it == t_u.end()) continue;
      auto dep = schedule.departure.find({train.id, s});
      if (dep == schedule.departure.end())
        throw RailError("missing-departure", "schedule lacks departure for " + train.id + "@" + s);
      GridTime d_max = instance.d_max_of(train.id);
      if (dep->second < it->second || dep->second > it->second + d_max)
        throw RailError("outside-window", "departure of " + train.id + " at " + s +
                                              " lies outside its window");
      if (train.counted.count(s))
        obj += train.weight * static_cast<double>(dep->second - it->second) /
               static_cast<double>(d_max);
    }
  return obj;
}

std::vector<Violation> check_feasibility(const Schedule& schedule, const LinearModel& model) {
  std::vector<Violation> out;
  auto time_of = [&](const EventKey& e) { return schedule.departure.at(e); };

  for (const auto& v : model.time_vars) {
    auto it = schedule.departure.find({v.train, v.station});
    if (it == schedule.departure.end()) continue;
    if (it->second < v.lb || it->second > v.ub) {
      Violation viol;
      viol.family = "window";
      viol.a = v.train;
      viol.resource = v.station;
      viol.detail = "departure outside [" + std::to_string(v.lb) + "," + std::to_string(v.ub) + "]";
      out.push_back(viol);
    }
  }

  // One violation per conflict; a conflict is broken as soon as any of its
  // forbidden patterns is active at the given times.
  std::map<std::tuple<std::string, std::string, std::string, std::string>, Violation> broken;
  auto record = [&](ConflictKind kind, const std::string& ja, const std::string& jb,
                    const std::string& resource, const std::string& detail) {
    auto key = std::make_tuple(to_string(kind), ja, jb, resource);
    if (broken.count(key)) return;
    Violation v;
    v.family = to_string(kind);
    v.a = ja; v.b = jb; v.resource = resource; v.detail = detail;
    broken[key] = v;
  };

  for (const auto& r : model.rules.pairs) {
    GridTime ta = time_of(r.a), tb = time_of(r.b);
    if (!r.forbids(ta, tb)) continue;
    if (r.is_stay) {
      Violation v;
      v.family = "stay";
      v.a = r.ja;
      v.resource = r.resource;
      v.detail = "minimal stay violated: " + std::to_string(tb - ta) + " < " +
                 std::to_string(static_cast<GridTime>(r.hi));
      out.push_back(v);
    } else if (r.is_circulation) {
      record(ConflictKind::RollingStock, r.ja, r.jb, r.resource, "turnaround not respected");
    } else {
      record(r.kind, r.ja, r.jb, r.resource, "forbidden departure separation");
    }
  }
  for (const auto& t : model.rules.triples) {
    if (t.forbids(time_of(t.leaver), time_of(t.arriver), time_of(t.prior)))
      record(ConflictKind::StationTrack, t.ja, t.jb, t.resource,
             t.arriver.first + " arrives while " + t.leaver.first + " holds the track");
  }
  for (const auto& [key, v] : broken) out.push_back(v);
  return out;
}

std::string export_lp(const LinearModel& model) {
  std::ostringstream os;
  auto tname = [&](int i) {
    return "t_" + model.time_vars[i].train + "_" + model.time_vars[i].station;
  };
  auto yname = [&](int i) { return "y_" + model.y_keys[model.y_root(i)].name(); };

  os << "\\ departure scheduling model\n";
  os << "Minimize\n obj:";
  bool first = true;
  for (const auto& term : model.objective) {
    double coeff = term.weight / static_cast<double>(term.d_max);
    os << (first ? " " : " + ") << coeff << " " << tname(term.var);
    first = false;
  }
  if (first) os << " 0 " << (model.time_vars.empty() ? "x" : tname(0));
  os << "\nSubject To\n";
  int idx = 0;
  for (const auto& row : model.rows) {
    os << " c" << idx++ << ": " << tname(row.lhs) << " - " << tname(row.rhs);
    if (row.y < 0) {
      os << " >= " << row.c << "\n";
    } else if (row.active_when == 1) {
      // t_lhs - t_rhs + mu (1 - y) >= c
      os << " - " << model.mu << " " << yname(row.y) << " >= " << (row.c - model.mu) << "\n";
    } else {
      os << " + " << model.mu << " " << yname(row.y) << " >= " << row.c << "\n";
    }
  }
  os << "Bounds\n";
  for (std::size_t i = 0; i < model.time_vars.size(); ++i)
    os << " " << model.time_vars[i].lb << " <= " << tname(static_cast<int>(i)) << " <= "
       << model.time_vars[i].ub << "\n";
  os << "Binaries\n";
  std::set<std::string> seen;
  for (std::size_t i = 0; i < model.y_keys.size(); ++i)
    if (seen.insert(yname(static_cast<int>(i))).second)
      os << " " << yname(static_cast<int>(i)) << "\n";
  os << "End\n";
  return os.str();
}

}  // namespace rail
