#include "rail/qubo.hpp"

#include <algorithm>
#include <cmath>

namespace rail {

int VarIndex::at(const EventKey& event, GridTime t) const {
  auto it = group_of.find(event);
  if (it == group_of.end())
    throw RailError("missing-variable", "no group for " + event.first + "@" + event.second);
  const Group& g = groups[it->second];
  if (t < g.lb || t > g.ub)
    throw RailError("off-grid", "time outside window for " + event.first + "@" + event.second);
  return g.start + static_cast<int>(t - g.lb);
}

std::tuple<std::string, std::string, GridTime> VarIndex::describe(int index) const {
  for (const auto& g : groups)
    if (index >= g.start && index < g.start + g.size())
      return {g.event.first, g.event.second, g.lb + (index - g.start)};
  throw RailError("missing-variable", "index " + std::to_string(index) + " is not an x variable");
}

std::string to_string(PenaltyFamily f) {
  switch (f) {
    case PenaltyFamily::Objective: return "objective";
    case PenaltyFamily::OneHot: return "one-hot";
    case PenaltyFamily::Span: return "span";
    case PenaltyFamily::SingleTrack: return "single-track";
    case PenaltyFamily::Stay: return "stay";
    case PenaltyFamily::Circulation: return "circulation";
    case PenaltyFamily::Switch: return "switch";
    case PenaltyFamily::TrackOccupationPair: return "track-occupation-pair";
    case PenaltyFamily::TrackOccupationCubic: return "track-occupation-cubic";
    case PenaltyFamily::TrackOccupationResidual: return "track-occupation-residual";
    case PenaltyFamily::Quadratization: return "quadratization";
  }
  return "?";
}

PenaltyConstants default_penalty_constants(const DispatchInstance& instance) {
  double counted = 0.0;
  for (const auto& train : instance.trains)
    for (const auto& s : train.route)
      if (train.counted.count(s) && train.has_departure(s)) counted += train.weight;
  PenaltyConstants c;
  c.p_pair = 1.0 + counted;
  c.p_sum = 1.0 + counted;
  c.p_qubic = 2.0 * c.p_pair;
  return c;
}

VarIndex index_variables(const DispatchInstance& instance, const Routing& routing) {
  VarIndex index;
  auto windows = departure_windows(instance, routing);
  for (const auto& train : instance.trains)
    for (const auto& s : train.route) {
      auto it = windows.find({train.id, s});
      if (it == windows.end()) continue;
      VarIndex::Group g;
      g.event = {train.id, s};
      g.start = index.num_x;
      g.lb = it->second.lb;
      g.ub = it->second.ub;
      index.group_of[g.event] = static_cast<int>(index.groups.size());
      index.groups.push_back(g);
      index.num_x += g.size();
    }
  return index;
}

std::vector<Term> encode_objective(const VarIndex& index, const DispatchInstance& instance) {
  std::vector<Term> terms;
  for (const auto& g : index.groups) {
    const Train* train = instance.find_train(g.event.first);
    if (!train || !train->counted.count(g.event.second)) continue;
    GridTime d_max = instance.d_max_of(train->id);
    for (GridTime t = g.lb; t <= g.ub; ++t) {
      double coeff = train->weight * static_cast<double>(t - g.lb) / static_cast<double>(d_max);
      if (coeff != 0.0) terms.push_back({{index.at(g.event, t)}, coeff});
    }
  }
  return terms;
}

std::vector<Term> encode_sum_constraint(const VarIndex& index, double p_sum) {
  std::vector<Term> terms;
  for (const auto& g : index.groups) {
    for (int i = g.start; i < g.start + g.size(); ++i) {
      terms.push_back({{i}, -p_sum});
      for (int j = i + 1; j < g.start + g.size(); ++j) terms.push_back({{i, j}, 2.0 * p_sum});
    }
  }
  return terms;
}

std::vector<Term> emit_pairwise_penalty(const ForbiddenWindow& window, const VarIndex& index,
                                        double p_pair) {
  std::vector<Term> terms;
  const VarIndex::Group& ga = index.groups[index.group_of.at(window.var_a)];
  const VarIndex::Group& gb = index.groups[index.group_of.at(window.var_b)];
  for (GridTime ta = ga.lb; ta <= ga.ub; ++ta)
    for (GridTime tb = gb.lb; tb <= gb.ub; ++tb) {
      double d = static_cast<double>(tb - ta);
      if (window.lo < d && d < window.hi)
        terms.push_back({{index.at(window.var_a, ta), index.at(window.var_b, tb)}, 2.0 * p_pair});
    }
  return terms;
}

std::vector<Term> emit_track_occupation_cubic(const std::string& leaver,
                                              const std::string& arriver,
                                              const std::string& s, const std::string& s_prev,
                                              const VarIndex& index, const TimingParams& timing,
                                              double p_pair) {
  auto res = timing.resource_time(leaver, arriver, s);
  auto pass = timing.pass_time(arriver, s_prev, s);
  if (!res || !pass) throw RailError("missing-parameter", "res/pass missing at " + s);
  TripleRule rule;
  rule.leaver = {leaver, s};
  rule.arriver = {arriver, s};
  rule.prior = {arriver, s_prev};
  rule.shift = *res - *pass;

  std::vector<Term> terms;
  const VarIndex::Group& gl = index.groups[index.group_of.at(rule.leaver)];
  const VarIndex::Group& ga = index.groups[index.group_of.at(rule.arriver)];
  const VarIndex::Group& gp = index.groups[index.group_of.at(rule.prior)];
  for (GridTime tl = gl.lb; tl <= gl.ub; ++tl)
    for (GridTime ta = ga.lb; ta <= ga.ub; ++ta)
      for (GridTime tp = gp.lb; tp <= gp.ub; ++tp)
        if (rule.forbids(tl, ta, tp))
          terms.push_back({{index.at(rule.leaver, tl), index.at(rule.arriver, ta),
                            index.at(rule.prior, tp)},
                           2.0 * p_pair});
  return terms;
}

Reduction reduce_to_qubo(const std::vector<Term>& cubic_terms, VarIndex& index,
                         double p_pair, double p_qubic) {
  (void)p_pair;  // the residual keeps each cubic term's own coefficient
  Reduction red;
  for (const auto& term : cubic_terms) {
    if (term.vars.size() != 3)
      throw RailError("bad-term", "cubic reduction expects degree-3 terms");
    // By construction the first two indices are the departures at the shared
    // station; z binds that product.
    int x1 = std::min(term.vars[0], term.vars[1]);
    int x2 = std::max(term.vars[0], term.vars[1]);
    int x3 = term.vars[2];
    auto key = std::make_pair(x1, x2);
    auto it = index.aux_of.find(key);
    int z;
    if (it == index.aux_of.end()) {
      z = index.total();
      index.aux.push_back({z, x1, x2});
      index.aux_of[key] = z;
      red.quadratization.push_back({{z}, 3.0 * p_qubic});
      red.quadratization.push_back({{x1, x2}, p_qubic});
      red.quadratization.push_back({{x1, z}, -2.0 * p_qubic});
      red.quadratization.push_back({{x2, z}, -2.0 * p_qubic});
    } else {
      z = it->second;
    }
    red.residual.push_back({{z, x3}, term.coeff});
  }
  return red;
}

namespace {

void merge_terms(QuboModel& model, const std::vector<Term>& terms) {
  for (const auto& t : terms) {
    if (t.vars.size() == 1) {
      model.linear[t.vars[0]] += t.coeff;
    } else if (t.vars.size() == 2) {
      int lo = std::min(t.vars[0], t.vars[1]);
      int hi = std::max(t.vars[0], t.vars[1]);
      model.quadratic[{lo, hi}] += t.coeff;
    } else {
      throw RailError("bad-term", "model accepts only linear and quadratic terms");
    }
  }
}

PenaltyFamily family_of(const PairRule& r) {
  if (r.is_stay) return PenaltyFamily::Stay;
  if (r.is_circulation) return PenaltyFamily::Circulation;
  switch (r.kind) {
    case ConflictKind::Span: return PenaltyFamily::Span;
    case ConflictKind::SingleTrack: return PenaltyFamily::SingleTrack;
    case ConflictKind::Switch: return PenaltyFamily::Switch;
    case ConflictKind::StationTrack: return PenaltyFamily::TrackOccupationPair;
    default: return PenaltyFamily::Circulation;
  }
}

}  // namespace

QuboEncoding assemble(const DispatchInstance& instance, const Routing& routing,
                      const ConflictSets& sets, const PenaltyConstants& constants) {
  QuboEncoding enc;
  enc.index = index_variables(instance, routing);
  enc.model.constants = constants;

  enc.families[PenaltyFamily::Objective] = encode_objective(enc.index, instance);
  enc.families[PenaltyFamily::OneHot] = encode_sum_constraint(enc.index, constants.p_sum);

  RuleSet rules = build_rules(instance, routing, sets);
  for (const auto& r : rules.pairs) {
    ForbiddenWindow w;
    w.var_a = r.a;
    w.var_b = r.b;
    w.lo = r.lo;
    w.hi = r.hi;
    auto terms = emit_pairwise_penalty(w, enc.index, constants.p_pair);
    auto& fam = enc.families[family_of(r)];
    fam.insert(fam.end(), terms.begin(), terms.end());
  }

  std::vector<Term> cubic;
  for (const auto& t : rules.triples) {
    auto terms = emit_track_occupation_cubic(t.leaver.first, t.arriver.first, t.leaver.second,
                                             t.prior.second, enc.index, instance.timing,
                                             constants.p_pair);
    cubic.insert(cubic.end(), terms.begin(), terms.end());
  }
  enc.families[PenaltyFamily::TrackOccupationCubic] = cubic;
  Reduction red = reduce_to_qubo(cubic, enc.index, constants.p_pair, constants.p_qubic);
  enc.families[PenaltyFamily::TrackOccupationResidual] = red.residual;
  enc.families[PenaltyFamily::Quadratization] = red.quadratization;

  for (const auto& [fam, terms] : enc.families) {
    if (fam == PenaltyFamily::TrackOccupationCubic) continue;  // replaced by the reduction
    merge_terms(enc.model, terms);
  }
  std::erase_if(enc.model.linear, [](const auto& kv) { return kv.second == 0.0; });
  std::erase_if(enc.model.quadratic, [](const auto& kv) { return kv.second == 0.0; });

  enc.model.n = enc.index.total();
  for (const auto& g : enc.index.groups) {
    std::vector<int> ids;
    for (int i = g.start; i < g.start + g.size(); ++i) ids.push_back(i);
    enc.model.groups.push_back(std::move(ids));
  }
  enc.floor = -constants.p_sum * static_cast<double>(enc.index.groups.size());
  return enc;
}

QuboEncoding assemble(const DispatchInstance& instance, const Routing& routing) {
  return assemble(instance, routing, derive_conflict_sets(instance, routing),
                  default_penalty_constants(instance));
}

DecodedSample decode(const std::vector<std::uint8_t>& bits, const QuboEncoding& encoding,
                     const DispatchInstance& instance) {
  DecodedSample out;
  if (static_cast<int>(bits.size()) != encoding.model.n)
    throw RailError("length-mismatch", "bit vector length does not match the model");

  out.one_hot = true;
  for (const auto& g : encoding.index.groups) {
    int count = 0;
    GridTime chosen = 0;
    for (GridTime t = g.lb; t <= g.ub; ++t)
      if (bits[encoding.index.at(g.event, t)]) { ++count; chosen = t; }
    if (count == 1) {
      out.schedule.departure[g.event] = chosen;
      out.schedule.secondary_delay[g.event] = chosen - g.lb;
    } else {
      out.one_hot = false;
      out.diagnostics.push_back({count == 0 ? "empty-group" : "multi-hot",
                                 "group " + g.event.first + "@" + g.event.second + " has " +
                                     std::to_string(count) + " active variables"});
    }
  }

  out.aux_consistent = true;
  for (const auto& a : encoding.index.aux) {
    if (bits[a.index] != (bits[a.x1] && bits[a.x2] ? 1 : 0)) {
      out.aux_consistent = false;
      out.diagnostics.push_back(
          {"aux-inconsistent", "z_" + std::to_string(a.index) + " != x_" +
                                   std::to_string(a.x1) + " * x_" + std::to_string(a.x2)});
    }
  }

  for (const auto& [fam, terms] : encoding.families) {
    double e = 0.0;
    for (const auto& t : terms) {
      double prod = t.coeff;
      for (int v : t.vars) prod *= bits[v] ? 1.0 : 0.0;
      e += prod;
    }
    out.family_energy[fam] = e;
  }

  if (out.one_hot) {
    out.schedule.objective = evaluate_objective(out.schedule, instance);
    double penalties = 0.0;
    for (const auto& [fam, e] : out.family_energy) {
      if (fam == PenaltyFamily::Objective || fam == PenaltyFamily::OneHot ||
          fam == PenaltyFamily::TrackOccupationResidual || fam == PenaltyFamily::Quadratization)
        continue;
      penalties += e;
    }
    double onehot_floor = -encoding.model.constants.p_sum *
                          static_cast<double>(encoding.index.groups.size());
    out.schedule.feasible = out.aux_consistent && penalties < 1e-9 &&
                            std::abs(out.family_energy.at(PenaltyFamily::OneHot) - onehot_floor) < 1e-9;
  } else {
    out.schedule.feasible = false;
  }
  return out;
}

}  // namespace rail
